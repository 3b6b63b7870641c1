import numpy as np
import pytest

from data.generators import make_masked_glyph, make_toy_gauss
from dispatcher import ExperimentDispatcher, choose_samples
from enhancers import EnhancerConfig
from explainers.explainers import ExplainerSpec
from metrics.metrics import FaithfulnessConfig
from nn.model import MlpModel
from utils.errors import ConfigError

METRICS = ['localization', 'faithfulness', 'robustness', 'sparseness', 'auc']


@pytest.fixture
def glyph_dispatcher():
    data = make_masked_glyph(12, side=8, glyph_classes=2, seed=0)
    model = MlpModel.from_dims([64, 24, 2], seed=0)
    configs = {
        'none': EnhancerConfig(),
        'sg': EnhancerConfig(sigma_sg=0.0, n_inputs=3),
        'ng': EnhancerConfig(sigma_ng=0.1, m_models=3),
        'fg': EnhancerConfig(sigma_sg=0.1, sigma_ng=0.1, n_inputs=2, m_models=2),
    }
    return ExperimentDispatcher(model, data, ExplainerSpec('saliency'), configs, METRICS,
                                faithfulness=FaithfulnessConfig(subset_size=8, iterations=10),
                                sensitivity_draws=3, seed=5)


def test_choose_samples_is_seeded_and_distinct():
    data = make_masked_glyph(20, seed=0)
    ids = choose_samples(data, 8, 3)
    assert ids == choose_samples(data, 8, 3)
    assert len(set(ids)) == 8
    assert choose_samples(data, 50, 3) == choose_samples(data, 20, 3)
    assert sorted(choose_samples(data, 50, 3)) == list(range(20))


def test_process_sample_scores_every_metric(glyph_dispatcher):
    result = glyph_dispatcher.process_sample(2, 'fg')
    assert result['status'] == 'SUCCESS'
    assert set(result['scores']) == set(METRICS)
    assert result['attribution'].record_id == 'fg-2'
    assert result['attribution'].shape == (8, 8)
    assert 0.0 <= result['scores']['localization'] <= 1.0
    assert result['scores']['robustness'] >= 0.0


def test_zero_noise_smoothgrad_scores_like_baseline(glyph_dispatcher):
    for sample_id in range(4):
        base = glyph_dispatcher.process_sample(sample_id, 'none')
        sg = glyph_dispatcher.process_sample(sample_id, 'sg')
        assert np.array_equal(base['attribution'].values, sg['attribution'].values)
        assert base['scores'] == sg['scores']


def test_batch_results_do_not_depend_on_threads(glyph_dispatcher):
    serial = glyph_dispatcher.process_batch([0, 3, 5], 'ng')
    glyph_dispatcher.threads = 3
    parallel = glyph_dispatcher.process_batch([0, 3, 5], 'ng')
    assert [r['sample_id'] for r in parallel] == [0, 3, 5]
    assert [r['scores'] for r in serial] == [r['scores'] for r in parallel]


def test_reports_and_stats(glyph_dispatcher):
    results = glyph_dispatcher.process_batch([0, 1, 2], 'none')
    reports = glyph_dispatcher.build_reports(results, 'none')
    assert [r.metric for r in reports] == METRICS
    assert reports[0].sample_ids == [0, 1, 2]
    stats = glyph_dispatcher.get_stats()
    assert stats['total_processed'] == 3 and stats['successful'] == 3
    assert stats['by_enhancer'] == {'none': 3}
    glyph_dispatcher.reset_stats()
    assert glyph_dispatcher.get_stats()['total_processed'] == 0


def test_failed_sample_is_reported_not_raised(glyph_dispatcher):
    glyph_dispatcher.data.inputs[1] = 0.0
    glyph_dispatcher.metrics = ['sparseness']
    result = glyph_dispatcher.process_sample(1, 'none')
    assert result['status'] == 'FAILED'
    assert 'UndefinedMetricError' in result['error']
    assert result['attribution'] is not None


def test_mask_metrics_need_masks():
    train_set, _ = make_toy_gauss(seed=0)
    model = MlpModel.from_dims([2, 4, 2], seed=0)
    with pytest.raises(ConfigError):
        ExperimentDispatcher(model, train_set, ExplainerSpec(), {'none': EnhancerConfig()}, ['auc'])
    ExperimentDispatcher(model, train_set, ExplainerSpec(), {'none': EnhancerConfig()}, ['sparseness'])
