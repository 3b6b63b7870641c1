"""Directional checks on the trained glyph benchmark; run with `pytest -m slow`"""

import numpy as np
import pytest

from calibration import accuracy_drop, calibrate_ng, sigma_sg_rule
from dispatcher import ExperimentDispatcher, choose_samples
from enhancers import EnhancerConfig
from explainers.explainers import ExplainerSpec
from global_am import AmConfig, activation_maximize
from metrics import compare_methods, wilcoxon_signed_rank
from metrics.metrics import FaithfulnessConfig, d_auc
from nn.model import accuracy

pytestmark = pytest.mark.slow

SAMPLES = 128
ENSEMBLE = 50


def run_dispatcher(model, test_set, configs, metrics, ids):
    dispatcher = ExperimentDispatcher(model, test_set, ExplainerSpec('saliency'), configs, metrics,
                                      faithfulness=FaithfulnessConfig(), sensitivity_draws=5, seed=0, threads=4)
    reports = {}
    for enhancer in configs:
        results = dispatcher.process_batch(ids, enhancer)
        for report in dispatcher.build_reports(results, enhancer):
            reports.setdefault(report.metric, {})[enhancer] = report
    return reports


@pytest.fixture(scope='module')
def benchmark(glyph_setup):
    model, _, test_set = glyph_setup
    calibration = calibrate_ng(model, test_set, seed=0)
    sigma_ng = calibration.sigma
    configs = {
        'none': EnhancerConfig(),
        'sg': EnhancerConfig(sigma_sg=sigma_sg_rule(test_set, 0.2)),
        'ng': EnhancerConfig(sigma_ng=sigma_ng, m_models=ENSEMBLE),
        'fg': EnhancerConfig(sigma_sg=sigma_sg_rule(test_set, 0.1), sigma_ng=sigma_ng, m_models=ENSEMBLE),
    }
    ids = choose_samples(test_set, SAMPLES, 0)
    reports = run_dispatcher(model, test_set, configs, ['localization', 'robustness', 'auc'], ids)
    return model, test_set, configs, reports, calibration


def test_glyph_model_learns(glyph_setup):
    model, _, test_set = glyph_setup
    assert accuracy(model, test_set) >= 0.95


def test_noisegrad_localizes_better_than_baseline(benchmark):
    _, _, _, reports, _ = benchmark
    localization = reports['localization']
    assert localization['fg'].mean >= localization['ng'].mean > localization['none'].mean
    assert wilcoxon_signed_rank(localization['none'].scores, localization['ng'].scores).p_value < 0.05
    table = compare_methods(localization).set_index('enhancer')
    assert not table.loc['none', 'bold']


def test_noisegrad_is_more_robust_than_baseline(benchmark):
    _, _, _, reports, _ = benchmark
    assert reports['robustness']['ng'].mean < reports['robustness']['none'].mean


def test_noisegrad_improves_auc(benchmark):
    _, _, _, reports, _ = benchmark
    assert d_auc(reports['auc']['ng'].mean, reports['auc']['none'].mean) > 0


def test_accuracy_drop_heuristic_pays_off(benchmark):
    model, test_set, configs, reports, calibration = benchmark
    # the two ends of the AUC-vs-drop curve: sigma 0 and the calibrated 5% point
    assert accuracy_drop(model, test_set, 0.0) == 0.0
    drop = accuracy_drop(model, test_set, configs['ng'].sigma_ng, seed=0)
    assert drop == calibration.achieved_drop
    assert abs(drop - 0.05) <= 0.01
    assert reports['auc']['ng'].mean > reports['auc']['none'].mean


def test_noise_grid_peaks_away_from_the_origin(benchmark):
    model, test_set, configs, reports, _ = benchmark
    ng_grid = [0.0, configs['ng'].sigma_ng]
    sg_grid = [0.0, configs['fg'].sigma_sg, configs['sg'].sigma_sg]
    ids = choose_samples(test_set, SAMPLES, 0)
    baseline = reports['auc']['none'].mean
    grid = np.zeros((len(sg_grid), len(ng_grid)))
    for r, sigma_sg in enumerate(sg_grid):
        for c, sigma_ng in enumerate(ng_grid):
            if sigma_sg == 0 and sigma_ng == 0:
                auc = baseline
            else:
                cfg = {'fg': EnhancerConfig(sigma_sg=sigma_sg, sigma_ng=sigma_ng)}
                auc = run_dispatcher(model, test_set, cfg, ['auc'], ids)['auc']['fg'].mean
            grid[r, c] = d_auc(auc, baseline)
    assert grid[0, 0] == 0.0
    assert np.unravel_index(np.argmax(grid), grid.shape) != (0, 0)
    assert grid.max() > 0


def test_ensemble_am_objective_improves(benchmark):
    model, _, configs, _, _ = benchmark
    cfg = AmConfig(neuron=0, m_models=10, sigma_ng=configs['ng'].sigma_ng, seed=0)
    trace = activation_maximize(model, cfg).objective_trace
    assert trace[-1] - trace[0] >= 0.2 * abs(trace[0])
    assert np.isfinite(trace).all()
