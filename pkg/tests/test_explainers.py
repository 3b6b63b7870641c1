import numpy as np
import pytest

from explainers.attribution import Attribution, read_attributions, write_attributions
from explainers.explainers import (ExplainerFactory, ExplainerSpec, gradshap, intgrad, lrp_gamma,
                                   lrp_layer_relevances, occlusion, occlusion_patches, saliency)
from nn.model import DenseLayer, MlpModel, forward
from utils.errors import ClassIndexError, DimensionError, FormatError, ParameterError


@pytest.fixture
def lrp_model():
    return MlpModel([DenseLayer(np.array([[2.0, -1.0], [1.0, 1.0]]), np.zeros(2), 'relu'),
                     DenseLayer(np.array([[2.0, 1.0]]), np.zeros(1), 'identity')])


def test_saliency_is_gradient(linear_model):
    attr = saliency(linear_model, np.array([1.0, -2.0, 0.5, 3.0]), 0)
    assert np.array_equal(attr.raw, linear_model.layers[0].weight[0])
    assert np.array_equal(attr.values, np.abs(attr.raw))
    assert attr.method == 'saliency' and attr.enhancer == 'none'


def test_intgrad_completeness_on_random_models():
    rng = np.random.default_rng(0)
    spec = ExplainerSpec('intgrad', ig_steps=256)
    for k in range(20):
        model = MlpModel.from_dims([6, 10, 3], seed=100 + k)
        x = rng.normal(size=6)
        c = k % 3
        attr = intgrad(model, x, c, spec)
        expected = forward(model, x)[c] - forward(model, np.zeros(6))[c]
        assert abs(attr.raw.sum() - expected) < 1e-3


def test_intgrad_linear_model_is_exact(linear_model):
    x = np.array([1.0, 2.0, 3.0, 4.0])
    baseline = np.array([0.5, 0.5, 0.5, 0.5])
    attr = intgrad(linear_model, x, 1, ExplainerSpec('intgrad', ig_steps=4, ig_baseline=baseline))
    assert np.allclose(attr.raw, (x - baseline) * linear_model.layers[0].weight[1], atol=1e-12)


def test_intgrad_baseline_shape_checked(linear_model):
    with pytest.raises(DimensionError):
        intgrad(linear_model, np.ones(4), 0, ExplainerSpec('intgrad', ig_baseline=np.zeros(3)))


def test_lrp_hand_example(lrp_model):
    x = np.array([1.0, 1.0])
    assert np.allclose(lrp_gamma(lrp_model, x, 0, gamma=0.0).raw, [5.0, -1.0], atol=1e-6)
    assert np.allclose(lrp_gamma(lrp_model, x, 0, gamma=1.0).raw, [11 / 3, 1 / 3], atol=1e-6)


@pytest.mark.parametrize('gamma', [0.0, 0.25, 1.0])
def test_lrp_conserves_relevance_without_biases(gamma):
    rng = np.random.default_rng(1)
    for k in range(10):
        model = MlpModel.from_dims([6, 9, 7, 4], seed=200 + k)
        x = rng.uniform(0.1, 1.0, 6)
        logits = forward(model, x)
        c = int(np.argmax(logits))
        for relevance in lrp_layer_relevances(model, x, c, gamma):
            assert relevance.sum() == pytest.approx(logits[c], rel=1e-6)


def test_lrp_rejects_negative_gamma(lrp_model):
    with pytest.raises(ParameterError):
        lrp_gamma(lrp_model, np.ones(2), 0, gamma=-0.5)


def test_occlusion_single_feature_patches(linear_model):
    x = np.array([1.0, 2.0, 3.0, 4.0])
    attr = occlusion(linear_model, x, 0, ExplainerSpec('occlusion', occlusion_patch=1))
    assert np.allclose(attr.raw, linear_model.layers[0].weight[0] * x, atol=1e-12)


def test_occlusion_patch_shares_score(linear_model):
    x = np.array([1.0, 2.0, 3.0, 4.0])
    attr = occlusion(linear_model, x, 0, ExplainerSpec('occlusion', occlusion_patch=2))
    w = linear_model.layers[0].weight[0]
    first, second = (w[:2] * x[:2]).sum(), (w[2:] * x[2:]).sum()
    assert np.allclose(attr.raw, [first, first, second, second], atol=1e-12)


def test_occlusion_patches_tile_images():
    patches = occlusion_patches((4, 4), 2)
    assert len(patches) == 4
    assert sorted(np.concatenate(patches).tolist()) == list(range(16))
    assert patches[0].tolist() == [0, 1, 4, 5]
    ragged = occlusion_patches((5,), 2)
    assert [p.tolist() for p in ragged] == [[0, 1], [2, 3], [4]]


def test_gradshap_zero_pool_on_linear_model(linear_model):
    x = np.array([1.0, -1.0, 2.0, 0.5])
    attr = gradshap(linear_model, x, 1, ExplainerSpec('gradshap', shap_samples=8), seed=3)
    assert np.array_equal(attr.raw, x * linear_model.layers[0].weight[1])
    assert attr.seed_used == 3


def test_gradshap_is_seeded(tiny_model):
    x = np.linspace(0, 1, 6)
    spec = ExplainerSpec('gradshap', shap_samples=4, shap_baseline_pool=np.random.default_rng(0).normal(size=(5, 6)))
    a = gradshap(tiny_model, x, 0, spec, seed=1).raw
    assert np.array_equal(a, gradshap(tiny_model, x, 0, spec, seed=1).raw)
    assert not np.array_equal(a, gradshap(tiny_model, x, 0, spec, seed=2).raw)


def test_gradshap_empty_pool_rejected(tiny_model):
    spec = ExplainerSpec('gradshap', shap_baseline_pool=np.zeros((0, 6)))
    with pytest.raises(ParameterError):
        gradshap(tiny_model, np.ones(6), 0, spec)


def test_factory_knows_every_method():
    assert ExplainerFactory.get_supported_methods() == ['saliency', 'intgrad', 'gradshap', 'occlusion', 'lrp_gamma']
    for method in ExplainerFactory.get_supported_methods():
        assert ExplainerFactory.get_explainer(ExplainerSpec(method)).method == method
    with pytest.raises(ParameterError):
        ExplainerFactory.get_explainer(ExplainerSpec('deconvnet'))


def test_invalid_class_index(tiny_model):
    for method in ExplainerFactory.get_supported_methods():
        with pytest.raises(ClassIndexError):
            ExplainerFactory.get_explainer(ExplainerSpec(method)).explain(tiny_model, np.ones(6), 7)


def test_input_shape_is_kept():
    model = MlpModel.from_dims([16, 4, 2], seed=0)
    attr = ExplainerFactory.get_explainer(ExplainerSpec('saliency', input_shape=(4, 4))).explain(model, np.ones(16), 0)
    assert attr.shape == (4, 4)
    assert attr.as_image().shape == (4, 4)


def test_attribution_archive_appends(tmp_path, tiny_model):
    path = str(tmp_path / 'attributions.gnattr')
    first = saliency(tiny_model, np.ones(6), 0)
    first.record_id = 'none-0'
    second = Attribution(values=np.arange(4.0), raw=-np.arange(4.0), method='occlusion', enhancer='fg',
                         config_snapshot={'sigma_ng': 0.1}, seed_used=12, shape=(2, 2), record_id='fg-1')
    write_attributions(path, [first])
    write_attributions(path, [second], append=True)

    records = read_attributions(path)
    assert [r.record_id for r in records] == ['none-0', 'fg-1']
    assert np.array_equal(records[0].values, first.values)
    assert records[1].shape == (2, 2)
    assert records[1].config_snapshot == {'sigma_ng': 0.1}
    assert records[1].seed_used == 12 and records[0].seed_used is None
    assert np.array_equal(records[1].raw, second.raw)


def test_attribution_archive_truncated(tmp_path, tiny_model):
    path = tmp_path / 'attributions.gnattr'
    write_attributions(str(path), [saliency(tiny_model, np.ones(6), 0)])
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(FormatError):
        read_attributions(str(path))
