# Configuration for the NoiseGrad explanation lab
import os

# Dataset Configuration
DATASET_CONFIG = {
    'kind': 'glyph',              # 'glyph' or 'toy'
    'side': 12,
    'glyph_classes': 4,
    'noise_std': 0.3,
    'mask_mode': 'box',
    'scale': 1,
    'train_size': 4096,
    'test_size': 512,
    # toy mixture
    'toy_points': 1024,
    'toy_variance': 0.5,
    'toy_test_size': 64,
}

# Model Configuration
MODEL_CONFIG = {
    'hidden': '128,128,32',       # comma separated hidden widths
    'checkpoint': 'model.mlp',
}

TOY_MODEL_CONFIG = {
    'hidden': '16,16',
}

# Training Configuration
TRAINING_CONFIG = {
    'epochs': 30,
    'batch_size': 64,
    'learning_rate': 0.05,
    'momentum': 0.9,
    'weight_decay': 0.0,
}

TOY_TRAINING_CONFIG = {
    'epochs': 50,
    'batch_size': 32,
    'learning_rate': 0.01,
    'momentum': 0.5,
    'weight_decay': 0.0,
}

# Explainer Configuration
EXPLAINER_CONFIG = {
    'method': 'saliency',
    'ig_steps': 128,
    'shap_samples': 16,
    'shap_pool_size': 8,          # training samples used as GradientSHAP baselines
    'occlusion_patch': 2,
    'occlusion_fill': 0.0,
    'gamma': 0.25,
}

# Enhancer Configuration
ENHANCER_CONFIG = {
    'n_inputs': 10,
    'm_models': 10,
    'share_input_noise': True,
    'average': 'post_abs',
    'perturb_bias': True,
    'memory_bounded': False,
    'sigma_sg': -1.0,             # negative: use the range rule
    'sigma_ng': -1.0,             # negative: calibrate to target_drop
    'alpha_sg': 0.2,
}

# Calibration Configuration
CALIBRATION_CONFIG = {
    'target_drop': 0.05,
    'tol': 0.01,
    'repeats': 10,
    'samples': 512,
    'fg_mode': 'appendix',        # 'appendix' or 'halve'
    'fg_alpha_sg': 0.1,
}

# Metric Configuration
METRIC_CONFIG = {
    'metrics': 'localization,faithfulness,robustness,sparseness,auc',
    'subset_size': 32,
    'iterations': 100,
    'baseline_value': 0.0,
    'radius': 0.2,
    'sensitivity_draws': 10,
}

# Activation Maximisation Configuration
AM_CONFIG = {
    'target_layer': -1,
    'neuron': 0,
    'steps': 512,
    'step_size': 0.05,
    'box_low': 0.0,
    'box_high': 1.0,
    'l2_penalty': 1e-3,
    'jitter_std': 0.01,
    'm_models': 10,
    'sigma_ng': -1.0,             # negative: calibrate
    'resample_per_step': False,
}

# Experiment Configuration
EXPERIMENT_CONFIG = {
    'seed': 0,
    'samples': 128,
    'threads': 1,
    'out': os.getenv('GNLAB_OUT_DIR', './runs/default'),
    'sweep_sigma_ng': '0,0.05,0.1,0.2,0.3',
    'sweep_sigma_sg': '0,0.05,0.1,0.2',
    'curve_points': 10,
}

# Logging Configuration
LOGGING_CONFIG = {
    'level': os.getenv('GNLAB_LOG_LEVEL', 'INFO'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'file': os.getenv('GNLAB_LOG_FILE', './logs/gnlab.log')
}

# INI section name -> defaults
SECTIONS = {
    'dataset': DATASET_CONFIG,
    'model': MODEL_CONFIG,
    'training': TRAINING_CONFIG,
    'explainer': EXPLAINER_CONFIG,
    'enhancer': ENHANCER_CONFIG,
    'calibration': CALIBRATION_CONFIG,
    'metrics': METRIC_CONFIG,
    'am': AM_CONFIG,
    'experiment': EXPERIMENT_CONFIG,
}
