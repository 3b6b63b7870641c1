#!/usr/bin/env python3
"""
NoiseGrad explanation lab - Main Orchestrator
Trains models, explains them, calibrates noise levels and writes metric tables
"""

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from calibration.calibration import (accuracy_drop, calibrate_fg, calibrate_ng, sigma_sg_rule,
                                     write_trace_csv)
from config.loader import ExperimentConfig, load_config, parse_list
from config.settings import LOGGING_CONFIG
from data.dataset import Dataset
from data.generators import ToyGaussSpec, make_masked_glyph, make_toy_gauss
from data.storage import save_dataset
from dispatcher import ExperimentDispatcher, choose_samples
from enhancers.enhancers import EnhancerConfig, enhance, sample_explanations
from explainers.attribution import ENHANCERS, write_attributions
from explainers.explainers import ExplainerSpec
from global_am.activation_max import AmConfig, activation_maximize, plain_activation_maximize
from global_am.render import am_render
from metrics.metrics import FaithfulnessConfig, d_auc, sanity_mean, sanity_scores
from metrics.reports import FLOAT_FORMAT, write_metric_rows, write_summary
from nn.autodiff import grad_input
from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.model import MlpModel, forward, forward_batch, perturb_weights, predict
from nn.seeding import STREAM_DATA_POINTS, STREAM_ENSEMBLE, SeedSpec
from nn.training import OptimizerConfig, train
from utils import plotting
from utils.file_detector import FileTypeDetector
from utils.errors import (CalibrationError, ConfigError, DimensionError, DivergenceError, GnlabError,
                          OptimizationError)
from utils.parallel import ordered_map

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CALIBRATION = 4

COMMANDS = ('train', 'explain', 'calibrate', 'compare', 'sweep', 'toy', 'heuristic-curve', 'sanity', 'am')
SANITY_SAMPLES = 64
TOY_GRID = 15


class ExperimentOrchestrator:
    """Runs one command of the lab against an output directory"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.out = config.out
        self.setup_logging()
        self.setup_directories()
        self.emitted: List[str] = []
        self.logger = logging.getLogger(__name__)
        self._data: Optional[Tuple[Dataset, Dataset]] = None
        self._model: Optional[MlpModel] = None
        self._noise: Optional[Dict[str, EnhancerConfig]] = None
        self.detector = FileTypeDetector()

    def setup_logging(self):
        """Setup logging configuration"""
        log_dir = os.path.dirname(LOGGING_CONFIG.get('file', './logs/gnlab.log'))
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)

        logging.basicConfig(
            level=getattr(logging, LOGGING_CONFIG.get('level', 'INFO')),
            format=LOGGING_CONFIG.get('format', '%(asctime)s - %(levelname)s - %(message)s'),
            handlers=[
                logging.FileHandler(LOGGING_CONFIG.get('file', './logs/gnlab.log')),
                logging.StreamHandler(sys.stdout)
            ]
        )

    def setup_directories(self):
        os.makedirs(self.out, exist_ok=True)

    @contextmanager
    def locked(self):
        """Hold <out>/.lock for the duration of a command"""
        lock_path = os.path.join(self.out, '.lock')
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"Output directory {self.out} is locked by another run ({lock_path})")
        try:
            os.write(fd, str(os.getpid()).encode('ascii'))
            os.close(fd)
            yield
        finally:
            os.remove(lock_path)

    # ---- files -------------------------------------------------------------

    def path(self, name: str) -> str:
        if name not in self.emitted:
            self.emitted.append(name)
        return os.path.join(self.out, name)

    def write_csv(self, frame: pd.DataFrame, name: str):
        frame.to_csv(self.path(name), index=False, float_format=FLOAT_FORMAT)

    def write_json(self, payload: Dict[str, Any], name: str):
        with open(self.path(name), 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write('\n')

    def write_manifest(self, command: str):
        payload = {
            'command': command,
            'config': self.config.snapshot(),
            'files': sorted(self.emitted),
        }
        with open(os.path.join(self.out, 'manifest.json'), 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write('\n')

    # ---- shared stages -----------------------------------------------------

    def data(self) -> Tuple[Dataset, Dataset]:
        """(train, test) generated from the config seed"""
        if self._data is None:
            ds = self.config['dataset']
            seed = SeedSpec(self.config.seed)
            if ds['kind'] == 'toy':
                spec = ToyGaussSpec(n_points=ds['toy_points'], variance=ds['toy_variance'],
                                    test_size=ds['toy_test_size'])
                self._data = make_toy_gauss(spec, seed.child(STREAM_DATA_POINTS))
            else:
                glyph = dict(side=ds['side'], glyph_classes=ds['glyph_classes'], noise_std=ds['noise_std'],
                             mask_mode=ds['mask_mode'], scale=ds['scale'])
                train_set = make_masked_glyph(ds['train_size'], seed=seed.child(STREAM_DATA_POINTS, 0), **glyph)
                test_set = make_masked_glyph(ds['test_size'], seed=seed.child(STREAM_DATA_POINTS, 1), **glyph)
                self._data = (train_set, test_set)
            self.logger.info(f"Dataset '{self._data[0].name}': {len(self._data[0])} train, {len(self._data[1])} test")
        return self._data

    def checkpoint_path(self) -> str:
        return os.path.join(self.out, self.config['model']['checkpoint'])

    def train_model(self) -> MlpModel:
        train_set, test_set = self.data()
        dims = [train_set.dim] + self.config.hidden_dims() + [max(train_set.num_classes, test_set.num_classes)]
        model = MlpModel.from_dims(dims, seed=self.config.seed)
        tr = self.config['training']
        opt = OptimizerConfig(epochs=tr['epochs'], batch_size=tr['batch_size'], learning_rate=tr['learning_rate'],
                              momentum=tr['momentum'], weight_decay=tr['weight_decay'], seed=self.config.seed)
        report = train(model, train_set, opt, test_data=test_set)
        save_checkpoint(model, self.path(self.config['model']['checkpoint']))
        self.write_csv(pd.DataFrame([vars(r) for r in report.history],
                                    columns=['epoch', 'loss', 'train_accuracy', 'test_accuracy']),
                       'training_history.csv')
        self.logger.info(f"Trained {model}: test accuracy {report.final_test_accuracy}")
        return model

    def model(self) -> MlpModel:
        """The checkpoint in the output directory, trained first if missing"""
        if self._model is None:
            path = self.checkpoint_path()
            if os.path.exists(path):
                if self.detector.detect_file_type(path) != 'CHECKPOINT':
                    raise ConfigError(f"{path} is not a model checkpoint")
                self._model = load_checkpoint(path)
                self.logger.info(f"Loaded {self._model} from {path}")
            else:
                self.logger.info(f"No checkpoint at {path}, training one")
                self._model = self.train_model()
        return self._model

    def explainer_spec(self) -> ExplainerSpec:
        ex = self.config['explainer']
        train_set, test_set = self.data()
        spec = ExplainerSpec(method=ex['method'], ig_steps=ex['ig_steps'], shap_samples=ex['shap_samples'],
                             occlusion_patch=ex['occlusion_patch'], occlusion_fill=ex['occlusion_fill'],
                             gamma=ex['gamma'], input_shape=test_set.shape)
        if spec.method == 'gradshap':
            pool = choose_samples(train_set, ex['shap_pool_size'], self.config.seed)
            spec = replace(spec, shap_baseline_pool=train_set.inputs[pool])
        spec.validate()
        return spec

    def calibration_data(self) -> Dataset:
        _, test_set = self.data()
        n = min(self.config['calibration']['samples'], len(test_set))
        return test_set.subset(range(n), f"{test_set.name}_calibration")

    def base_enhancer(self) -> EnhancerConfig:
        en = self.config['enhancer']
        return EnhancerConfig(n_inputs=en['n_inputs'], m_models=en['m_models'],
                              share_input_noise=en['share_input_noise'], average=en['average'],
                              perturb_bias=en['perturb_bias'], memory_bounded=en['memory_bounded'],
                              base_seed=self.config.seed)

    def noise_levels(self) -> Dict[str, EnhancerConfig]:
        """
        One EnhancerConfig per enhancer. Negative configured sigmas are replaced by
        the range rule (SG) and accuracy-drop calibration (NG, FG)
        """
        if self._noise is not None:
            return self._noise
        en = self.config['enhancer']
        cal = self.config['calibration']
        model = self.model()
        data = self.calibration_data()
        seed = self.config.seed
        base = self.base_enhancer()

        sigma_sg = en['sigma_sg'] if en['sigma_sg'] >= 0 else sigma_sg_rule(data, en['alpha_sg'])
        if en['sigma_ng'] >= 0:
            sigma_ng = en['sigma_ng']
        else:
            result = calibrate_ng(model, data, cal['target_drop'], cal['tol'], seed, cal['repeats'],
                                  threads=self.config.threads)
            write_trace_csv(result, self.path('calibration_ng.csv'))
            sigma_ng = result.sigma

        if en['sigma_sg'] >= 0 and en['sigma_ng'] >= 0:
            fg_sg, fg_ng = sigma_sg, sigma_ng
        else:
            fusion = calibrate_fg(model, data, cal['target_drop'], cal['tol'], seed, mode=cal['fg_mode'],
                                  alpha_sg=cal['fg_alpha_sg'], solo_values=(sigma_sg, sigma_ng)
                                  if cal['fg_mode'] == 'halve' else None,
                                  repeats=cal['repeats'], threads=self.config.threads)
            if fusion.ng_result is not None:
                write_trace_csv(fusion.ng_result, self.path('calibration_fg.csv'))
            fg_sg, fg_ng = fusion.as_tuple()

        self._noise = {
            'none': base,
            'sg': replace(base, sigma_sg=sigma_sg),
            'ng': replace(base, sigma_ng=sigma_ng),
            'fg': replace(base, sigma_sg=fg_sg, sigma_ng=fg_ng),
        }
        self.logger.info(f"Noise levels: sg={sigma_sg:.5f} ng={sigma_ng:.5f} fg=({fg_sg:.5f}, {fg_ng:.5f})")
        return self._noise

    def dispatcher(self, enhancer_configs: Dict[str, EnhancerConfig], metrics: List[str]) -> ExperimentDispatcher:
        m = self.config['metrics']
        _, test_set = self.data()
        return ExperimentDispatcher(
            self.model(), test_set, self.explainer_spec(), enhancer_configs, metrics,
            faithfulness=FaithfulnessConfig(subset_size=min(m['subset_size'], test_set.dim),
                                            iterations=m['iterations'], baseline_value=m['baseline_value']),
            radius=m['radius'], sensitivity_draws=m['sensitivity_draws'],
            seed=self.config.seed, threads=self.config.threads)

    def sample_ids(self) -> List[int]:
        _, test_set = self.data()
        return choose_samples(test_set, self.config.samples, self.config.seed)

    def mean_auc(self, cfg: EnhancerConfig, enhancer: str) -> float:
        """Mean ranking AUC of one enhancer setting over the chosen samples"""
        dispatcher = self.dispatcher({enhancer: cfg}, ['auc'])
        results = dispatcher.process_batch(self.sample_ids(), enhancer)
        return dispatcher.build_reports(results, enhancer)[0].mean

    # ---- commands ----------------------------------------------------------

    def cmd_train(self):
        self._model = self.train_model()
        _, test_set = self.data()
        save_dataset(test_set, self.path('test_set.gnds'))

    def cmd_explain(self):
        noise = self.noise_levels()
        dispatcher = self.dispatcher(noise, [])
        ids = self.sample_ids()
        attributions, rows = [], []
        for enhancer in ENHANCERS:
            for result in dispatcher.process_batch(ids, enhancer):
                attr = result['attribution']
                if attr is None:
                    continue
                attributions.append(attr)
                rows.append((attr.record_id, result['sample_id'], int(dispatcher.data.labels[result['sample_id']]),
                             attr.method, enhancer, attr.seed_used, float(attr.values.sum()),
                             float(attr.values.max())))
        write_attributions(self.path('attributions.gnattr'), attributions)
        self.write_csv(pd.DataFrame(rows, columns=['record_id', 'sample_id', 'label', 'method', 'enhancer',
                                                   'seed', 'total', 'max']), 'explanations.csv')

    def cmd_calibrate(self):
        noise = self.noise_levels()
        self.write_json({name: {'sigma_sg': cfg.sigma_sg, 'sigma_ng': cfg.sigma_ng}
                         for name, cfg in noise.items()}, 'calibration.json')

    def cmd_compare(self):
        noise = self.noise_levels()
        metrics = self.config.metric_names()
        dispatcher = self.dispatcher(noise, metrics)
        ids = self.sample_ids()
        reports, attributions = [], []
        for enhancer in ENHANCERS:
            results = dispatcher.process_batch(ids, enhancer)
            attributions.extend(r['attribution'] for r in results if r['attribution'] is not None)
            reports.extend(dispatcher.build_reports(results, enhancer))
        write_attributions(self.path('attributions.gnattr'), attributions)
        write_metric_rows(reports, self.path('metric_rows.csv'))
        write_summary(reports, self.path('comparison.csv'))
        stats = dispatcher.get_stats()
        self.logger.info(f"Compare finished: {stats['successful']} succeeded, {stats['failed']} failed")

    def cmd_sweep(self):
        ex = self.config['experiment']
        ng_grid = parse_list(ex['sweep_sigma_ng'])
        sg_grid = parse_list(ex['sweep_sigma_sg'])
        if not ng_grid or not sg_grid:
            raise ConfigError("[experiment] sweep grids must not be empty")
        base = self.base_enhancer()
        baseline_auc = self.mean_auc(base, 'none')

        grid = np.zeros((len(sg_grid), len(ng_grid)))
        rows = []
        for r, sigma_sg in enumerate(sg_grid):
            for c, sigma_ng in enumerate(ng_grid):
                if sigma_sg == 0 and sigma_ng == 0:
                    auc = baseline_auc
                else:
                    auc = self.mean_auc(replace(base, sigma_sg=sigma_sg, sigma_ng=sigma_ng), 'fg')
                grid[r, c] = d_auc(auc, baseline_auc)
                rows.append((sigma_ng, sigma_sg, auc, grid[r, c]))
                self.logger.info(f"Sweep sigma_ng={sigma_ng} sigma_sg={sigma_sg}: auc={auc:.4f} dAUC={grid[r, c]:.4f}")
        self.write_csv(pd.DataFrame(rows, columns=['sigma_ng', 'sigma_sg', 'auc', 'd_auc']), 'sweep.csv')
        plotting.heatmap_figure(grid, sg_grid, ng_grid, self.path('sweep.svg'),
                                row_name='sigma_sg', col_name='sigma_ng', title='dAUC')

    def cmd_heuristic_curve(self):
        cal = self.config['calibration']
        points = self.config['experiment']['curve_points']
        model = self.model()
        data = self.calibration_data()
        base = self.base_enhancer()
        sigmas = [0.0] + list(np.geomspace(0.01, 1.0, max(points - 1, 1)))
        rows = []
        for sigma in sigmas:
            drop = accuracy_drop(model, data, sigma, cal['repeats'], self.config.seed)
            auc = self.mean_auc(replace(base, sigma_ng=sigma), 'ng' if sigma else 'none')
            rows.append((sigma, drop, auc))
            self.logger.info(f"Heuristic curve sigma={sigma:.4f}: drop={drop:.4f} auc={auc:.4f}")
        frame = pd.DataFrame(rows, columns=['sigma_ng', 'accuracy_drop', 'auc'])
        self.write_csv(frame, 'heuristic_curve.csv')
        plotting.curve_figure(frame['accuracy_drop'], frame['auc'], self.path('heuristic_curve.svg'),
                              xlabel='accuracy drop', ylabel='mean AUC', vline=cal['target_drop'])

    def cmd_sanity(self):
        _, test_set = self.data()
        model = self.model()
        spec = self.explainer_spec()
        ids = choose_samples(test_set, min(self.config.samples, SANITY_SAMPLES), self.config.seed)
        subset = test_set.subset(ids)
        base = self.base_enhancer()

        def explain_fn(m, x, c):
            return enhance(m, x, c, spec, base, 'none')

        scores = sanity_scores(model, explain_fn, subset, seed=self.config.seed)
        mean = sanity_mean(scores)
        self.write_csv(pd.DataFrame({'spearman': scores}), 'sanity.csv')
        self.write_json({'method': spec.method, 'samples': len(ids), 'used': len(scores),
                         'mean_spearman': mean}, 'sanity.json')
        self.logger.info(f"Sanity check: mean Spearman {mean:.4f} over {len(scores)} samples")

    def cmd_am(self):
        am = self.config['am']
        model = self.model()
        _, test_set = self.data()
        sigma_ng = am['sigma_ng'] if am['sigma_ng'] >= 0 else self.noise_levels()['ng'].sigma_ng
        cfg = AmConfig(target_layer=am['target_layer'], neuron=am['neuron'], steps=am['steps'],
                       step_size=am['step_size'], box=(am['box_low'], am['box_high']),
                       l2_penalty=am['l2_penalty'], jitter_std=am['jitter_std'], m_models=am['m_models'],
                       sigma_ng=sigma_ng, seed=self.config.seed, resample_per_step=am['resample_per_step'],
                       threads=self.config.threads)
        plain = plain_activation_maximize(model, cfg)
        ensemble = activation_maximize(model, cfg)
        for name, result in (('am_plain', plain), ('am_ensemble', ensemble)):
            am_render(result.x_star, test_set.shape, os.path.join(self.out, name))
            self.path(f"{name}.pgm")
            self.path(f"{name}.svg")
        self.write_csv(pd.DataFrame({'step': np.arange(1, cfg.steps + 1),
                                     'plain': plain.objective_trace,
                                     'ensemble': ensemble.objective_trace}), 'am_trace.csv')

    def cmd_toy(self):
        """Arrow figure, gradient fields and the boundary-crossing check on the 2-D mixture"""
        if self.config.dataset_kind != 'toy':
            raise ConfigError("toy needs [dataset] kind = toy")
        model = self.model()
        train_set, test_set = self.data()
        noise = self.noise_levels()
        spec = ExplainerSpec('saliency', input_shape=(2,))

        # fixed point: the test sample closest to the decision boundary
        logits = forward_batch(model, test_set.inputs)
        top2 = np.sort(logits, axis=1)[:, -2:]
        index = int(np.argmin(top2[:, 1] - top2[:, 0]))
        point = test_set.inputs[index]
        label = int(predict(model, point[None, :])[0])

        arrows, rows = {}, []
        for enhancer in ENHANCERS:
            cfg = noise[enhancer]
            draws = np.array([a.raw for row in sample_explanations(model, point, label, spec, cfg, enhancer)
                              for a in row])
            mean = enhance(model, point, label, spec, cfg, enhancer).raw
            arrows[enhancer] = (draws, mean)
            rows.extend((enhancer, 'draw', k, d[0], d[1]) for k, d in enumerate(draws))
            rows.append((enhancer, 'mean', 0, mean[0], mean[1]))
        self.write_csv(pd.DataFrame(rows, columns=['enhancer', 'kind', 'draw', 'dx', 'dy']), 'toy_arrows.csv')
        plotting.arrow_figure(point, arrows, self.path('toy_arrows.svg'),
                              background=(train_set.inputs, train_set.labels))

        lo, hi = train_set.inputs.min(), train_set.inputs.max()
        axis = np.linspace(lo, hi, TOY_GRID)
        grid_points = [np.array([gx, gy]) for gy in axis for gx in axis]
        fields, field_rows = {}, []
        for enhancer in ('none', 'sg', 'ng'):
            cfg = noise[enhancer]
            grads = np.array(ordered_map(lambda p: enhance(model, p, label, spec, replace(cfg, threads=1),
                                                           enhancer).raw, grid_points, self.config.threads))
            fields[enhancer] = (grads[:, 0].reshape(TOY_GRID, TOY_GRID), grads[:, 1].reshape(TOY_GRID, TOY_GRID))
            field_rows.extend((enhancer, p[0], p[1], g[0], g[1]) for p, g in zip(grid_points, grads))
        self.write_csv(pd.DataFrame(field_rows, columns=['enhancer', 'x', 'y', 'dx', 'dy']), 'toy_field.csv')
        plotting.quiver_figure(axis, axis, {'none': fields['none'], 'ng': fields['ng']}, self.path('toy_field.svg'))
        plotting.quiver_figure(axis, axis, {'sg': fields['sg'], 'ng': fields['ng']}, self.path('toy_sg_vs_ng.svg'))

        ng = noise['ng']
        flips = sum(int(np.argmax(forward(perturb_weights(model, ng.sigma_ng, ng.seed.child(STREAM_ENSEMBLE, i)),
                                          point)) != label) for i in range(ng.m_models))
        self.write_json({'point': point.tolist(), 'label': label, 'sigma_ng': ng.sigma_ng,
                         'models': ng.m_models, 'models_flipping': flips,
                         'clean_gradient': grad_input(model, point, label).tolist()}, 'toy_summary.json')
        self.logger.info(f"Toy point {point.tolist()}: {flips}/{ng.m_models} perturbed models flip the label")

    def run(self, command: str):
        handler = getattr(self, 'cmd_' + command.replace('-', '_'))
        with self.locked():
            self.logger.info(f"Running '{command}' into {self.out}")
            handler()
            self.write_manifest(command)
            self.logger.info(f"'{command}' finished, {len(self.emitted)} files written")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='NoiseGrad explanation lab')
    parser.add_argument('--config', type=str, default=None, help='Experiment INI file')
    parser.add_argument('--seed', type=int, default=None, help='Base seed')
    parser.add_argument('--out', type=str, default=None, help='Output directory')
    parser.add_argument('--threads', type=int, default=None, help='Worker threads')
    parser.add_argument('--samples', type=int, default=None, help='Test samples to evaluate')
    parser.add_argument('command', choices=COMMANDS, help='What to run')
    return parser


def exit_code(error: Exception) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, (DivergenceError, OptimizationError, DimensionError)):
        return EXIT_NUMERIC
    if isinstance(error, CalibrationError):
        return EXIT_CALIBRATION
    return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, {'seed': args.seed, 'out': args.out, 'threads': args.threads,
                                           'samples': args.samples})
        ExperimentOrchestrator(config).run(args.command)
    except GnlabError as e:
        logging.getLogger(__name__).error(f"{type(e).__name__}: {e}")
        return exit_code(e)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
