import logging
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence

from data.dataset import Dataset
from enhancers.enhancers import EnhancerConfig, enhance
from explainers.explainers import ExplainerSpec
from metrics.metrics import (FaithfulnessConfig, faithfulness_corr, gini_index, max_sensitivity, ranking_auc,
                             relevance_rank_accuracy)
from metrics.reports import MetricReport
from nn.model import MlpModel
from nn.seeding import STREAM_FAITHFULNESS, STREAM_SAMPLE, STREAM_SAMPLE_CHOICE, STREAM_SENSITIVITY, SeedSpec
from utils.errors import ConfigError, GnlabError
from utils.parallel import ordered_map

logger = logging.getLogger(__name__)

MASK_METRICS = ('localization', 'auc')


def choose_samples(data: Dataset, n: int, seed: int) -> List[int]:
    """n distinct indices in a seeded random order"""
    order = SeedSpec(seed).rng(STREAM_SAMPLE_CHOICE).permutation(len(data))
    return [int(i) for i in order[:min(n, len(data))]]


class ExperimentDispatcher:
    """Central dispatcher evaluating explanations of test samples under every enhancer"""

    def __init__(self, model: MlpModel, data: Dataset, explainer: ExplainerSpec,
                 enhancer_configs: Dict[str, EnhancerConfig], metrics: Sequence[str] = (),
                 faithfulness: Optional[FaithfulnessConfig] = None, radius: float = 0.2,
                 sensitivity_draws: int = 10, seed: int = 0, threads: int = 1):
        missing_masks = [m for m in metrics if m in MASK_METRICS]
        if missing_masks and not data.has_masks:
            raise ConfigError(f"metrics {missing_masks} need ground-truth masks, dataset '{data.name}' has none")
        self.model = model
        self.data = data
        self.explainer = replace(explainer, input_shape=explainer.input_shape or data.shape)
        self.enhancer_configs = enhancer_configs
        self.metrics = list(metrics)
        self.faithfulness = faithfulness or FaithfulnessConfig()
        self.radius = radius
        self.sensitivity_draws = sensitivity_draws
        self.seed = SeedSpec(seed)
        self.threads = threads
        self.processing_stats = self._empty_stats()

    @staticmethod
    def _empty_stats() -> Dict[str, Any]:
        return {'total_processed': 0, 'successful': 0, 'failed': 0, 'by_enhancer': {}}

    def sample_config(self, enhancer: str, sample_id: int) -> EnhancerConfig:
        """Enhancer config with the per-sample base seed; threads stay at 1 inside a sample"""
        return replace(self.enhancer_configs[enhancer],
                       base_seed=self.seed.child_seed(STREAM_SAMPLE, sample_id), threads=1)

    def explain_sample(self, sample_id: int, enhancer: str):
        cfg = self.sample_config(enhancer, sample_id)
        label = int(self.data.labels[sample_id])
        attr = enhance(self.model, self.data.inputs[sample_id], label, self.explainer, cfg, enhancer)
        attr.record_id = f"{enhancer}-{sample_id}"
        attr.extra['sample_id'] = sample_id
        return attr

    def score(self, metric: str, sample_id: int, enhancer: str, attr) -> float:
        x = self.data.inputs[sample_id]
        label = int(self.data.labels[sample_id])
        if metric == 'localization':
            return relevance_rank_accuracy(attr, self.data.masks[sample_id])
        if metric == 'auc':
            return ranking_auc(attr, self.data.masks[sample_id])
        if metric == 'sparseness':
            return gini_index(attr)
        if metric == 'faithfulness':
            return faithfulness_corr(self.model, x, label, attr, self.faithfulness,
                                     seed=self.seed.child(STREAM_FAITHFULNESS, sample_id))
        if metric == 'robustness':
            def explain_fn(model, x_moved, class_index):
                cfg = self.sample_config(enhancer, sample_id)
                return enhance(model, x_moved, class_index, self.explainer, cfg, enhancer)
            return max_sensitivity(explain_fn, self.model, x, label, self.radius, self.sensitivity_draws,
                                   seed=self.seed.child(STREAM_SENSITIVITY, sample_id))
        raise ConfigError(f"Unknown metric '{metric}'")

    def process_sample(self, sample_id: int, enhancer: str) -> Dict[str, Any]:
        """
        Explain one sample and score every configured metric.
        Returns the result dict with status and the steps taken
        """
        result = {
            'sample_id': sample_id,
            'enhancer': enhancer,
            'status': 'PROCESSING',
            'attribution': None,
            'scores': {},
            'error': None,
            'steps': []
        }

        try:
            attr = self.explain_sample(sample_id, enhancer)
            result['attribution'] = attr
            result['steps'].append(f"Explained with {self.explainer.method}/{enhancer}")

            for metric in self.metrics:
                result['scores'][metric] = self.score(metric, sample_id, enhancer, attr)
                result['steps'].append(f"{metric}={result['scores'][metric]:.6f}")

            result['status'] = 'SUCCESS'

        except GnlabError as e:
            result['status'] = 'FAILED'
            result['error'] = f"{type(e).__name__}: {e}"
            result['steps'].append(f"Error: {e}")

        return result

    def process_batch(self, sample_ids: Sequence[int], enhancer: str) -> List[Dict[str, Any]]:
        """Process samples in parallel; results come back in sample order"""
        logger.info(f"Processing {len(sample_ids)} samples with enhancer '{enhancer}'")
        results = ordered_map(lambda sample_id: self.process_sample(sample_id, enhancer), sample_ids, self.threads)

        for result in results:
            self.update_stats(enhancer, result['status'] == 'SUCCESS')
            if result['status'] != 'SUCCESS':
                logger.warning(f"Sample {result['sample_id']} ({enhancer}) {result['status']}: {result['error']}")
        self.processing_stats['total_processed'] += len(results)
        return results

    def build_reports(self, results: Sequence[Dict[str, Any]], enhancer: str) -> List[MetricReport]:
        """One MetricReport per metric over the successful samples"""
        succeeded = [r for r in results if r['status'] == 'SUCCESS']
        reports = []
        for metric in self.metrics:
            reports.append(MetricReport.from_scores(
                metric, [r['scores'][metric] for r in succeeded], method=self.explainer.method,
                enhancer=enhancer, sample_ids=[r['sample_id'] for r in succeeded],
                config_snapshot=self.enhancer_configs[enhancer].snapshot()))
        return reports

    def update_stats(self, enhancer: str, success: bool):
        if success:
            self.processing_stats['successful'] += 1
        else:
            self.processing_stats['failed'] += 1
        by_enhancer = self.processing_stats['by_enhancer']
        by_enhancer[enhancer] = by_enhancer.get(enhancer, 0) + 1

    def get_stats(self) -> Dict[str, Any]:
        return self.processing_stats.copy()

    def reset_stats(self):
        self.processing_stats = self._empty_stats()
