import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from metrics.statistics import wilcoxon_signed_rank
from utils.errors import DegenerateTestError, ParameterError, SmallSampleError

logger = logging.getLogger(__name__)

# +1: higher is better, -1: lower is better
METRIC_DIRECTIONS = {
    'localization': 1,
    'faithfulness': 1,
    'robustness': -1,
    'sparseness': 1,
    'auc': 1,
}

SIGNIFICANCE_LEVEL = 0.05
FLOAT_FORMAT = '%.10g'


@dataclass
class MetricReport:
    metric: str
    scores: List[float]
    mean: float
    std: float
    method: str = ''
    enhancer: str = 'none'
    sample_ids: List[int] = field(default_factory=list)
    config_snapshot: Optional[Dict[str, Any]] = None

    @classmethod
    def from_scores(cls, metric: str, scores: Sequence[float], method: str = '', enhancer: str = 'none',
                    sample_ids: Optional[Sequence[int]] = None,
                    config_snapshot: Optional[Dict[str, Any]] = None) -> 'MetricReport':
        values = np.asarray(scores, dtype=np.float64)
        if values.size == 0:
            raise ParameterError(f"MetricReport '{metric}' has no scores")
        if not np.all(np.isfinite(values)):
            raise ParameterError(f"MetricReport '{metric}' contains non-finite scores")
        ids = list(sample_ids) if sample_ids is not None else list(range(values.size))
        return cls(metric=metric, scores=values.tolist(), mean=float(values.mean()), std=float(values.std()),
                   method=method, enhancer=enhancer, sample_ids=ids, config_snapshot=config_snapshot)

    @property
    def label(self) -> str:
        return self.method if self.enhancer == 'none' else f"{self.method}+{self.enhancer}"


def metric_rows(reports: Sequence[MetricReport]) -> pd.DataFrame:
    """One row per (report, sample)"""
    rows = [(sample_id, r.method, r.enhancer, r.metric, score)
            for r in reports for sample_id, score in zip(r.sample_ids, r.scores)]
    return pd.DataFrame(rows, columns=['sample_id', 'method', 'enhancer', 'metric', 'score'])


def write_metric_rows(reports: Sequence[MetricReport], path: str):
    metric_rows(reports).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def _paired(a: MetricReport, b: MetricReport):
    """Scores of the samples both reports contain, in a's order"""
    b_scores = dict(zip(b.sample_ids, b.scores))
    common = [(score, b_scores[sid]) for sid, score in zip(a.sample_ids, a.scores) if sid in b_scores]
    return [s for s, _ in common], [s for _, s in common]


def compare_methods(reports: Mapping[str, MetricReport]) -> pd.DataFrame:
    """
    Reports of one metric keyed by enhancer. A row is bold when it is the best
    mean in the metric's direction, or when the Wilcoxon test against the best
    finds no significant difference at p = 0.05. Too few pairs to test counts
    as not significant.
    """
    if not reports:
        raise ParameterError("compare_methods needs at least one report")
    metrics = {r.metric for r in reports.values()}
    if len(metrics) != 1:
        raise ParameterError(f"compare_methods mixes metrics: {sorted(metrics)}")
    metric = metrics.pop()
    direction = METRIC_DIRECTIONS.get(metric, 1)

    names = list(reports)
    best = max(names, key=lambda name: direction * reports[name].mean)
    rows = []
    for name in names:
        report = reports[name]
        p_value = np.nan
        if name == best:
            bold = True
        else:
            try:
                p_value = wilcoxon_signed_rank(*_paired(reports[best], report)).p_value
                bold = p_value >= SIGNIFICANCE_LEVEL
            except SmallSampleError:
                bold = True
            except DegenerateTestError:
                p_value = 1.0
                bold = True
        rows.append({
            'metric': metric,
            'enhancer': name,
            'method': report.method,
            'mean': report.mean,
            'std': report.std,
            'mean_pm_std': f"{report.mean:.4f} ± {report.std:.4f}",
            'p_vs_best': p_value,
            'bold': bold,
        })
    return pd.DataFrame(rows)


def comparison_table(reports: Sequence[MetricReport]) -> pd.DataFrame:
    """Every metric's compare_methods block stacked in first-seen metric order"""
    by_metric: Dict[str, Dict[str, MetricReport]] = {}
    for report in reports:
        by_metric.setdefault(report.metric, {})[report.enhancer] = report
    return pd.concat([compare_methods(group) for group in by_metric.values()], ignore_index=True)


def write_summary(reports: Sequence[MetricReport], path: str) -> pd.DataFrame:
    table = comparison_table(reports)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote comparison table with {len(table)} rows to {path}")
    return table
