import numpy as np
import pandas as pd
import pytest

from metrics import MetricReport, compare_methods, write_metric_rows, write_summary
from metrics.reports import comparison_table
from utils.errors import ParameterError


def reports_for(metric, shifts, n=30, seed=0):
    base = np.random.default_rng(seed).normal(size=n)
    return {name: MetricReport.from_scores(metric, base + shift, method='saliency', enhancer=name)
            for name, shift in shifts.items()}


def test_from_scores_summary():
    report = MetricReport.from_scores('sparseness', [0.2, 0.4, 0.6], method='saliency', enhancer='ng')
    assert report.mean == pytest.approx(0.4)
    assert report.std == pytest.approx(np.std([0.2, 0.4, 0.6]))
    assert report.sample_ids == [0, 1, 2]
    assert report.label == 'saliency+ng'
    assert MetricReport.from_scores('auc', [1.0], method='intgrad').label == 'intgrad'


def test_from_scores_rejects_bad_input():
    with pytest.raises(ParameterError):
        MetricReport.from_scores('auc', [])
    with pytest.raises(ParameterError):
        MetricReport.from_scores('auc', [0.1, np.nan])


def test_best_and_indistinguishable_methods_are_bold():
    reports = reports_for('localization', {'none': 0.0, 'sg': 0.0001, 'ng': 1.0, 'fg': 1.0})
    table = compare_methods(reports).set_index('enhancer')
    assert bool(table.loc['ng', 'bold']) and bool(table.loc['fg', 'bold'])
    assert not table.loc['none', 'bold'] and not table.loc['sg', 'bold']
    assert table.loc['none', 'p_vs_best'] < 0.05


def test_lower_is_better_for_robustness():
    table = compare_methods(reports_for('robustness', {'none': 0.0, 'ng': -1.0})).set_index('enhancer')
    assert table.loc['ng', 'bold'] and not table.loc['none', 'bold']
    assert np.isnan(table.loc['ng', 'p_vs_best'])


def test_small_samples_are_not_significant():
    table = compare_methods(reports_for('faithfulness', {'none': 0.0, 'ng': 1.0}, n=5))
    assert table['bold'].all()


def test_identical_scores_are_bold_with_p_one():
    table = compare_methods(reports_for('auc', {'none': 0.0, 'sg': 0.0})).set_index('enhancer')
    assert table['bold'].all()
    assert table.loc['sg', 'p_vs_best'] == 1.0


def test_scores_are_paired_by_sample_id():
    base = np.random.default_rng(3).normal(size=25)
    best = MetricReport.from_scores('auc', base + 1.0, enhancer='ng', sample_ids=range(25))
    # same scores, listed in reverse sample order
    shuffled = MetricReport.from_scores('auc', (base + 1.0)[::-1], enhancer='fg', sample_ids=range(24, -1, -1))
    table = compare_methods({'ng': best, 'fg': shuffled}).set_index('enhancer')
    assert table.loc['fg', 'p_vs_best'] == 1.0


def test_mixed_metrics_rejected():
    with pytest.raises(ParameterError):
        compare_methods({'none': MetricReport.from_scores('auc', [1.0]),
                         'ng': MetricReport.from_scores('sparseness', [1.0], enhancer='ng')})
    with pytest.raises(ParameterError):
        compare_methods({})


def test_csv_outputs(tmp_path):
    reports = list(reports_for('localization', {'none': 0.0, 'ng': 1.0}, n=20).values()) + \
        list(reports_for('sparseness', {'none': 0.0, 'ng': 0.5}, n=20).values())
    write_metric_rows(reports, str(tmp_path / 'metric_rows.csv'))
    rows = pd.read_csv(tmp_path / 'metric_rows.csv')
    assert list(rows.columns) == ['sample_id', 'method', 'enhancer', 'metric', 'score']
    assert len(rows) == 80

    table = write_summary(reports, str(tmp_path / 'comparison.csv'))
    assert len(table) == 4
    assert list(table['metric']) == ['localization', 'localization', 'sparseness', 'sparseness']
    assert list(pd.read_csv(tmp_path / 'comparison.csv').columns) == list(comparison_table(reports).columns)
