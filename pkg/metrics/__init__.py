from metrics.metrics import (FaithfulnessConfig, d_auc, faithfulness_corr, gini_index, max_sensitivity,
                             ranking_auc, relevance_rank_accuracy, sanity_mean, sanity_randomization,
                             sanity_scores)
from metrics.reports import METRIC_DIRECTIONS, MetricReport, compare_methods, write_metric_rows, write_summary
from metrics.statistics import WilcoxonResult, spearman_rank_correlation, wilcoxon_signed_rank
