from global_am.activation_max import (AmConfig, AmResult, activation_maximize, ensemble_objective,
                                      plain_activation_maximize, write_objective_csv)
from global_am.render import am_render, normalize, read_graymap
