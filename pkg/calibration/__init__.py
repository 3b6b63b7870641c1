from calibration.calibration import (CalibrationResult, FusionCalibration, TracePoint, accuracy_drop,
                                     accuracy_under_noise, calibrate_fg, calibrate_ng, sigma_sg_rule,
                                     write_trace_csv)
