"""dlrkit: desk-scale dynamic line rating toolkit.

Computes conductor ampacity from weather via a steady-state heat balance,
generates reproducible synthetic sensor series, and forecasts DLR fifteen
minutes ahead with two hand-rolled models: a univariate LSTM baseline
(case 1) and a multivariate attention LSTM (case 2).
"""

__version__ = "0.1.0"

from .dataset import (FEATURE_ORDER, Measurement, Normalizer, TimeSeries,
                      WindowedDataset, chronological_split, fit_normalizer,
                      make_windows, read_csv, write_csv)
from .metrics import MetricsReport, evaluate, mae, mse, r_squared
from .model import Model, ModelConfig, TrainReport, build_model, load_model, predict, save_model, train
from .synth import GenConfig, generate
from .thermal import (DEFAULT_SPEC, ConductorSpec, WeatherPoint, heat_losses,
                      read_spec_file, resistance_at, solve_ampacity,
                      solve_conductor_temp)

__all__ = [
    "FEATURE_ORDER", "Measurement", "Normalizer", "TimeSeries", "WindowedDataset",
    "chronological_split", "fit_normalizer", "make_windows", "read_csv", "write_csv",
    "MetricsReport", "evaluate", "mae", "mse", "r_squared",
    "Model", "ModelConfig", "TrainReport", "build_model", "load_model", "predict",
    "save_model", "train",
    "GenConfig", "generate",
    "DEFAULT_SPEC", "ConductorSpec", "WeatherPoint", "heat_losses",
    "read_spec_file", "resistance_at", "solve_ampacity", "solve_conductor_temp",
    "__version__",
]
