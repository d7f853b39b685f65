"""Linear long-horizon forecaster with frequency/time attention and routed weight sharing."""

from .checkpoint import Checkpoint
from .data import RawDataset, SplitSpec, Standardizer, WindowBatch, load_csv
from .estimator import DiPELinearForecaster
from .exceptions import (
    ConfigError,
    DataError,
    DegenerateWeightsError,
    DimensionError,
    DiPEError,
    IngestionError,
    NumericError,
    ParameterError,
    SymmetryError,
    UnsupportedConfigError,
)
from .losses import LossBreakdown, LossConfig
from .model import ModelConfig, ModelParams, init_params, model_forward, param_count
from .optim import Adam, TauSchedule
from .trainer import TrainerConfig, TrainReport, evaluate, fit, search_alpha, train

__version__ = "0.1.0"

__all__ = [
    "Adam", "Checkpoint", "ConfigError", "DataError", "DegenerateWeightsError", "DiPEError",
    "DiPELinearForecaster", "DimensionError", "IngestionError", "LossBreakdown", "LossConfig",
    "ModelConfig", "ModelParams", "NumericError", "ParameterError", "RawDataset", "SplitSpec",
    "Standardizer", "SymmetryError", "TauSchedule", "TrainReport", "TrainerConfig",
    "UnsupportedConfigError", "WindowBatch", "evaluate", "fit", "init_params", "load_csv",
    "model_forward", "param_count", "search_alpha", "train",
]
