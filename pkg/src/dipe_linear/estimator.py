"""scikit-learn style wrapper around the training loop."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .checkpoint import Checkpoint
from .data import RawDataset, WindowSource, fit_standardizer, window_starts
from .exceptions import DataError, DimensionError
from .losses import LossConfig
from .model import ModelConfig, model_forward
from .optim import TauSchedule
from .trainer import TrainerConfig, score_windows, train


class DiPELinearForecaster(RegressorMixin, BaseEstimator):
    """Multi-step linear forecaster for multivariate series.

    ``fit`` takes a ``(n_timesteps, n_channels)`` array, standardises each
    channel on the leading ``1 - val_fraction`` of rows and keeps the epoch
    with the lowest MSE on the trailing rows. ``predict`` takes a history of
    at least ``lookback`` rows, or a stack of histories shaped
    ``(n_windows, lookback, n_channels)``, and returns forecasts in the
    original units.

    Parameters
    ----------
    lookback, horizon : int
        Input and forecast lengths in time steps.
    rank : int
        Number of weight sets shared across channels through the router.
    alpha : float
        Weight of the spectral loss term; ``1 - alpha`` goes to the MSE.
    use_sfa, use_sta : bool
        Switch the frequency / temporal attention stages off (identity).
    """

    def __init__(self, lookback=720, horizon=96, rank=1, alpha=0.5, lr=1e-3, epochs=50,
                 batch_size=64, tau_start=4.0, tau_end=1.0, tau_epochs=10, use_sfa=True,
                 use_sta=True, val_fraction=0.1, random_state=0):
        self.lookback = lookback
        self.horizon = horizon
        self.rank = rank
        self.alpha = alpha
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.tau_start = tau_start
        self.tau_end = tau_end
        self.tau_epochs = tau_epochs
        self.use_sfa = use_sfa
        self.use_sta = use_sta
        self.val_fraction = val_fraction
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n_rows, n_channels = X.shape
        cfg = ModelConfig(self.lookback, self.horizon, n_channels, self.rank,
                          use_sfa=self.use_sfa, use_sta=self.use_sta)
        n_train = int(round(n_rows * (1.0 - self.val_fraction)))
        dataset = RawDataset([f"x{i}" for i in range(n_channels)], X)
        train_starts = window_starts((0, n_train), cfg)
        val_starts = window_starts((n_train, n_rows), cfg)
        if len(train_starts) == 0 or len(val_starts) == 0:
            raise DataError(f"{n_rows} rows are too few for lookback={self.lookback}, "
                            f"horizon={self.horizon} and val_fraction={self.val_fraction}")
        standardizer = fit_standardizer(dataset, (0, n_train))
        trainer_cfg = TrainerConfig(self.epochs, self.batch_size, self.lr, self.random_state,
                                    TauSchedule(self.tau_start, self.tau_end, self.tau_epochs))
        source = WindowSource(dataset, standardizer, cfg)
        self.params_, self.report_ = train(source, train_starts, val_starts, cfg,
                                           LossConfig(self.alpha), trainer_cfg)
        self.config_ = cfg
        self.standardizer_ = standardizer
        self.n_features_in_ = n_channels
        return self

    def _histories(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = check_array(X, dtype=np.float64)
            if X.shape[0] < self.config_.lookback:
                raise DataError(f"need at least {self.config_.lookback} rows, got {X.shape[0]}")
            X = X[None, -self.config_.lookback:]
        elif X.ndim == 3:
            X = check_array(X, dtype=np.float64, allow_nd=True)
        else:
            raise DimensionError(f"expected a 2-d history or 3-d stack, got {X.ndim}-d")
        if X.shape[1:] != (self.config_.lookback, self.n_features_in_):
            raise DimensionError(f"history shape {X.shape[1:]} does not match "
                                 f"({self.config_.lookback}, {self.n_features_in_})")
        return X

    def predict(self, X):
        check_is_fitted(self, "params_")
        single = np.asarray(X).ndim == 2
        H = self._histories(X)
        scaled = self.standardizer_.transform(H).transpose(0, 2, 1)
        out = model_forward(scaled, self.params_, self.config_).transpose(0, 2, 1)
        out = self.standardizer_.inverse_transform(out)
        return out[0] if single else out

    def score(self, X, y=None):
        """Negative MSE over every complete window of ``X`` (standardised units)."""
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        ds = RawDataset([f"x{i}" for i in range(X.shape[1])], X)
        starts = window_starts((0, X.shape[0]), self.config_)
        mse, _ = score_windows(self.params_, self.config_,
                               WindowSource(ds, self.standardizer_, self.config_), starts)
        return -mse

    def to_checkpoint(self):
        check_is_fitted(self, "params_")
        return Checkpoint(self.config_, self.params_, self.standardizer_,
                          [f"x{i}" for i in range(self.n_features_in_)], self.alpha,
                          self.random_state, self.report_.best_epoch,
                          [vars(r) for r in self.report_.epochs])
