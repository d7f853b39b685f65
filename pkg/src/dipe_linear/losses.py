"""Composite training objective: weighted spectral MAE plus time-domain MSE."""

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .exceptions import DegenerateWeightsError, DimensionError, ParameterError
from .model import mixed_weights


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass
class LossBreakdown:
    l_freq: float
    l_time: float
    total: float
    freq_per_channel: np.ndarray = field(default=None, repr=False)
    time_per_channel: np.ndarray = field(default=None, repr=False)


def resample_freq_weights(theta_sfa, cfg):
    """Map input-spectrum gains onto the forecast spectrum by nearest bin.

    Forecast bin ``k`` sits at normalised frequency ``k / horizon``, which is
    input bin ``k * lookback / horizon``; the gain there is taken in absolute
    value so the resulting loss weights are nonnegative.
    """
    theta_sfa = np.asarray(theta_sfa, dtype=np.float64)
    k = np.arange(cfg.freq_out)
    src = np.minimum(np.rint(k * cfg.lookback / cfg.horizon).astype(int), cfg.freq_in - 1)
    return np.abs(theta_sfa[..., src])


def freq_loss_weights(params, cfg, routing=None):
    """``(channels, freq_out)`` weights from each channel's mixed SFA gains.

    The result is treated as a constant by the gradient code.
    """
    if params.theta_sfa is None:
        return np.ones((cfg.channels, cfg.freq_out))
    return resample_freq_weights(mixed_weights(params, cfg, routing).theta_sfa, cfg)


def _check_pair(y, y_hat):
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise DimensionError(f"target shape {y.shape} != prediction shape {y_hat.shape}")
    if y.ndim < 2:
        raise DimensionError("expected (channels, horizon) or (batch, channels, horizon) arrays")
    return y, y_hat


def sfa_loss_freq(y, y_hat, weights, per_channel=False):
    """Weighted MAE between the one-sided spectra of target and forecast.

    ``weights`` is ``(channels, freq_out)``; each channel's weighted sum is
    divided by that channel's weight total. The value is averaged over
    channels and (if present) the batch axis.
    """
    y, y_hat = _check_pair(y, y_hat)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (y.shape[-2], spectral.half_length(y.shape[-1])):
        raise DimensionError(f"weights shape {weights.shape} does not match targets {y.shape}")
    norms = weights.sum(axis=-1)
    if np.any(norms <= 0):
        bad = np.flatnonzero(norms <= 0).tolist()
        raise DegenerateWeightsError(f"all-zero frequency loss weights for channel(s) {bad}")
    err = np.abs(spectral.rfft(y) - spectral.rfft(y_hat))
    per = (err * weights).sum(axis=-1) / norms
    per = per.reshape(-1, per.shape[-1]).mean(axis=0)
    return (float(per.mean()), per) if per_channel else float(per.mean())


def mse_time(y, y_hat, per_channel=False):
    """Mean squared error over all channels and steps."""
    y, y_hat = _check_pair(y, y_hat)
    sq = (y_hat - y) ** 2
    per = sq.reshape(-1, *sq.shape[-2:]).mean(axis=(0, 2))
    return (float(sq.mean()), per) if per_channel else float(sq.mean())


def total_loss(l_freq, l_time, alpha, freq_per_channel=None, time_per_channel=None):
    """Combine the two terms as ``alpha * l_freq + (1 - alpha) * l_time``."""
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    total = alpha * l_freq + (1.0 - alpha) * l_time
    return LossBreakdown(l_freq, l_time, total, freq_per_channel, time_per_channel)


def compute_loss(y, y_hat, weights, loss_cfg):
    lf, lf_c = sfa_loss_freq(y, y_hat, weights, per_channel=True)
    lt, lt_c = mse_time(y, y_hat, per_channel=True)
    return total_loss(lf, lt, loss_cfg.alpha, lf_c, lt_c)
