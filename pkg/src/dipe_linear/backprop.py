"""Hand-derived reverse-mode gradients of the training loss.

Complex parameters are treated as pairs of real coordinates; their gradient
is reported as ``dL/dRe + 1j * dL/dIm``. With that convention the adjoints of
the transforms used in the forward pass are

* ``y = irfft(Y, N)``  ->  ``gY = multiplicity / N * rfft(gy)``
* ``Y = rfft(y, N)``   ->  ``gy = N * irfft(gY / multiplicity, N)``

where ``multiplicity`` counts how often each one-sided bin appears in the
full spectrum (1 for DC and Nyquist, 2 otherwise).
"""

import numpy as np

from . import spectral
from .exceptions import DimensionError, NumericError
from .losses import compute_loss, freq_loss_weights
from .model import Gradients, check_input, mixed_weights, mixing_matrix, router_normalize


def _finite(stage, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError(f"non-finite values in stage '{stage}'")


def rfft_adjoint(g, n):
    """Pull a gradient on ``rfft(y, n)`` back to the (padded) signal ``y``."""
    return n * spectral.irfft(g / spectral.bin_multiplicity(n), n, check_symmetry=False)


def backward(x, y, params, cfg, loss_cfg, loss_weights=None):
    """Loss and exact gradients for one batch.

    ``x`` is ``(batch, channels, lookback)`` and ``y`` the matching
    ``(batch, channels, horizon)`` targets (2-d inputs are treated as a batch
    of one). ``loss_weights`` overrides the spectral loss weights; by default
    they come from the current SFA gains and receive no gradient.
    """
    x = check_input(x, cfg)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 2:
        x, y = x[None], y[None]
    if y.shape != x.shape[:-1] + (cfg.horizon,):
        raise DimensionError(f"target shape {y.shape} does not match input {x.shape}")

    L, H, N = cfg.lookback, cfg.horizon, cfg.pad_length
    B, C = x.shape[0], cfg.channels
    routing = router_normalize(params.router) if cfg.has_router else None
    w = mixed_weights(params, cfg, routing)
    if loss_weights is None:
        loss_weights = freq_loss_weights(params, cfg, routing)

    # forward, keeping what the adjoints need
    X = spectral.rfft(x)
    z1 = spectral.irfft(w.theta_sfa * X, L) if w.theta_sfa is not None else x
    _finite("sfa", z1)
    z2 = w.theta_sta * z1 if w.theta_sta is not None else z1
    _finite("sta", z2)
    Z = spectral.rfft(z2, n=N)
    y_hat = spectral.irfft(w.theta_ifm * Z + w.beta_ifm, N, check_symmetry=False)[..., -H:]
    _finite("ifm", y_hat)

    alpha = loss_cfg.alpha
    loss = compute_loss(y, y_hat, loss_weights, loss_cfg)
    _finite("loss", loss.total)

    g_out = (1.0 - alpha) * 2.0 * (y_hat - y) / (B * C * H)
    if alpha > 0.0:
        D = spectral.rfft(y_hat) - spectral.rfft(y)
        mag = np.abs(D)
        unit = np.divide(D, mag, out=np.zeros_like(D), where=mag > 0)
        coef = loss_weights / loss_weights.sum(axis=-1, keepdims=True) / (B * C)
        g_out = g_out + rfft_adjoint(alpha * coef * unit, H)

    g_full = np.zeros(x.shape[:-1] + (N,))
    g_full[..., -H:] = g_out
    GF = spectral.rfft(g_full)
    gY = spectral.bin_multiplicity(N) / N * GF
    eff = {
        "theta_ifm": (gY * np.conj(Z)).sum(axis=0),
        "beta_ifm": gY.sum(axis=0),
    }
    dz = spectral.irfft(np.conj(w.theta_ifm) * GF, N, check_symmetry=False)[..., :L]
    if w.theta_sta is not None:
        eff["theta_sta"] = (dz * z1).sum(axis=0)
        dz = dz * w.theta_sta
    if w.theta_sfa is not None:
        gU = spectral.bin_multiplicity(L) / L * spectral.rfft(dz)
        eff["theta_sfa"] = (gU * np.conj(X)).real.sum(axis=0)

    grads = Gradients()
    g_routing = np.zeros((cfg.rank, C)) if cfg.has_router else None
    owner = {"theta_sfa": "sfa", "theta_sta": "sta", "theta_ifm": "ifm", "beta_ifm": "ifm"}
    for name, g_eff in eff.items():
        comp = owner[name]
        stack = getattr(params, name)
        A = mixing_matrix(params, cfg, comp, routing)
        setattr(grads, name, A @ g_eff)
        if cfg.routed(comp):
            g_routing += np.real(np.conj(stack) @ g_eff.T)

    if cfg.has_router:
        tau = params.router.temperature
        centred = g_routing - (routing * g_routing).sum(axis=0, keepdims=True)
        grads.router_logits = routing * centred / tau

    for name, g in grads.arrays().items():
        _finite(f"gradient of {name}", g)
    return loss, grads
