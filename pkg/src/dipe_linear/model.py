"""Parameter containers and the forward pass.

Each channel of a ``(batch, channel, lookback)`` input goes through three
stages whose weights are mixed per channel from a small bank of weight sets:

* frequency attention: a real gain per rFFT bin of the look-back window,
* temporal attention: a real gain per look-back time step,
* frequency mapping: a complex affine map per bin of the zero-padded window,
  whose inverse transform's tail is the forecast.

Weight sets are stored stacked, e.g. ``theta_ifm`` has shape ``(K, F_pad)``
where ``K`` is ``rank`` for routed components, 1 for a component shared by
every channel and ``channels`` for a fully independent one.
"""

from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import spectral
from .exceptions import DataError, DimensionError, ParameterError

COMPONENTS = ("sfa", "sta", "ifm")
SHARING_MODES = ("lowrank", "shared", "full")
INIT_STD = 0.02


def _check_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions and structural switches of a model.

    Derived lengths are properties so they can never disagree with the
    primary ones.
    """

    lookback: int
    horizon: int
    channels: int = 1
    rank: int = 1
    use_sfa: bool = True
    use_sta: bool = True
    sfa_sharing: str = "lowrank"
    sta_sharing: str = "lowrank"
    ifm_sharing: str = "lowrank"

    def __post_init__(self):
        _check_int("lookback", self.lookback, 2)
        _check_int("horizon", self.horizon, 1)
        _check_int("channels", self.channels, 1)
        _check_int("rank", self.rank, 1)
        if self.rank > self.channels:
            raise ParameterError(f"rank ({self.rank}) cannot exceed channels ({self.channels})")
        for comp in COMPONENTS:
            mode = getattr(self, f"{comp}_sharing")
            if mode not in SHARING_MODES:
                raise ParameterError(f"{comp}_sharing must be one of {SHARING_MODES}, got {mode!r}")

    @property
    def pad_length(self):
        return self.lookback + self.horizon - 1

    @property
    def freq_in(self):
        return spectral.half_length(self.lookback)

    @property
    def freq_pad(self):
        return spectral.half_length(self.pad_length)

    @property
    def freq_out(self):
        return spectral.half_length(self.horizon)

    def enabled(self, component):
        return {"sfa": self.use_sfa, "sta": self.use_sta, "ifm": True}[component]

    def n_sets(self, component):
        """Number of stored weight sets for ``component``."""
        mode = getattr(self, f"{component}_sharing")
        if mode == "shared":
            return 1
        if mode == "full":
            return self.channels
        return self.rank

    def routed(self, component):
        return (
            self.enabled(component)
            and getattr(self, f"{component}_sharing") == "lowrank"
            and self.rank > 1
        )

    @property
    def has_router(self):
        return any(self.routed(c) for c in COMPONENTS)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class Router:
    """Static routing logits ``(rank, channels)`` and the softmax temperature."""

    logits: np.ndarray
    temperature: float = 1.0


def router_normalize(router):
    """Column-wise softmax of ``logits / temperature`` over the expert axis."""
    if not router.temperature > 0:
        raise ParameterError(f"temperature must be positive, got {router.temperature}")
    z = np.asarray(router.logits, dtype=np.float64) / router.temperature
    z = z - z.max(axis=0, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=0, keepdims=True)


@dataclass
class ChannelWeights:
    """One weight set for each stage.

    Used both for a stored expert and for the weights actually applied to a
    channel. Fields may be 1-d (one set) or 2-d with a leading channel axis;
    ``None`` marks a disabled stage, which then acts as the identity.
    """

    theta_sfa: Optional[np.ndarray]
    theta_sta: Optional[np.ndarray]
    theta_ifm: np.ndarray
    beta_ifm: np.ndarray


# The names are interchangeable; both are kept for readability at call sites.
ExpertWeights = ChannelWeights
EffectiveChannelWeights = ChannelWeights


@dataclass
class ModelParams:
    theta_sfa: Optional[np.ndarray]
    theta_sta: Optional[np.ndarray]
    theta_ifm: np.ndarray
    beta_ifm: np.ndarray
    router: Optional[Router] = None

    def arrays(self):
        """Trainable arrays by name (views, not copies)."""
        out = {}
        for name in ("theta_sfa", "theta_sta", "theta_ifm", "beta_ifm"):
            arr = getattr(self, name)
            if arr is not None:
                out[name] = arr
        if self.router is not None:
            out["router_logits"] = self.router.logits
        return out

    def copy(self):
        def cp(a):
            return None if a is None else a.copy()

        router = None
        if self.router is not None:
            router = Router(self.router.logits.copy(), self.router.temperature)
        return ModelParams(cp(self.theta_sfa), cp(self.theta_sta), cp(self.theta_ifm),
                           cp(self.beta_ifm), router)

    def n_scalars(self):
        """Stored real degrees of freedom, complex entries counted twice."""
        return int(sum(a.size * (2 if np.iscomplexobj(a) else 1) for a in self.arrays().values()))

    def expert(self, m):
        """Weight set ``m`` of every enabled stage."""

        def pick(a):
            if a is None:
                return None
            if not 0 <= m < a.shape[0]:
                raise DimensionError(f"weight set {m} out of range for {a.shape[0]} sets")
            return a[m]

        return ChannelWeights(pick(self.theta_sfa), pick(self.theta_sta),
                              pick(self.theta_ifm), pick(self.beta_ifm))


@dataclass
class Gradients:
    """Gradients congruent with :class:`ModelParams`.

    Complex entries hold ``dL/dRe + 1j * dL/dIm``.
    """

    theta_sfa: Optional[np.ndarray] = None
    theta_sta: Optional[np.ndarray] = None
    theta_ifm: Optional[np.ndarray] = None
    beta_ifm: Optional[np.ndarray] = None
    router_logits: Optional[np.ndarray] = field(default=None)

    def arrays(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


def init_params(cfg, seed=0):
    """Identity pre-processing, small random frequency map, uniform routing."""
    rng = np.random.default_rng(seed)

    def cnormal(shape):
        return rng.normal(0.0, INIT_STD, shape) + 1j * rng.normal(0.0, INIT_STD, shape)

    k_ifm = cfg.n_sets("ifm")
    theta_ifm = cnormal((k_ifm, cfg.freq_pad))
    beta_ifm = cnormal((k_ifm, cfg.freq_pad))
    theta_sfa = np.ones((cfg.n_sets("sfa"), cfg.freq_in)) if cfg.use_sfa else None
    theta_sta = np.ones((cfg.n_sets("sta"), cfg.lookback)) if cfg.use_sta else None
    router = Router(np.zeros((cfg.rank, cfg.channels))) if cfg.has_router else None
    return ModelParams(theta_sfa, theta_sta, theta_ifm, beta_ifm, router)


def param_count(cfg):
    """Trainable scalars implied by ``cfg`` (complex parameters count double)."""
    total = cfg.n_sets("ifm") * 4 * cfg.freq_pad
    if cfg.use_sfa:
        total += cfg.n_sets("sfa") * cfg.freq_in
    if cfg.use_sta:
        total += cfg.n_sets("sta") * cfg.lookback
    if cfg.has_router:
        total += cfg.rank * cfg.channels
    return total


def mixing_matrix(params, cfg, component, routing=None):
    """``(n_sets, channels)`` coefficients combining weight sets per channel."""
    mode = getattr(cfg, f"{component}_sharing")
    if mode == "full":
        return np.eye(cfg.channels)
    if cfg.routed(component):
        return router_normalize(params.router) if routing is None else routing
    return np.ones((1, cfg.channels))


def _mix(stack, coeffs):
    if stack is None:
        return None
    if stack.shape[0] == 1 and np.all(coeffs == 1.0):
        return np.repeat(stack, coeffs.shape[1], axis=0)
    return coeffs.T @ stack


def mixed_weights(params, cfg, routing=None):
    """Per-channel weights, each field stacked to ``(channels, length)``."""
    if cfg.has_router and routing is None:
        routing = router_normalize(params.router)
    mats = {c: mixing_matrix(params, cfg, c, routing) for c in COMPONENTS}
    return ChannelWeights(
        _mix(params.theta_sfa, mats["sfa"]),
        _mix(params.theta_sta, mats["sta"]),
        _mix(params.theta_ifm, mats["ifm"]),
        _mix(params.beta_ifm, mats["ifm"]),
    )


def mix_weights(params, routing, c, cfg):
    """Weights applied to channel ``c`` given normalised routing ``(M, C)``."""
    if not 0 <= c < cfg.channels:
        raise DimensionError(f"channel index {c} out of range [0, {cfg.channels})")

    def one(stack, component):
        if stack is None:
            return None
        coeffs = mixing_matrix(params, cfg, component, routing)[:, c]
        out = np.zeros(stack.shape[1], dtype=stack.dtype)
        for m in range(stack.shape[0]):
            out = out + coeffs[m] * stack[m]
        return out

    return ChannelWeights(one(params.theta_sfa, "sfa"), one(params.theta_sta, "sta"),
                          one(params.theta_ifm, "ifm"), one(params.beta_ifm, "ifm"))


def _check_last(name, arr, expected):
    if arr.shape[-1] != expected:
        raise DimensionError(f"{name} has length {arr.shape[-1]}, expected {expected}")


def sfa_forward(x, w):
    """Zero-phase filtering: ``irfft(theta_sfa * rfft(x))``."""
    x = np.asarray(x, dtype=np.float64)
    if w.theta_sfa is None:
        return x.copy()
    n = x.shape[-1]
    _check_last("theta_sfa", w.theta_sfa, spectral.half_length(n))
    return spectral.irfft(w.theta_sfa * spectral.rfft(x), n)


def sta_forward(z, w):
    """Per-time-step gain."""
    z = np.asarray(z, dtype=np.float64)
    if w.theta_sta is None:
        return z.copy()
    _check_last("theta_sta", w.theta_sta, z.shape[-1])
    return w.theta_sta * z


def ifm_forward(z, w, cfg):
    """Complex affine map per bin of the padded window; returns the last ``horizon`` samples."""
    z = np.asarray(z, dtype=np.float64)
    _check_last("input", z, cfg.lookback)
    _check_last("theta_ifm", w.theta_ifm, cfg.freq_pad)
    _check_last("beta_ifm", w.beta_ifm, cfg.freq_pad)
    Z = spectral.rfft(z, n=cfg.pad_length)
    full = spectral.irfft(w.theta_ifm * Z + w.beta_ifm, cfg.pad_length, check_symmetry=False)
    return full[..., -cfg.horizon:]


def check_input(x, cfg):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (2, 3) or x.shape[-2:] != (cfg.channels, cfg.lookback):
        raise DimensionError(
            f"input shape {x.shape} does not match (channels={cfg.channels}, lookback={cfg.lookback})"
        )
    if not np.all(np.isfinite(x)):
        raise DataError("input contains non-finite values")
    return x


def model_forward(x, params, cfg):
    """Forecast ``(..., channels, horizon)`` from ``(..., channels, lookback)``."""
    x = check_input(x, cfg)
    w = mixed_weights(params, cfg)
    return ifm_forward(sta_forward(sfa_forward(x, w), w), w, cfg)
