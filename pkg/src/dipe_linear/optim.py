"""Adam with bias correction, and the linear softmax-temperature schedule."""

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericError, ParameterError


def _real_view(a):
    # complex parameters are optimised as independent (re, im) coordinates
    return a.view(np.float64) if np.iscomplexobj(a) else a


class Adam:
    """Adam optimiser over a dict of named arrays, updated in place.

    The moment estimates ``m``/``v`` and step counter ``t`` are the optimiser
    state; they are created lazily on the first step.
    """

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        if not lr > 0:
            raise ParameterError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads):
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient for '{name}'")
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name in sorted(params):
            p = _real_view(params[name])
            g = _real_view(np.ascontiguousarray(grads[name]))
            if p.shape != g.shape:
                raise ParameterError(f"gradient shape {g.shape} != parameter shape {p.shape} for '{name}'")
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def state_dict(self):
        return {"t": self.t, "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}


@dataclass(frozen=True)
class TauSchedule:
    """Linear interpolation from ``tau_start`` to ``tau_end``, then constant."""

    tau_start: float = 4.0
    tau_end: float = 1.0
    anneal_epochs: int = 10

    def __post_init__(self):
        if not (self.tau_start > 0 and self.tau_end > 0):
            raise ParameterError("temperatures must be positive")
        if self.anneal_epochs < 1:
            raise ParameterError(f"anneal_epochs must be >= 1, got {self.anneal_epochs}")

    def __call__(self, epoch):
        return anneal_tau(self, epoch)


def anneal_tau(schedule, epoch):
    if epoch < 0:
        raise ParameterError(f"epoch must be >= 0, got {epoch}")
    if epoch >= schedule.anneal_epochs:
        return float(schedule.tau_end)
    frac = epoch / schedule.anneal_epochs
    return float(schedule.tau_start + (schedule.tau_end - schedule.tau_start) * frac)
