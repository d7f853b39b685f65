"""Weight exports and router similarity.

Everything here is a read-only consumer of trained parameters: CSV dumps of
each stage's gains, the time-domain kernel equivalent to the frequency map,
and Jensen-Shannon distances between channels' routing distributions.
"""

import csv
import math
import os

import numpy as np

from . import spectral
from .checkpoint import format_float
from .exceptions import ParameterError, UnsupportedConfigError
from .model import router_normalize

PROB_TOL = 1e-9
Q_FLOOR = 1e-12
JSD_MAX = math.sqrt(math.log(2.0))


def _check_prob(name, p):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError(f"{name} must be a non-empty 1-d probability vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ParameterError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ParameterError(f"{name} sums to {p.sum()!r}, not 1")
    return p


def kl_divergence(p, q):
    """``sum_i p_i * ln(p_i / q_i)`` (natural log, ``0 * ln 0 = 0``)."""
    p = _check_prob("p", p)
    q = _check_prob("q", q)
    if p.shape != q.shape:
        raise ParameterError(f"length mismatch: {p.size} vs {q.size}")
    mask = p > 0
    qm = np.maximum(q[mask], Q_FLOOR)
    return max(0.0, float(np.sum(p[mask] * np.log(p[mask] / qm))))


def jsd(p, q):
    """Jensen-Shannon distance: square root of the mean KL to the midpoint."""
    p = _check_prob("p", p)
    q = _check_prob("q", q)
    mid = 0.5 * (p + q)
    return math.sqrt(max(0.0, 0.5 * kl_divergence(p, mid) + 0.5 * kl_divergence(q, mid)))


def jsd_matrix(params, cfg):
    """``(channels, channels)`` distances between normalised router columns."""
    if not cfg.has_router or params.router is None:
        raise UnsupportedConfigError("model has no router (rank 1 or no low-rank component); "
                                     "JSD matrix needs rank > 1")
    routing = router_normalize(params.router)
    # renormalise in float64 to absorb rounding before the probability check
    routing = routing / routing.sum(axis=0, keepdims=True)
    C = routing.shape[1]
    out = np.zeros((C, C))
    for i in range(C):
        for j in range(i + 1, C):
            out[i, j] = out[j, i] = jsd(routing[:, i], routing[:, j])
    return out


def equivalent_kernel(theta_ifm, cfg):
    """Time-domain kernel of length ``pad_length`` realising the frequency map.

    Circularly convolving the zero-padded input with this kernel gives the
    frequency map's output without its bias. Imaginary parts at DC/Nyquist
    have no effect and are dropped.
    """
    return spectral.irfft(np.asarray(theta_ifm), cfg.pad_length, check_symmetry=False)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int, np.integer)) else format_float(float(v)) for v in row])


def export_weights(checkpoint, out_dir):
    """Write plot-ready CSVs for every stored weight set; return their paths.

    One file per stage and weight set (``sfa_expert{m}.csv``,
    ``sta_expert{m}.csv``, ``ifm_expert{m}.csv``), plus ``router.csv`` and
    ``jsd.csv`` when the model routes.
    """
    os.makedirs(out_dir, exist_ok=True)
    p, cfg = checkpoint.params, checkpoint.config
    written = []

    def emit(name, header, rows):
        path = os.path.join(out_dir, name)
        _write_csv(path, header, rows)
        written.append(path)

    if p.theta_sfa is not None:
        for m, gains in enumerate(p.theta_sfa):
            emit(f"sfa_expert{m}.csv", ["bin", "gain"], zip(range(len(gains)), gains))
    if p.theta_sta is not None:
        for m, gains in enumerate(p.theta_sta):
            emit(f"sta_expert{m}.csv", ["time", "gain"], zip(range(len(gains)), gains))
    for m, (theta, beta) in enumerate(zip(p.theta_ifm, p.beta_ifm)):
        cols = (theta.real, theta.imag, np.abs(theta), np.angle(theta),
                beta.real, beta.imag, np.abs(beta), np.angle(beta))
        rows = ([k] + [c[k] for c in cols] for k in range(len(theta)))
        emit(f"ifm_expert{m}.csv",
             ["bin", "re", "im", "magnitude", "phase", "bias_re", "bias_im", "bias_magnitude", "bias_phase"],
             rows)
    if cfg.has_router:
        routing = router_normalize(p.router)
        names = list(checkpoint.channel_names)
        emit("router.csv", ["expert"] + names, ([m] + list(row) for m, row in enumerate(routing)))
        dist = jsd_matrix(p, cfg)
        emit("jsd.csv", ["channel"] + names, ([names[i]] + list(row) for i, row in enumerate(dist)))
    return written


def read_export(path):
    """Load an exported CSV back as ``(header, float array)``; non-numeric cells become NaN."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))

    def num(s):
        try:
            return float(s)
        except ValueError:
            return math.nan

    return rows[0], np.array([[num(c) for c in r] for r in rows[1:]])
