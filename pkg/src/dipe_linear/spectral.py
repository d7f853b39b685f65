"""Real-input Fourier transforms and related helpers.

Conventions: the forward transform is unnormalised and the inverse carries the
``1/N`` factor, so ``irfft(rfft(x), len(x)) == x``. All arrays are float64 /
complex128 and transforms act on the last axis, which lets callers pass a
whole ``(batch, channel, time)`` block at once.
"""

import numpy as np

from .exceptions import DimensionError, SymmetryError

SYMMETRY_TOL = 1e-12


def half_length(n):
    """Number of bins in the one-sided spectrum of a length-``n`` signal."""
    return n // 2 + 1


def bin_multiplicity(n):
    """How many times each one-sided bin appears in the full spectrum.

    DC (and Nyquist, for even ``n``) appear once, every other bin twice.
    """
    w = np.full(half_length(n), 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


def _as_real(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        raise DimensionError("expected at least a 1-d signal, got a scalar")
    if x.shape[-1] < 1:
        raise DimensionError("empty signal")
    return x


def rfft(x, n=None):
    """One-sided DFT ``X[k] = sum_n x[n] exp(-2j*pi*k*n/N)`` for ``k <= N//2``.

    ``n`` zero-pads the signal before transforming (truncation is refused).
    """
    x = _as_real(x)
    if n is not None:
        if n < x.shape[-1]:
            raise DimensionError(f"transform length {n} shorter than signal length {x.shape[-1]}")
    return np.fft.rfft(x, n=n, axis=-1)


def irfft(spectrum, n, check_symmetry=True):
    """Inverse of :func:`rfft` for a length-``n`` real signal.

    Bins above ``n//2`` are taken as the conjugates of the given ones. With
    ``check_symmetry`` a non-real DC or Nyquist bin raises
    :class:`SymmetryError`; without it their imaginary parts are discarded,
    which is what the model does with its free complex parameters.
    """
    if n < 1:
        raise DimensionError(f"signal length must be positive, got {n}")
    X = np.asarray(spectrum, dtype=np.complex128)
    if X.ndim == 0 or X.shape[-1] != half_length(n):
        got = X.shape[-1] if X.ndim else 0
        raise DimensionError(f"spectrum has {got} bins, length {n} needs {half_length(n)}")
    if check_symmetry:
        edge = [0] + ([n // 2] if n % 2 == 0 else [])
        worst = np.max(np.abs(X[..., edge].imag)) if X.size else 0.0
        if worst > SYMMETRY_TOL:
            raise SymmetryError(f"DC/Nyquist bins must be real; max |imag| = {worst:.3e}")
    return np.fft.irfft(X, n=n, axis=-1)


def zero_pad(x, n):
    """Append zeros along the last axis up to length ``n``."""
    x = _as_real(x)
    length = x.shape[-1]
    if n < length:
        raise DimensionError(f"cannot pad length {length} down to {n}")
    out = np.zeros(x.shape[:-1] + (n,))
    out[..., :length] = x
    return out


def convolve_full(x, h):
    """Full linear convolution by direct summation (reference implementation)."""
    x = _as_real(x)
    h = _as_real(h)
    if x.ndim != 1 or h.ndim != 1:
        raise DimensionError("convolve_full works on 1-d signals")
    out = np.zeros(len(x) + len(h) - 1)
    for i, xi in enumerate(x):
        for j, hj in enumerate(h):
            out[i + j] += xi * hj
    return out
