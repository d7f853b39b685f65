"""CSV ingestion, chronological splits, standardisation and sliding windows.

Splits partition the *target* rows. A window starting at row ``s`` reads
inputs ``[s, s + lookback)`` and targets ``[s + lookback, s + lookback +
horizon)``; validation and test windows may borrow their look-back from the
preceding split (the usual benchmark protocol) unless ``borrow=False``.
"""

import csv
import math
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DataError, DimensionError, IngestionError, ParameterError


@dataclass
class RawDataset:
    names: List[str]
    values: np.ndarray  # (T, C)
    timestamps: Optional[List[str]] = None

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_channels(self):
        return self.values.shape[1]


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path):
    """Read a header-first, comma-separated file of decimal numbers.

    A leading column is kept as opaque timestamps when its header is ``date``
    or its first data cell is not a number.
    """
    if not os.path.isfile(path):
        raise IngestionError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise IngestionError(f"{path}: header but no data rows")

    has_date = header[0].lower() == "date" or not _is_float(body[0][0])
    first = 1 if has_date else 0
    names = header[first:]
    if not names:
        raise IngestionError(f"{path}: no numeric columns")

    values = np.empty((len(body), len(names)))
    stamps = [] if has_date else None
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != len(header):
            raise IngestionError(f"{path}: row {line} has {len(row)} cells, header has {len(header)}")
        if has_date:
            stamps.append(row[0])
        for j, cell in enumerate(row[first:]):
            try:
                v = float(cell)
            except ValueError:
                raise IngestionError(
                    f"{path}: row {line}, column '{names[j]}': cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise IngestionError(f"{path}: row {line}, column '{names[j]}': non-finite value")
            values[i, j] = v
    return RawDataset(names, values, stamps)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split by fractions, or by explicit row counts."""

    train_fraction: float = 0.7
    val_fraction: float = 0.1
    test_fraction: float = 0.2
    rows: Optional[Tuple[int, int, int]] = None

    def __post_init__(self):
        if self.rows is not None:
            if len(self.rows) != 3 or any(int(r) <= 0 for r in self.rows):
                raise ParameterError(f"split rows must be three positive integers, got {self.rows}")
            return
        fr = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(f <= 0 for f in fr):
            raise ParameterError(f"split fractions must be positive, got {fr}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ParameterError(f"split fractions must sum to 1, got {sum(fr)}")

    def boundaries(self, n_rows):
        """End rows ``(train_end, val_end, test_end)``."""
        if self.rows is not None:
            a, b, c = (int(r) for r in self.rows)
            if a + b + c > n_rows:
                raise DataError(f"split rows {self.rows} exceed the {n_rows} available rows")
            return a, a + b, a + b + c
        n_train = math.floor(n_rows * self.train_fraction + 1e-9)
        n_test = math.floor(n_rows * self.test_fraction + 1e-9)
        return n_train, n_rows - n_test, n_rows


def default_split(path):
    """0.6/0.2/0.2 for the ETT family, 0.7/0.1/0.2 otherwise."""
    if os.path.basename(str(path)).upper().startswith("ETT"):
        return SplitSpec(0.6, 0.2, 0.2)
    return SplitSpec(0.7, 0.1, 0.2)


@dataclass(frozen=True)
class SplitRanges:
    train: Tuple[int, int]
    val: Tuple[int, int]
    test: Tuple[int, int]
    borrow: bool = True

    def __getitem__(self, name):
        return getattr(self, name)


def window_starts(target_range, cfg, borrow=True):
    """Start rows of every window whose targets lie inside ``target_range``."""
    a, b = target_range
    lo = max(0, a - cfg.lookback) if borrow else a
    hi = b - cfg.lookback - cfg.horizon
    return np.arange(lo, hi + 1) if hi >= lo else np.arange(0)


def split(dataset, spec, cfg, borrow=True):
    n = dataset.n_rows
    if n < cfg.lookback + cfg.horizon:
        raise DataError(f"{n} rows cannot hold one window of {cfg.lookback}+{cfg.horizon}")
    t1, t2, t3 = spec.boundaries(n)
    ranges = SplitRanges((0, t1), (t1, t2), (t2, t3), borrow)
    for name in ("train", "val", "test"):
        if len(window_starts(ranges[name], cfg, borrow)) == 0:
            raise DataError(f"{name} split {ranges[name]} yields no complete window")
    return ranges


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, values):
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std

    def inverse_transform(self, values):
        return np.asarray(values, dtype=np.float64) * self.std + self.mean


def fit_standardizer(dataset, train_range):
    a, b = train_range
    rows = dataset.values[a:b]
    if rows.shape[0] == 0:
        raise DataError("empty training range")
    mean = rows.mean(axis=0)
    std = np.sqrt(((rows - mean) ** 2).mean(axis=0))
    for c in np.flatnonzero(std == 0):
        raise DataError(f"channel '{dataset.names[c]}' is constant on the training rows")
    return Standardizer(mean, std)


@dataclass
class WindowBatch:
    inputs: np.ndarray   # (B, C, lookback)
    targets: np.ndarray  # (B, C, horizon)
    starts: np.ndarray


class WindowSource:
    """Standardised series with cheap window gathering."""

    def __init__(self, dataset, standardizer, cfg):
        if dataset.n_channels != cfg.channels:
            raise DimensionError(f"data has {dataset.n_channels} channels, model expects {cfg.channels}")
        self.cfg = cfg
        scaled = standardizer.transform(dataset.values)
        # (n_windows, C, lookback + horizon)
        self._views = sliding_window_view(scaled, cfg.lookback + cfg.horizon, axis=0)

    def gather(self, starts):
        block = self._views[np.asarray(starts)]
        L = self.cfg.lookback
        return WindowBatch(np.ascontiguousarray(block[..., :L]),
                           np.ascontiguousarray(block[..., L:]), np.asarray(starts))

    def batches(self, starts, batch_size, shuffle=False, seed=0):
        if batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {batch_size}")
        order = np.random.default_rng(seed).permutation(starts) if shuffle else np.asarray(starts)
        for i in range(0, len(order), batch_size):
            yield self.gather(order[i:i + batch_size])


def windows(dataset, target_range, standardizer, cfg, batch_size, shuffle=False, seed=0, borrow=True):
    """Iterate over every admissible window of ``target_range`` once."""
    starts = window_starts(target_range, cfg, borrow)
    if len(starts) == 0:
        raise DataError(f"range {target_range} yields no complete window")
    return WindowSource(dataset, standardizer, cfg).batches(starts, batch_size, shuffle, seed)
