"""Fixtures shared by several test modules."""

import numpy as np


def write_csv(path, values, names=None, date=True):
    values = np.asarray(values, dtype=np.float64)
    names = names or [f"c{i}" for i in range(values.shape[1])]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join((["date"] if date else []) + names) + "\n")
        for i, row in enumerate(values):
            cells = [repr(float(v)) for v in row]
            fh.write(",".join(([f"2020-01-01 {i}"] if date else []) + cells) + "\n")
    return str(path)


def sine_series(n_rows, period=24, channels=1, phase_step=0.7):
    t = np.arange(n_rows)
    return np.stack([np.sin(2 * np.pi * t / period + c * phase_step) for c in range(channels)], axis=1)
