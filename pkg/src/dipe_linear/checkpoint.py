"""JSON checkpoint: config, parameters, standardisation stats and provenance.

Floats are written with 17 significant digits so every float64 survives the
round trip exactly. Complex arrays are nested ``[re, im]`` pairs, row-major.
"""

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .data import SplitSpec, Standardizer
from .exceptions import DataError
from .model import ModelConfig, ModelParams, Router

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    params: ModelParams
    standardizer: Standardizer
    channel_names: List[str]
    alpha: float = 0.5
    seed: int = 0
    best_epoch: int = 0
    history: List[dict] = field(default_factory=list)
    split: Optional[SplitSpec] = None
    borrow: bool = True
    trainer: dict = field(default_factory=dict)

    def to_dict(self):
        p = self.params
        return {
            "format_version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "params": {
                "theta_sfa": _encode(p.theta_sfa),
                "theta_sta": _encode(p.theta_sta),
                "theta_ifm": _encode(p.theta_ifm),
                "beta_ifm": _encode(p.beta_ifm),
                "router_logits": _encode(None if p.router is None else p.router.logits),
                "temperature": None if p.router is None else float(p.router.temperature),
            },
            "standardizer": {"mean": _encode(self.standardizer.mean), "std": _encode(self.standardizer.std)},
            "channel_names": list(self.channel_names),
            "alpha": float(self.alpha),
            "seed": int(self.seed),
            "best_epoch": int(self.best_epoch),
            "history": self.history,
            "split": None if self.split is None else {
                "train_fraction": self.split.train_fraction,
                "val_fraction": self.split.val_fraction,
                "test_fraction": self.split.test_fraction,
                "rows": None if self.split.rows is None else list(self.split.rows),
            },
            "borrow": bool(self.borrow),
            "trainer": self.trainer,
        }

    @classmethod
    def from_dict(cls, d):
        cfg = ModelConfig.from_dict(d["config"])
        pd = d["params"]
        router = None
        if pd.get("router_logits") is not None:
            router = Router(_decode(pd["router_logits"], complex_=False), float(pd["temperature"]))
        params = ModelParams(
            _decode(pd.get("theta_sfa"), complex_=False),
            _decode(pd.get("theta_sta"), complex_=False),
            _decode(pd["theta_ifm"], complex_=True),
            _decode(pd["beta_ifm"], complex_=True),
            router,
        )
        std = Standardizer(_decode(d["standardizer"]["mean"], False), _decode(d["standardizer"]["std"], False))
        split = None
        if d.get("split") is not None:
            s = d["split"]
            split = SplitSpec(s["train_fraction"], s["val_fraction"], s["test_fraction"],
                              None if s.get("rows") is None else tuple(s["rows"]))
        return cls(cfg, params, std, d["channel_names"], d.get("alpha", 0.5), d.get("seed", 0),
                   d.get("best_epoch", 0), d.get("history", []), split, d.get("borrow", True),
                   d.get("trainer", {}))

    def dumps(self):
        return dumps(self.to_dict())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read checkpoint {path}: {exc}") from None
        return cls.from_dict(d)


def _encode(a):
    if a is None:
        return None
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return a.tolist()


def _decode(v, complex_):
    if v is None:
        return None
    a = np.array(v, dtype=np.float64)
    if complex_:
        a = np.ascontiguousarray(a[..., 0] + 1j * a[..., 1])
    return a


def format_float(x):
    """Shortest-safe decimal: 17 significant digits, always parsed back as float."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".eEn"):
        s += ".0"
    return s


def dumps(obj, indent=1):
    """``json.dumps`` with floats at 17 significant digits."""
    return _dump(obj, 0, indent) + "\n"


def _dump(obj, level, indent):
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        # numeric rows stay on one line to keep files compact
        if all(not isinstance(v, (list, tuple, dict)) for v in obj):
            return "[" + ", ".join(_dump(v, level + 1, indent) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, level + 1, indent) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
