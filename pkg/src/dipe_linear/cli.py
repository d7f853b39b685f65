"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

import argparse
import csv
import logging
import sys

import numpy as np

from . import interpret
from .checkpoint import Checkpoint, format_float
from .data import SplitSpec, default_split, load_csv
from .exceptions import ConfigError, DataError, DimensionError, NumericError, ParameterError, UnsupportedConfigError
from .losses import LossConfig
from .model import SHARING_MODES, ModelConfig, model_forward
from .optim import TauSchedule
from .trainer import TrainerConfig, evaluate, fit, search_alpha

PROG = "dipe-linear"
EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class _Stage:
    """Remembers which step is running so error messages can name it."""

    def __init__(self):
        self.name = "parse"

    def __call__(self, name):
        self.name = name


def _floats(text, n=None, name="value"):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"--{name}: cannot parse {text!r} as comma-separated numbers") from None
    if n is not None and len(vals) != n:
        raise ParameterError(f"--{name}: expected {n} values, got {len(vals)}")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog=PROG, description="Linear long-horizon forecaster with disentangled weights.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True, ckpt_required=True):
        if data:
            sp.add_argument("--data", required=True, help="CSV file, header row first")
        sp.add_argument("--checkpoint", required=ckpt_required, help="checkpoint JSON path")
        sp.add_argument("-v", "--verbose", action="store_true")

    t = sub.add_parser("train", help="train a model and write a checkpoint")
    common(t)
    t.add_argument("--input-len", type=int, default=720)
    t.add_argument("--horizon", type=int, default=96)
    t.add_argument("--rank", type=int, default=1)
    t.add_argument("--alpha", type=float, default=0.5)
    t.add_argument("--alpha-grid", default=None,
                   help="comma-separated alphas; keeps the run with the best validation MSE")
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--batch-size", type=int, default=64)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--split", default=None, help="train,val,test fractions (default by file name)")
    t.add_argument("--split-rows", default=None, help="train,val,test row counts")
    t.add_argument("--no-borrow", action="store_true",
                   help="do not let val/test windows read look-back rows from the previous split")
    t.add_argument("--tau-start", type=float, default=4.0)
    t.add_argument("--tau-end", type=float, default=1.0)
    t.add_argument("--tau-epochs", type=int, default=10)
    t.add_argument("--disable-sfa", action="store_true")
    t.add_argument("--disable-sta", action="store_true")
    for comp in ("sfa", "sta", "ifm"):
        t.add_argument(f"--{comp}-sharing", choices=SHARING_MODES, default="lowrank")

    e = sub.add_parser("evaluate", help="score a checkpoint on one split")
    common(e)
    e.add_argument("--split-name", choices=("train", "val", "test"), default="test")

    pr = sub.add_parser("predict", help="forecast from the last rows of a CSV")
    common(pr)
    pr.add_argument("--output", required=True, help="forecast CSV path")

    x = sub.add_parser("export-weights", help="write per-stage weight CSVs")
    common(x, data=False)
    x.add_argument("--output", required=True, help="output directory")

    j = sub.add_parser("jsd", help="write the channel-by-channel router distance matrix")
    common(j, data=False)
    j.add_argument("--output", required=True, help="output CSV path")
    return p


def _train_configs(args):
    """Validate every flag before touching data."""
    if args.split is not None and args.split_rows is not None:
        raise ParameterError("--split and --split-rows are mutually exclusive")
    split_spec = None
    if args.split_rows is not None:
        rows = _floats(args.split_rows, 3, "split-rows")
        if any(r != int(r) for r in rows):
            raise ParameterError("--split-rows must be integers")
        split_spec = SplitSpec(rows=tuple(int(r) for r in rows))
    elif args.split is not None:
        split_spec = SplitSpec(*_floats(args.split, 3, "split"))
    alphas = _floats(args.alpha_grid, name="alpha-grid") if args.alpha_grid is not None else [args.alpha]
    if not alphas:
        raise ParameterError("--alpha-grid is empty")
    for a in alphas:
        LossConfig(a)
    if args.lr <= 0 or not np.isfinite(args.lr):
        raise ParameterError(f"--lr must be positive, got {args.lr}")
    if args.epochs < 1:
        raise ParameterError(f"--epochs must be >= 1, got {args.epochs}")
    if args.batch_size < 1:
        raise ParameterError(f"--batch-size must be >= 1, got {args.batch_size}")
    tau = TauSchedule(args.tau_start, args.tau_end, args.tau_epochs)
    trainer_cfg = TrainerConfig(args.epochs, args.batch_size, args.lr, args.seed, tau)

    def model_cfg(channels):
        return ModelConfig(args.input_len, args.horizon, channels, args.rank,
                           use_sfa=not args.disable_sfa, use_sta=not args.disable_sta,
                           sfa_sharing=args.sfa_sharing, sta_sharing=args.sta_sharing,
                           ifm_sharing=args.ifm_sharing)

    model_cfg(max(args.rank, 1))
    return split_spec, alphas, trainer_cfg, model_cfg


def run_train(args, stage, out):
    stage("config")
    split_spec, alphas, trainer_cfg, model_cfg = _train_configs(args)
    stage("data")
    dataset = load_csv(args.data)
    cfg = model_cfg(dataset.n_channels)
    split_spec = split_spec or default_split(args.data)
    borrow = not args.no_borrow
    stage("train")
    if args.alpha_grid is not None:
        ckpt, report, scores = search_alpha(dataset, cfg, alphas, trainer_cfg, split_spec, borrow)
        for a, v in scores.items():
            logging.getLogger(__name__).info("alpha %s -> val_mse %.8f", a, v)
    else:
        ckpt, report = fit(dataset, cfg, LossConfig(alphas[0]), trainer_cfg, split_spec, borrow)
    stage("write")
    ckpt.save(args.checkpoint)
    out.write(report.table())
    if args.alpha_grid is not None:
        out.write(f"alpha\t{format_float(ckpt.alpha)}\n")


def run_evaluate(args, stage, out):
    stage("checkpoint")
    ckpt = Checkpoint.load(args.checkpoint)
    stage("data")
    dataset = load_csv(args.data)
    stage("evaluate")
    mse, mae = evaluate(ckpt, dataset, args.split_name)
    out.write(f"{args.split_name}_mse\t{mse:.8f}\n{args.split_name}_mae\t{mae:.8f}\n")


def predict_from_checkpoint(ckpt, values):
    """Destandardised ``(horizon, channels)`` forecast from the last rows of ``values``."""
    cfg = ckpt.config
    values = np.asarray(values, dtype=np.float64)
    if values.shape[1] != cfg.channels:
        raise DimensionError(f"checkpoint has {cfg.channels} channels, data has {values.shape[1]}")
    if values.shape[0] < cfg.lookback:
        raise DataError(f"need at least {cfg.lookback} rows to predict, got {values.shape[0]}")
    tail = ckpt.standardizer.transform(values[-cfg.lookback:]).T
    return ckpt.standardizer.inverse_transform(model_forward(tail, ckpt.params, cfg).T)


def run_predict(args, stage, out):
    stage("checkpoint")
    ckpt = Checkpoint.load(args.checkpoint)
    stage("data")
    dataset = load_csv(args.data)
    stage("predict")
    forecast = predict_from_checkpoint(ckpt, dataset.values)
    stage("write")
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ckpt.channel_names)
        for row in forecast:
            w.writerow([format_float(float(v)) for v in row])


def run_export(args, stage, out):
    stage("checkpoint")
    ckpt = Checkpoint.load(args.checkpoint)
    stage("export")
    for path in interpret.export_weights(ckpt, args.output):
        out.write(path + "\n")


def run_jsd(args, stage, out):
    stage("checkpoint")
    ckpt = Checkpoint.load(args.checkpoint)
    if not ckpt.config.has_router:
        raise UnsupportedConfigError(
            f"checkpoint has rank {ckpt.config.rank} and no routed component; "
            "router distances need a model trained with --rank > 1")
    stage("jsd")
    dist = interpret.jsd_matrix(ckpt.params, ckpt.config)
    names = list(ckpt.channel_names)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["channel"] + names)
        for name, row in zip(names, dist):
            w.writerow([name] + [format_float(float(v)) for v in row])
    out.write(args.output + "\n")


COMMANDS = {
    "train": run_train,
    "evaluate": run_evaluate,
    "predict": run_predict,
    "export-weights": run_export,
    "jsd": run_jsd,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    stage = _Stage()
    try:
        COMMANDS[args.command](args, stage, out)
    except ConfigError as exc:
        return _fail(args, stage, EXIT_CONFIG, "config error", exc)
    except (DataError, OSError) as exc:
        return _fail(args, stage, EXIT_DATA, "data error", exc)
    except NumericError as exc:
        return _fail(args, stage, EXIT_NUMERIC, "numeric failure", exc)
    return EXIT_OK


def _fail(args, stage, code, kind, exc):
    sys.stderr.write(f"{PROG} {args.command} [{stage.name}]: {kind}: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
