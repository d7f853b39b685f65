"""Mini-batch training loop with validation-based checkpoint selection."""

import logging
from dataclasses import asdict, dataclass, field
from typing import List

import numpy as np

from .backprop import backward
from .checkpoint import Checkpoint
from .data import SplitSpec, WindowSource, fit_standardizer, split, window_starts
from .exceptions import DataError, DimensionError, ParameterError
from .losses import LossConfig
from .model import init_params, model_forward, param_count
from .optim import Adam, TauSchedule

logger = logging.getLogger(__name__)

EVAL_BATCH = 256


@dataclass(frozen=True)
class TrainerConfig:
    epochs: int = 50
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0
    tau: TauSchedule = field(default_factory=TauSchedule)

    def to_dict(self):
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    tau: float
    train_loss: float
    val_mse: float
    val_mae: float


@dataclass
class TrainReport:
    epochs: List[EpochRecord] = field(default_factory=list)
    batch_losses: List[List[float]] = field(default_factory=list, repr=False)
    best_epoch: int = -1
    param_count: int = 0
    test_mse: float = float("nan")
    test_mae: float = float("nan")

    def table(self):
        """Tab-separated per-epoch metrics followed by a summary block."""
        lines = ["epoch\ttau\ttrain_loss\tval_mse\tval_mae"]
        for r in self.epochs:
            lines.append(f"{r.epoch}\t{r.tau:.6f}\t{r.train_loss:.8f}\t{r.val_mse:.8f}\t{r.val_mae:.8f}")
        lines.append(f"best_epoch\t{self.best_epoch}")
        lines.append(f"param_count\t{self.param_count}")
        lines.append(f"test_mse\t{self.test_mse:.8f}")
        lines.append(f"test_mae\t{self.test_mae:.8f}")
        return "\n".join(lines) + "\n"


def score_windows(params, cfg, source, starts):
    """``(mse, mae)`` over every window, channel and step."""
    if len(starts) == 0:
        raise DataError("no windows to evaluate")
    sq = ab = 0.0
    for batch in source.batches(starts, EVAL_BATCH):
        err = model_forward(batch.inputs, params, cfg) - batch.targets
        sq += float((err ** 2).sum())
        ab += float(np.abs(err).sum())
    n = len(starts) * cfg.channels * cfg.horizon
    return sq / n, ab / n


def train(source, train_starts, val_starts, cfg, loss_cfg=LossConfig(), trainer_cfg=TrainerConfig()):
    """Optimise from a fresh initialisation; return the best-validation params and a report."""
    if len(train_starts) == 0 or len(val_starts) == 0:
        raise DataError("training and validation splits must both contain windows")
    params = init_params(cfg, trainer_cfg.seed)
    opt = Adam(trainer_cfg.lr)
    report = TrainReport(param_count=param_count(cfg))
    best, best_mse = None, np.inf

    for epoch in range(trainer_cfg.epochs):
        tau = trainer_cfg.tau(epoch)
        if params.router is not None:
            params.router.temperature = tau
        losses, sizes = [], []
        for batch in source.batches(train_starts, trainer_cfg.batch_size, shuffle=True,
                                    seed=[trainer_cfg.seed, epoch]):
            loss, grads = backward(batch.inputs, batch.targets, params, cfg, loss_cfg)
            opt.step(params.arrays(), grads.arrays())
            losses.append(loss.total)
            sizes.append(len(batch.starts))
        train_loss = float(np.dot(losses, sizes) / np.sum(sizes))
        val_mse, val_mae = score_windows(params, cfg, source, val_starts)
        report.epochs.append(EpochRecord(epoch, tau, train_loss, val_mse, val_mae))
        report.batch_losses.append(losses)
        logger.info("epoch %d tau=%.3f train=%.6f val_mse=%.6f", epoch, tau, train_loss, val_mse)
        if val_mse < best_mse:
            best, best_mse, report.best_epoch = params.copy(), val_mse, epoch

    return best, report


def fit(dataset, cfg, loss_cfg=LossConfig(), trainer_cfg=TrainerConfig(), split_spec=None, borrow=True):
    """Split, standardise, train and score on the test split.

    Returns ``(checkpoint, report)``; the checkpoint holds the parameters of
    the epoch with the lowest validation MSE.
    """
    split_spec = split_spec or SplitSpec()
    ranges = split(dataset, split_spec, cfg, borrow)
    standardizer = fit_standardizer(dataset, ranges.train)
    source = WindowSource(dataset, standardizer, cfg)
    starts = {name: window_starts(ranges[name], cfg, borrow) for name in ("train", "val", "test")}

    params, report = train(source, starts["train"], starts["val"], cfg, loss_cfg, trainer_cfg)
    report.test_mse, report.test_mae = score_windows(params, cfg, source, starts["test"])

    history = [asdict(r) for r in report.epochs]
    ckpt = Checkpoint(cfg, params, standardizer, list(dataset.names), loss_cfg.alpha,
                      trainer_cfg.seed, report.best_epoch, history, split_spec, borrow,
                      trainer_cfg.to_dict())
    return ckpt, report


def evaluate(checkpoint, dataset, split_name="test"):
    """``(mse, mae)`` of a checkpoint on one split of ``dataset``, in standardised units."""
    cfg = checkpoint.config
    if dataset.n_channels != cfg.channels:
        raise DimensionError(f"checkpoint has {cfg.channels} channels, data has {dataset.n_channels}")
    ranges = split(dataset, checkpoint.split or SplitSpec(), cfg, checkpoint.borrow)
    source = WindowSource(dataset, checkpoint.standardizer, cfg)
    return score_windows(checkpoint.params, cfg, source, window_starts(ranges[split_name], cfg, checkpoint.borrow))


def search_alpha(dataset, cfg, alphas, trainer_cfg=TrainerConfig(), split_spec=None, borrow=True):
    """Train once per loss mix and keep the run with the lowest validation MSE.

    Returns ``(checkpoint, report, scores)`` where ``scores`` maps each alpha
    to its best validation MSE.
    """
    if not alphas:
        raise ParameterError("alpha grid is empty")
    best = None
    scores = {}
    for alpha in alphas:
        ckpt, report = fit(dataset, cfg, LossConfig(alpha), trainer_cfg, split_spec, borrow)
        val = report.epochs[report.best_epoch].val_mse
        scores[alpha] = val
        logger.info("alpha=%.3f best val_mse=%.6f test_mse=%.6f", alpha, val, report.test_mse)
        if best is None or val < best[2]:
            best = (ckpt, report, val)
    return best[0], best[1], scores
