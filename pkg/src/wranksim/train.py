"""Training loop, evaluation, and the batch-size consistency sweep.

One optimizer step processes one batch: per-sample main-loss gradients
are averaged over the batch, while the weight-space regularizer is
evaluated once per step on the output head (it reads only W, so its cost
and value are independent of batch contents) and its gamma-scaled
gradient is injected into the head gradient. The batch-wise regularizer
variant instead adds gamma-scaled gradients onto the batch's last hidden
activations. Model selection keeps the epoch with the best dev accuracy
(ties broken by lower dev MAE, then earlier epoch).
"""

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import Dataset
from .exceptions import (
    DomainError,
    TrainingDivergedError,
    ValidationError,
    WranksimError,
)
from .losses import LmclConfig, cross_entropy, lmcl
from .metrics import MetricsReport, compute_metrics
from .model import Mlp, MlpConfig, backward, forward_batch, init
from .numeric import seeded_rng
from .optim import OptimConfig, OptimizerKind, OptimizerState, optimizer_step
from .ranking import TiePolicy
from .regularizer import ranksim_loss, total_loss, w_ranksim_loss

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 1.5
DEFAULT_LAMBDA = 2.0


class LossKind(Enum):
    CE = "ce"
    LMCL = "lmcl"

    @classmethod
    def from_name(cls, name: str) -> "LossKind":
        try:
            return cls(str(name).lower())
        except ValueError:
            allowed = ", ".join(k.value for k in cls)
            raise ValidationError(f"unknown loss {name!r}; allowed: {allowed}") from None


class RegularizerKind(Enum):
    NONE = "none"
    WRANKSIM = "wranksim"
    RANKSIM = "ranksim"

    @classmethod
    def from_name(cls, name: str) -> "RegularizerKind":
        try:
            return cls(str(name).lower())
        except ValueError:
            allowed = ", ".join(k.value for k in cls)
            raise ValidationError(
                f"unknown regularizer {name!r}; allowed: {allowed}"
            ) from None


@dataclass(frozen=True)
class TrainConfig:
    loss: LossKind = LossKind.CE
    regularizer: RegularizerKind = RegularizerKind.NONE
    gamma: float = DEFAULT_GAMMA
    lam: float = DEFAULT_LAMBDA
    lmcl: LmclConfig = field(default_factory=LmclConfig)
    lr: float = 2e-4
    weight_decay: float = 1e-5
    epochs: int = 8
    batch_size: int = 2
    optimizer: OptimizerKind = OptimizerKind.RADAM
    seed: int = 0
    tie_policy: TiePolicy = TiePolicy.COMPETITION

    def __post_init__(self):
        if not isinstance(self.loss, LossKind):
            raise ValidationError(f"loss must be a LossKind, got {self.loss!r}")
        if not isinstance(self.regularizer, RegularizerKind):
            raise ValidationError(
                f"regularizer must be a RegularizerKind, got {self.regularizer!r}"
            )
        if not np.isfinite(self.gamma) or self.gamma < 0.0:
            raise ValidationError(
                f"gamma must be a non-negative finite real, got {self.gamma}"
            )
        if not np.isfinite(self.lam) or self.lam <= 0.0:
            raise ValidationError(f"lambda must be a positive finite real, got {self.lam}")
        if not isinstance(self.lmcl, LmclConfig):
            raise ValidationError(f"lmcl must be an LmclConfig, got {self.lmcl!r}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not isinstance(self.tie_policy, TiePolicy):
            raise ValidationError(f"tie_policy must be a TiePolicy, got {self.tie_policy!r}")
        self.optim_config()  # validate lr/weight_decay/optimizer eagerly

    def optim_config(self) -> OptimConfig:
        return OptimConfig(kind=self.optimizer, lr=self.lr,
                           weight_decay=self.weight_decay)

    def to_dict(self) -> dict:
        return {
            "loss": self.loss.value,
            "regularizer": self.regularizer.value,
            "gamma": self.gamma,
            "lambda": self.lam,
            "lmcl": {"scale": self.lmcl.scale, "margin": self.lmcl.margin},
            "lr": self.lr,
            "weight_decay": self.weight_decay,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "optimizer": self.optimizer.value,
            "seed": self.seed,
            "tie_policy": self.tie_policy.name.lower(),
        }


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_total_loss: float
    train_main_loss: float
    train_reg_loss: float
    dev_accuracy: float
    dev_mae: float


@dataclass
class TrainResult:
    model: Mlp
    reports: dict
    history: list[EpochRecord]
    best_epoch: int


def evaluate(model: Mlp, data: Dataset) -> MetricsReport:
    """Argmax-over-logits evaluation; argmax ties go to the lower class."""
    if data is None or len(data) == 0:
        raise DomainError("evaluate: empty dataset")
    _, logits, _ = forward_batch(model, data.features)
    pred_idx = np.argmax(logits, axis=1)
    codes = np.asarray(data.classes.labels, dtype=np.int64)
    return compute_metrics(data.labels, codes[pred_idx], data.classes)


def _checked_splits(model: Mlp, splits) -> tuple[Dataset, Dataset, Dataset]:
    if len(splits) != 3:
        raise DomainError(f"expected (train, dev, test) splits, got {len(splits)}")
    names = ("train", "dev", "test")
    for name, part in zip(names, splits):
        if part is None or len(part) == 0:
            raise DomainError(f"empty split: {name}")
        if part.feature_dim != model.config.input_dim:
            raise DomainError(
                f"{name} split feature dim {part.feature_dim} does not match "
                f"model input_dim {model.config.input_dim}"
            )
        if len(part.classes) != model.config.output_classes:
            raise DomainError(
                f"{name} split has {len(part.classes)} classes but model has "
                f"{model.config.output_classes} outputs"
            )
    return tuple(splits)


def _batch_main(cfg: TrainConfig, logits: np.ndarray, z: np.ndarray,
                head: np.ndarray, targets: np.ndarray):
    """Mean main loss over the batch plus averaged upstream gradients.

    Returns (loss, grad_logits, grad_z, grad_W); the last two are None on
    paths that do not produce them.
    """
    B = logits.shape[0]
    losses = np.empty(B)
    if cfg.loss is LossKind.CE:
        grad_logits = np.empty_like(logits)
        for i in range(B):
            losses[i], grad_logits[i] = cross_entropy(logits[i], int(targets[i]))
        return float(losses.mean()), grad_logits / B, None, None
    grad_z = np.empty_like(z)
    grad_W = np.zeros_like(head)
    for i in range(B):
        losses[i], grad_z[i], gw = lmcl(z[i], head, int(targets[i]), cfg.lmcl)
        grad_W += gw
    return float(losses.mean()), None, grad_z / B, grad_W / B


def _assign_params(model: Mlp, arrays: list[np.ndarray]) -> None:
    depth = model.depth
    for l in range(depth):
        model.weights[l] = arrays[2 * l]
        model.biases[l] = arrays[2 * l + 1]
    model.head = arrays[2 * depth]


def train(model: Mlp, splits, cfg: TrainConfig,
          rng: np.random.Generator) -> TrainResult:
    """Train a copy of ``model`` on the train split; select by dev accuracy.

    Raises TrainingDivergedError naming the step if the total loss goes
    non-finite.
    """
    train_set, dev_set, test_set = _checked_splits(model, splits)
    working = model.copy()
    classes = train_set.classes
    targets = train_set.label_indices
    codes = train_set.labels
    opt_cfg = cfg.optim_config()
    state = OptimizerState.for_params([a for _, a in working.parameter_arrays()])

    history: list[EpochRecord] = []
    best: tuple | None = None
    best_model = working.copy()
    best_epoch = 0
    step = 0
    n = len(train_set)

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total_sum = main_sum = reg_sum = 0.0
        n_steps = 0
        for start in range(0, n, cfg.batch_size):
            step += 1
            batch = order[start:start + cfg.batch_size]
            X = train_set.features[batch]
            t_idx = targets[batch]
            z, logits, cache = forward_batch(working, X)
            main_loss, grad_logits, grad_z, grad_W_main = _batch_main(
                cfg, logits, z, working.head, t_idx)

            reg_loss = 0.0
            extra_W = grad_W_main
            gz_extra = grad_z
            if cfg.regularizer is RegularizerKind.WRANKSIM:
                reg_loss, gW = w_ranksim_loss(
                    working.head, classes, cfg.tie_policy, cfg.lam)
                extra_W = cfg.gamma * gW if extra_W is None else extra_W + cfg.gamma * gW
            elif cfg.regularizer is RegularizerKind.RANKSIM:
                if batch.size >= 2:
                    reg_loss, gZ = ranksim_loss(
                        z, codes[batch], cfg.tie_policy, rng, cfg.lam)
                    gz_extra = cfg.gamma * gZ if gz_extra is None else gz_extra + cfg.gamma * gZ
                else:
                    logger.debug("step %d: single-sample batch, regularizer skipped", step)

            if cfg.regularizer is RegularizerKind.NONE:
                batch_total = main_loss
            else:
                batch_total = total_loss(main_loss, reg_loss, cfg.gamma)
            if not np.isfinite(batch_total):
                raise TrainingDivergedError(
                    f"non-finite total loss at step {step} (epoch {epoch})"
                )

            if grad_logits is None:
                grad_logits = np.zeros_like(logits)
            grads = backward(working, cache, grad_logits,
                             extra_grad_W=extra_W, grad_z_extra=gz_extra)
            params = [a for _, a in working.parameter_arrays()]
            new_params, state = optimizer_step(params, grads.arrays(), state, opt_cfg)
            _assign_params(working, new_params)

            total_sum += batch_total
            main_sum += main_loss
            reg_sum += reg_loss
            n_steps += 1

        dev_report = evaluate(working, dev_set)
        record = EpochRecord(
            epoch=epoch,
            train_total_loss=total_sum / n_steps,
            train_main_loss=main_sum / n_steps,
            train_reg_loss=reg_sum / n_steps,
            dev_accuracy=dev_report.accuracy,
            dev_mae=dev_report.mae,
        )
        history.append(record)
        key = (dev_report.accuracy, -dev_report.mae, -epoch)
        if best is None or key > best:
            best = key
            best_model = working.copy()
            best_epoch = epoch

    curve = tuple(r.train_total_loss for r in history)
    reports = {}
    for name, part in (("train", train_set), ("dev", dev_set), ("test", test_set)):
        rep = evaluate(best_model, part)
        reports[name] = dataclasses.replace(rep, loss_curve=curve)
    return TrainResult(model=best_model, reports=reports, history=history,
                       best_epoch=best_epoch)


@dataclass
class SweepReport:
    """Grid results plus per-regularizer cross-batch-size dispersion."""

    batch_sizes: tuple[int, ...]
    seeds: tuple[int, ...]
    rows: list[dict]
    aggregates: list[dict]
    dispersion: dict
    n_failed: int


def _sweep_run(args) -> dict:
    base_cfg, model_cfg, splits, reg, bs, seed = args
    cfg = dataclasses.replace(base_cfg, regularizer=reg, batch_size=bs, seed=seed)
    mcfg = dataclasses.replace(model_cfg, init_seed=seed)
    row = {"regularizer": reg.value, "batch_size": int(bs), "seed": int(seed)}
    try:
        result = train(init(mcfg), splits, cfg, seeded_rng(seed))
        test = result.reports["test"]
        row.update(status="ok", test_accuracy=test.accuracy, test_mae=test.mae,
                   test_macro_f1=test.macro_f1, best_epoch=result.best_epoch,
                   error="")
    except (WranksimError, FloatingPointError) as exc:
        logger.warning("sweep run %s failed: %s", row, exc)
        row.update(status="failed", test_accuracy=float("nan"),
                   test_mae=float("nan"), test_macro_f1=float("nan"),
                   best_epoch=0, error=str(exc))
    return row


def sweep_batch_size(base_cfg: TrainConfig, model_cfg: MlpConfig,
                     batch_sizes, seeds, splits, jobs: int = 1) -> SweepReport:
    """Grid of training runs over regularizer x batch size x seed.

    Per-run failures are recorded as rows rather than aborting the grid.
    Dispersion is the standard deviation, across batch sizes, of the
    per-batch-size mean test accuracy.
    """
    batch_sizes = tuple(int(b) for b in batch_sizes)
    seeds = tuple(int(s) for s in seeds)
    if len(batch_sizes) < 2:
        raise ValidationError(f"need at least 2 batch sizes, got {batch_sizes}")
    if any(b < 1 for b in batch_sizes):
        raise ValidationError(f"batch sizes must be >= 1, got {batch_sizes}")
    if len(seeds) < 3:
        raise ValidationError(f"need at least 3 seeds, got {seeds}")
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")

    regs = (RegularizerKind.WRANKSIM, RegularizerKind.RANKSIM)
    grid = [(base_cfg, model_cfg, splits, reg, bs, seed)
            for reg in regs for bs in batch_sizes for seed in seeds]
    if jobs == 1:
        rows = [_sweep_run(args) for args in grid]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_run, grid))

    aggregates = []
    dispersion = {}
    for reg in regs:
        batch_means = []
        for bs in batch_sizes:
            accs = [r["test_accuracy"] for r in rows
                    if r["regularizer"] == reg.value and r["batch_size"] == bs
                    and r["status"] == "ok"]
            agg = {
                "regularizer": reg.value,
                "batch_size": bs,
                "n_ok": len(accs),
                "n_failed": len(seeds) - len(accs),
                "mean_test_accuracy": float(np.mean(accs)) if accs else float("nan"),
                "std_test_accuracy": float(np.std(accs)) if accs else float("nan"),
            }
            aggregates.append(agg)
            batch_means.append(agg["mean_test_accuracy"])
        means = np.asarray(batch_means)
        dispersion[reg.value] = (
            float(np.std(means)) if np.all(np.isfinite(means)) else float("nan")
        )
    n_failed = sum(1 for r in rows if r["status"] != "ok")
    return SweepReport(batch_sizes=batch_sizes, seeds=seeds, rows=rows,
                       aggregates=aggregates, dispersion=dispersion,
                       n_failed=n_failed)
