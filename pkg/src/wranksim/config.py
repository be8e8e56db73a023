"""JSON config files: schema validation with unknown-key rejection.

Every command reads one flat JSON object. Unknown keys are rejected
loudly rather than ignored, so a typo like "gama" cannot silently run an
unregularized experiment. Random seeds never live in config files; they
come from the --seed flag alone.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .data import SynthConfig
from .exceptions import ParseError, ValidationError
from .gradcheck import GradCheckConfig
from .losses import LmclConfig
from .model import Activation, DEFAULT_HIDDEN_DIMS
from .optim import OptimizerKind
from .ranking import TiePolicy
from .train import LossKind, RegularizerKind, TrainConfig

DEFAULT_RATIOS = (0.8, 0.1, 0.1)


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: top-level value must be an object")
    return obj


def check_keys(obj: dict, allowed, context: str) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ValidationError(
            f"{context}: unknown key(s) {', '.join(unknown)}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def _get_number(obj, key, default, kind=float):
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ValidationError(f"{key} must be an integer, got {value!r}")
    return kind(value)


SYNTH_KEYS = ("n_samples", "n_classes", "feature_dim", "noise_sigma",
              "class_prior", "manifold")


def parse_synth_config(obj: dict) -> SynthConfig:
    check_keys(obj, SYNTH_KEYS, "gen-data config")
    if "n_samples" not in obj:
        raise ValidationError("gen-data config: missing required key n_samples")
    defaults = SynthConfig(n_samples=1)
    prior = obj.get("class_prior", defaults.class_prior)
    if isinstance(prior, list):
        prior = tuple(float(x) for x in prior)
    elif not isinstance(prior, str):
        raise ValidationError(
            f"class_prior must be a name or a weight list, got {prior!r}"
        )
    manifold = obj.get("manifold", defaults.manifold)
    if not isinstance(manifold, str):
        raise ValidationError(f"manifold must be a string, got {manifold!r}")
    return SynthConfig(
        n_samples=_get_number(obj, "n_samples", None, int),
        n_classes=_get_number(obj, "n_classes", defaults.n_classes, int),
        feature_dim=_get_number(obj, "feature_dim", defaults.feature_dim, int),
        noise_sigma=_get_number(obj, "noise_sigma", defaults.noise_sigma),
        class_prior=prior,
        manifold=manifold,
    )


@dataclass(frozen=True)
class TrainFileConfig:
    """Everything a training run needs beyond the dataset and the seed."""

    train: TrainConfig
    hidden_dims: tuple[int, ...]
    activation: Activation
    n_classes: int
    ratios: tuple[float, float, float]


TRAIN_KEYS = ("loss", "regularizer", "gamma", "lambda", "lmcl_scale",
              "lmcl_margin", "lr", "weight_decay", "epochs", "batch_size",
              "optimizer", "tie_policy", "ratios", "hidden_dims",
              "activation", "n_classes")


def _parse_train_common(obj: dict, context: str,
                        exclude=()) -> tuple[dict, dict]:
    """Shared train/sweep parsing: TrainConfig kwargs + file-level extras."""
    allowed = tuple(k for k in TRAIN_KEYS if k not in exclude)
    base = TrainConfig()
    kwargs = {}
    if "loss" in obj:
        kwargs["loss"] = LossKind.from_name(obj["loss"])
    if "regularizer" in obj:
        kwargs["regularizer"] = RegularizerKind.from_name(obj["regularizer"])
    if "optimizer" in obj:
        kwargs["optimizer"] = OptimizerKind.from_name(obj["optimizer"])
    if "tie_policy" in obj:
        kwargs["tie_policy"] = TiePolicy.from_name(obj["tie_policy"])
    kwargs["gamma"] = _get_number(obj, "gamma", base.gamma)
    kwargs["lam"] = _get_number(obj, "lambda", base.lam)
    kwargs["lmcl"] = LmclConfig(
        scale=_get_number(obj, "lmcl_scale", base.lmcl.scale),
        margin=_get_number(obj, "lmcl_margin", base.lmcl.margin),
    )
    kwargs["lr"] = _get_number(obj, "lr", base.lr)
    kwargs["weight_decay"] = _get_number(obj, "weight_decay", base.weight_decay)
    kwargs["epochs"] = _get_number(obj, "epochs", base.epochs, int)
    if "batch_size" not in exclude:
        kwargs["batch_size"] = _get_number(obj, "batch_size", base.batch_size, int)

    ratios = obj.get("ratios", list(DEFAULT_RATIOS))
    if not isinstance(ratios, list) or len(ratios) != 3:
        raise ValidationError(f"ratios must be a list of 3 numbers, got {ratios!r}")
    hidden = obj.get("hidden_dims", list(DEFAULT_HIDDEN_DIMS))
    if not isinstance(hidden, list) or not all(
            isinstance(h, int) and not isinstance(h, bool) for h in hidden):
        raise ValidationError(f"hidden_dims must be a list of integers, got {hidden!r}")
    extras = {
        "ratios": tuple(float(r) for r in ratios),
        "hidden_dims": tuple(int(h) for h in hidden),
        "activation": Activation.from_name(obj.get("activation", "relu")),
        "n_classes": _get_number(obj, "n_classes", 5, int),
    }
    check_keys(obj, allowed, context)
    return kwargs, extras


def parse_train_file(obj: dict) -> TrainFileConfig:
    kwargs, extras = _parse_train_common(obj, "train config")
    return TrainFileConfig(
        train=TrainConfig(**kwargs),
        hidden_dims=extras["hidden_dims"],
        activation=extras["activation"],
        n_classes=extras["n_classes"],
        ratios=extras["ratios"],
    )


@dataclass(frozen=True)
class SweepFileConfig:
    base: TrainFileConfig
    batch_sizes: tuple[int, ...]
    seeds: tuple[int, ...]


SWEEP_ONLY_KEYS = ("batch_sizes", "seeds")


def parse_sweep_file(obj: dict) -> SweepFileConfig:
    for key in ("regularizer", "batch_size"):
        if key in obj:
            raise ValidationError(
                f"sweep config: {key} is a grid axis and cannot be fixed; "
                f"use batch_sizes/seeds"
            )
    for key in SWEEP_ONLY_KEYS:
        if key not in obj:
            raise ValidationError(f"sweep config: missing required key {key}")
        values = obj[key]
        if not isinstance(values, list) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise ValidationError(f"{key} must be a list of integers, got {values!r}")
    rest = {k: v for k, v in obj.items() if k not in SWEEP_ONLY_KEYS}
    kwargs, extras = _parse_train_common(
        rest, "sweep config", exclude=("regularizer", "batch_size"))
    base = TrainFileConfig(
        train=TrainConfig(**kwargs),
        hidden_dims=extras["hidden_dims"],
        activation=extras["activation"],
        n_classes=extras["n_classes"],
        ratios=extras["ratios"],
    )
    return SweepFileConfig(
        base=base,
        batch_sizes=tuple(int(b) for b in obj["batch_sizes"]),
        seeds=tuple(int(s) for s in obj["seeds"]),
    )


GRADCHECK_KEYS = ("cases", "rank_cases")


def parse_gradcheck_config(obj: dict) -> GradCheckConfig:
    check_keys(obj, GRADCHECK_KEYS, "grad-check config")
    return GradCheckConfig(
        cases=_get_number(obj, "cases", 100, int),
        rank_cases=_get_number(obj, "rank_cases", 1000, int),
    )


def config_hash(obj) -> str:
    """Short stable digest of a JSON-serializable config snapshot."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]
