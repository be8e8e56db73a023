"""From-scratch MLP classifier with explicit forward/backward passes.

The network is a stack of bias-carrying hidden layers with an elementwise
nonlinearity, followed by a bias-free output head whose rows double as the
per-class weight vectors consumed by the weight-space regularizer: the
logit for class j is exactly the dot product of head row j with the last
hidden activation. An empty hidden stack degenerates to a linear
classifier on the raw input.
"""

import io
import json
import zipfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import kernels
from .backend import make_array_list
from .exceptions import DomainError, ValidationError
from .numeric import seeded_rng

CHECKPOINT_FORMAT = "wranksim-checkpoint"
CHECKPOINT_VERSION = 1

DEFAULT_HIDDEN_DIMS = (128, 64)


class Activation(Enum):
    """Elementwise nonlinearity applied after every hidden layer."""

    RELU = "relu"
    TANH = "tanh"

    @property
    def code(self) -> int:
        return kernels.RELU if self is Activation.RELU else kernels.TANH

    @classmethod
    def from_name(cls, name: str) -> "Activation":
        try:
            return cls(str(name).lower())
        except ValueError:
            allowed = ", ".join(a.value for a in cls)
            raise ValidationError(
                f"unknown activation {name!r}; allowed: {allowed}"
            ) from None


@dataclass(frozen=True)
class MlpConfig:
    """Architecture and initialization seed for the classifier."""

    input_dim: int
    hidden_dims: tuple[int, ...] = DEFAULT_HIDDEN_DIMS
    output_classes: int = 5
    activation: Activation = Activation.RELU
    init_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1:
            raise DomainError(f"input_dim must be >= 1, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_dims):
            raise DomainError(f"hidden dims must be >= 1, got {self.hidden_dims}")
        if self.output_classes < 2:
            raise DomainError(
                f"output_classes must be >= 2, got {self.output_classes}"
            )
        if not isinstance(self.activation, Activation):
            raise DomainError(f"activation must be an Activation, got {self.activation!r}")

    @property
    def head_dim(self) -> int:
        """Width of the vector the output head consumes."""
        return self.hidden_dims[-1] if self.hidden_dims else self.input_dim

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dims": list(self.hidden_dims),
            "output_classes": self.output_classes,
            "activation": self.activation.value,
            "init_seed": self.init_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpConfig":
        return cls(
            input_dim=int(d["input_dim"]),
            hidden_dims=tuple(int(h) for h in d["hidden_dims"]),
            output_classes=int(d["output_classes"]),
            activation=Activation.from_name(d["activation"]),
            init_seed=int(d["init_seed"]),
        )


@dataclass
class Mlp:
    """Hidden layers (weight, bias) plus the bias-free output head."""

    config: MlpConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    head: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.weights)

    def parameter_arrays(self) -> list[tuple[str, np.ndarray]]:
        """All trainable arrays in a fixed, stable order."""
        out = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out.append((f"weight_{i}", w))
            out.append((f"bias_{i}", b))
        out.append(("head", self.head))
        return out

    def copy(self) -> "Mlp":
        return Mlp(
            config=self.config,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            head=self.head.copy(),
        )


@dataclass
class ForwardCache:
    """Per-layer activations from a forward pass (input first, last hidden
    last), kept for the matching backward pass."""

    acts: object
    batch_size: int


@dataclass
class GradientSet:
    """Gradients matching :meth:`Mlp.parameter_arrays` order."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    head: np.ndarray

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        out.append(self.head)
        return out


@dataclass(frozen=True)
class FeatureGroupSet:
    """Named feature-vector groups; concatenation follows declared order."""

    groups: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        names = [name for name, _ in self.groups]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate group names: {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.groups)

    def get(self, name: str) -> np.ndarray:
        for n, v in self.groups:
            if n == name:
                return v
        raise DomainError(f"missing feature group {name!r}")


def fuse(groups: FeatureGroupSet, order=None) -> np.ndarray:
    """Concatenate the group vectors, by declared order or an explicit one.

    Raises DomainError naming the first missing group.
    """
    names = groups.names if order is None else tuple(order)
    parts = [np.asarray(groups.get(n), dtype=np.float64).ravel() for n in names]
    if not parts:
        raise DomainError("fuse: no feature groups given")
    return np.concatenate(parts)


def init(config: MlpConfig) -> Mlp:
    """Seeded symmetric scaled-uniform initialization.

    Weights are uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
    Head rows feed cosine similarities downstream, so any all-zero row is
    re-drawn.
    """
    rng = seeded_rng(config.init_seed)
    weights: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    fan_in = config.input_dim
    for h in config.hidden_dims:
        scale = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-scale, scale, size=(h, fan_in)))
        biases.append(np.zeros(h, dtype=np.float64))
        fan_in = h
    scale = 1.0 / np.sqrt(config.head_dim)
    head = rng.uniform(-scale, scale, size=(config.output_classes, config.head_dim))
    for i in range(config.output_classes):
        while not np.any(head[i]):
            head[i] = rng.uniform(-scale, scale, size=config.head_dim)
    return Mlp(config=config, weights=weights, biases=biases, head=head)


def _checked_batch(model: Mlp, X) -> np.ndarray:
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != model.config.input_dim:
        raise DomainError(
            f"input batch shape {arr.shape} does not match input_dim "
            f"{model.config.input_dim}"
        )
    return arr


def forward_batch(model: Mlp, X) -> tuple[np.ndarray, np.ndarray, ForwardCache]:
    """Forward a batch; returns last hidden activations, logits, and cache."""
    arr = _checked_batch(model, X)
    if model.depth == 0:
        z = arr
        logits = z @ model.head.T
        return z, logits, ForwardCache(acts=[arr], batch_size=arr.shape[0])
    acts, logits = kernels.mlp_forward_kernel(
        make_array_list(model.weights),
        make_array_list(model.biases),
        model.head,
        arr,
        model.config.activation.code,
    )
    z = acts[model.depth]
    return z, logits, ForwardCache(acts=acts, batch_size=arr.shape[0])


def forward(model: Mlp, x) -> tuple[np.ndarray, np.ndarray, ForwardCache]:
    """Forward one sample; returns z, logits, and the backward cache."""
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1:
        raise DomainError(f"expected a 1-D input, got shape {vec.shape}")
    z, logits, cache = forward_batch(model, vec[None, :])
    return z[0], logits[0], cache


def backward(model: Mlp, cache: ForwardCache, grad_logits,
             extra_grad_W=None, grad_z_extra=None) -> GradientSet:
    """Backpropagate upstream logit gradients through the cached pass.

    ``grad_logits`` may be per-sample (1-D, batch of one) or a batch
    matrix; ``extra_grad_W`` is added onto the head gradient after the
    classification path (zeros when the regularizer is off), and
    ``grad_z_extra`` injects an additional upstream directly on the last
    hidden activation (the batch-wise regularizer's path).
    """
    g = np.ascontiguousarray(grad_logits, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    C, H = model.head.shape
    if g.shape != (cache.batch_size, C):
        raise DomainError(
            f"grad_logits shape {g.shape} does not match batch "
            f"{cache.batch_size} x {C}"
        )
    if extra_grad_W is None:
        extra = np.zeros_like(model.head)
    else:
        extra = np.asarray(extra_grad_W, dtype=np.float64)
        if extra.shape != model.head.shape:
            raise DomainError(
                f"extra_grad_W shape {extra.shape} does not match head shape "
                f"{model.head.shape}"
            )
    if grad_z_extra is None:
        gz_extra = np.zeros((cache.batch_size, H), dtype=np.float64)
    else:
        gz_extra = np.ascontiguousarray(grad_z_extra, dtype=np.float64)
        if gz_extra.ndim == 1:
            gz_extra = gz_extra[None, :]
        if gz_extra.shape != (cache.batch_size, H):
            raise DomainError(
                f"grad_z_extra shape {gz_extra.shape} does not match batch "
                f"{cache.batch_size} x {H}"
            )
    if model.depth == 0:
        z = cache.acts[0]
        grad_head = g.T @ z + extra
        return GradientSet(weights=[], biases=[], head=grad_head)
    gws, gbs, grad_head = kernels.mlp_backward_kernel(
        make_array_list(model.weights),
        model.head,
        cache.acts,
        g,
        gz_extra,
        model.config.activation.code,
    )
    weights = [np.asarray(gws[i]) for i in range(model.depth - 1, -1, -1)]
    biases = [np.asarray(gbs[i]) for i in range(model.depth - 1, -1, -1)]
    return GradientSet(weights=weights, biases=biases, head=grad_head + extra)


def save_checkpoint(model: Mlp, path) -> None:
    """Write a versioned, self-describing checkpoint.

    The container is a stored (uncompressed) zip with fixed entry
    timestamps so identical models serialize to identical bytes; each
    parameter array is a standard .npy member, plus a JSON metadata entry.
    """
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "arrays": [name for name, _ in model.parameter_arrays()],
    }
    path = Path(path)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        info = zipfile.ZipInfo("meta.json", date_time=(1980, 1, 1, 0, 0, 0))
        zf.writestr(info, json.dumps(meta, indent=2, sort_keys=True))
        for name, arr in model.parameter_arrays():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arr))
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, buf.getvalue())


def load_checkpoint(path) -> Mlp:
    """Read a checkpoint written by :func:`save_checkpoint`, bit-exact."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"checkpoint not found: {path}")
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            if meta.get("format") != CHECKPOINT_FORMAT:
                raise ValidationError(f"not a model checkpoint: {path}")
            if meta.get("version") != CHECKPOINT_VERSION:
                raise ValidationError(
                    f"unsupported checkpoint version {meta.get('version')}"
                )
            arrays = {}
            for name in meta["arrays"]:
                with zf.open(f"{name}.npy") as f:
                    arrays[name] = np.lib.format.read_array(f)
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed checkpoint {path}: {exc}") from exc
    config = MlpConfig.from_dict(meta["config"])
    weights = [arrays[f"weight_{i}"] for i in range(len(config.hidden_dims))]
    biases = [arrays[f"bias_{i}"] for i in range(len(config.hidden_dims))]
    model = Mlp(config=config, weights=weights, biases=biases, head=arrays["head"])
    for name, arr in model.parameter_arrays():
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"checkpoint array {name} contains non-finite values")
    return model
