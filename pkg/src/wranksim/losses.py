"""Classification losses: softmax cross-entropy and the large-margin
cosine loss.

Cross-entropy consumes a plain logit vector. The large-margin loss scores
each class by the cosine between the feature vector and that class's
weight row, subtracts an additive margin from the target-class cosine,
and scales everything before the softmax; margin 0 with scale 1 reduces
it exactly to cross-entropy on the cosine vector. Because only angles
matter, the loss is invariant to positive rescaling of the feature vector
or of any single weight row.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ValidationError
from .numeric import as_vector, cosine_similarity, cosine_similarity_grad, log_softmax, softmax

DEFAULT_SCALE = 1.96
DEFAULT_MARGIN = 0.15


@dataclass(frozen=True)
class LmclConfig:
    """Scale and margin for the large-margin cosine loss."""

    scale: float = DEFAULT_SCALE
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if not np.isfinite(self.scale) or self.scale <= 0.0:
            raise ValidationError(f"scale must be a positive finite real, got {self.scale}")
        if not np.isfinite(self.margin) or self.margin < 0.0:
            raise ValidationError(
                f"margin must be a non-negative finite real, got {self.margin}"
            )


def _checked_scores(scores, target: int, what: str) -> np.ndarray:
    a = as_vector(scores, what)
    if a.size < 2:
        raise DomainError(f"{what} needs length >= 2, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{what} must be finite")
    if not 0 <= int(target) < a.size:
        raise DomainError(f"target index {target} out of range for {a.size} classes")
    return a


def cross_entropy(logits, target: int) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy and its gradient on the logits."""
    a = _checked_scores(logits, target, "logits")
    logp = log_softmax(a)
    loss = -logp[target]
    grad = softmax(a)
    grad[target] -= 1.0
    return float(loss), grad


def margin_cosine_scores(cosines, target: int,
                         cfg: LmclConfig) -> tuple[float, np.ndarray]:
    """Margin-shifted, scaled softmax loss on a cosine vector.

    The margin hits only the target entry; the scale multiplies every
    entry, so the chain rule passes it straight through to the gradient.
    """
    a = _checked_scores(cosines, target, "cosines")
    shifted = a.copy()
    shifted[target] -= cfg.margin
    loss, grad_scaled = cross_entropy(cfg.scale * shifted, target)
    return loss, cfg.scale * grad_scaled


def lmcl(features, head, target: int,
         cfg: LmclConfig | None = None) -> tuple[float, np.ndarray, np.ndarray]:
    """Large-margin cosine loss with gradients on features and weights.

    Per-class scores are cosines between ``features`` and the rows of
    ``head``; zero-norm inputs have no angle and are rejected.
    """
    config = cfg if cfg is not None else LmclConfig()
    z = as_vector(features, "features")
    W = np.ascontiguousarray(head, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] != z.size:
        raise DomainError(
            f"head shape {W.shape} does not match feature length {z.size}"
        )
    if np.linalg.norm(z) == 0.0:
        raise DomainError("lmcl: feature vector has zero norm")
    norms = np.linalg.norm(W, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DomainError(f"lmcl: weight row {int(zero[0])} has zero norm")

    n_classes = W.shape[0]
    cosines = np.array([cosine_similarity(z, W[j]) for j in range(n_classes)])
    loss, grad_cos = margin_cosine_scores(cosines, target, config)

    grad_features = np.zeros_like(z)
    grad_W = np.zeros_like(W)
    for j in range(n_classes):
        g = grad_cos[j]
        if g == 0.0:
            continue
        gz, gw = cosine_similarity_grad(z, W[j])
        grad_features += g * gz
        grad_W[j] = g * gw
    return loss, grad_features, grad_W
