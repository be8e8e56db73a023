"""Ranking-similarity regularizers for ordinal classification.

Two variants share one kernel: the weight-space regularizer compares, row
by row, the cosine-similarity ranking among the output-layer weight rows
against the ranking induced by negative absolute label distance; the
batch-wise variant applies the same objective to feature embeddings
subsampled to one occurrence per label. Rank steps are differentiated with
the perturbation-based surrogate from :mod:`wranksim.ranking`.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import DomainError
from .ranking import TiePolicy

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 2.0


@dataclass(frozen=True)
class OrdinalClassSet:
    """Ordered class labels with contiguous positions 0..n-1.

    Labels are strictly increasing integer codes; their numeric values
    define the label-space distances.
    """

    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise DomainError("OrdinalClassSet needs at least 2 classes")
        if any(b <= a for a, b in zip(self.labels, self.labels[1:])):
            raise DomainError(f"class labels must be strictly increasing: {self.labels}")

    @classmethod
    def contiguous(cls, n: int, start: int = 1) -> "OrdinalClassSet":
        return cls(tuple(range(start, start + n)))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def values(self) -> np.ndarray:
        return np.array(self.labels, dtype=np.float64)

    def index_of(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"label {label} not in class set {self.labels}") from None


def _checked_rows(W, what: str) -> tuple[np.ndarray, np.ndarray]:
    """2-D float64 view of W plus row norms, rejecting zero rows."""
    arr = np.ascontiguousarray(W, dtype=np.float64)
    if arr.ndim != 2:
        raise DomainError(f"{what}: expected a 2-D matrix, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DomainError(f"{what}: row {int(zero[0])} has zero norm")
    return arr, norms


def weight_similarity(W) -> np.ndarray:
    """Pairwise cosine similarity matrix of the weight rows.

    Symmetric with unit diagonal; raises DomainError naming the first
    zero-norm row.
    """
    arr, _ = _checked_rows(W, "weight_similarity")
    S, _ = kernels.cosine_matrix_kernel(arr)
    return S

def label_similarity(classes: OrdinalClassSet) -> np.ndarray:
    """Negative absolute distance matrix of the class label values."""
    c = classes.values
    return -np.abs(c[:, None] - c[None, :])


def _label_rank_matrix(values: np.ndarray, policy: TiePolicy) -> np.ndarray:
    """Per-row descending ranks of the negative-absolute-distance matrix."""
    S = -np.abs(values[:, None] - values[None, :])
    n = S.shape[0]
    out = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        out[i] = kernels.rank_kernel(np.ascontiguousarray(S[i]), policy.code)
    return out


def w_ranksim_loss(W, classes: OrdinalClassSet,
                   policy: TiePolicy = TiePolicy.COMPETITION,
                   lam: float = DEFAULT_LAMBDA) -> tuple[float, np.ndarray]:
    """Rank disagreement between weight-space and label-space similarities.

    Loss is the sum over rows of the mean squared difference between the
    row's cosine-similarity ranks and its label-distance ranks. The
    gradient chains the row-wise MSE upstream through the surrogate rank
    gradient (perturbation strength ``lam``) and then through the cosine
    map into W. Symmetric entries accumulate from both row occurrences;
    diagonal cosines are constant and contribute nothing.
    """
    arr, norms = _checked_rows(W, "w_ranksim_loss")
    if arr.shape[0] != len(classes):
        raise DomainError(
            f"w_ranksim_loss: W has {arr.shape[0]} rows but class set has "
            f"{len(classes)} classes"
        )
    if not lam > 0.0:
        raise DomainError(f"w_ranksim_loss: lambda must be positive, got {lam}")
    S, _ = kernels.cosine_matrix_kernel(arr)
    targets = _label_rank_matrix(classes.values, policy)
    loss, grad_S = kernels.rank_mse_grad_kernel(S, targets, float(lam), policy.code)
    grad_W = kernels.cosine_chain_grad_kernel(arr, S, norms, grad_S)
    return float(loss), grad_W


def subsample_one_per_label(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One batch index per distinct label, drawn uniformly at random.

    Labels are visited in sorted order so the draw sequence is
    reproducible for a given generator state.
    """
    chosen = []
    for lab in np.unique(labels):
        idxs = np.flatnonzero(labels == lab)
        chosen.append(int(idxs[rng.integers(idxs.size)]))
    return np.array(chosen, dtype=np.int64)


def ranksim_loss(features, labels, policy: TiePolicy = TiePolicy.COMPETITION,
                 rng: np.random.Generator | None = None,
                 lam: float = DEFAULT_LAMBDA) -> tuple[float, np.ndarray]:
    """Batch-wise ranking-similarity loss on feature embeddings.

    Subsamples one index per distinct label, compares the cosine ranking
    of the subsampled features against their label-distance ranking, and
    returns gradients on the full feature batch (zero rows for indices not
    subsampled). Batches with fewer than two distinct labels are degenerate
    and contribute nothing.
    """
    Z = np.ascontiguousarray(features, dtype=np.float64)
    if Z.ndim != 2:
        Z = np.vstack([np.asarray(f, dtype=np.float64) for f in features])
    y = np.asarray(labels)
    if Z.shape[0] != y.shape[0]:
        raise DomainError(
            f"ranksim_loss: {Z.shape[0]} feature rows but {y.shape[0]} labels"
        )
    if Z.shape[0] < 2:
        raise DomainError("ranksim_loss: need at least 2 samples")
    if rng is None:
        raise DomainError("ranksim_loss: an explicit rng is required")
    if not lam > 0.0:
        raise DomainError(f"ranksim_loss: lambda must be positive, got {lam}")

    grads = np.zeros_like(Z)
    if np.unique(y).size < 2:
        logger.debug("ranksim_loss: degenerate batch (fewer than 2 distinct labels)")
        return 0.0, grads

    chosen = subsample_one_per_label(y, rng)
    # zero-norm embeddings carry no cosine geometry; drop them from the draw
    norms = np.linalg.norm(Z[chosen], axis=1)
    keep = norms > 0.0
    if not np.all(keep):
        logger.debug("ranksim_loss: dropping %d zero-norm embeddings",
                     int(np.sum(~keep)))
        chosen = chosen[keep]
    if chosen.size < 2:
        logger.debug("ranksim_loss: degenerate batch after zero-norm drop")
        return 0.0, grads

    sub = np.ascontiguousarray(Z[chosen])
    sub_labels = y[chosen].astype(np.float64)
    S, sub_norms = kernels.cosine_matrix_kernel(sub)
    targets = _label_rank_matrix(sub_labels, policy)
    loss, grad_S = kernels.rank_mse_grad_kernel(S, targets, float(lam), policy.code)
    grad_sub = kernels.cosine_chain_grad_kernel(sub, S, sub_norms, grad_S)
    grads[chosen] = grad_sub
    return float(loss), grads


def total_loss(main: float, wranksim: float, gamma: float) -> float:
    """Combined objective: main + gamma * regularizer."""
    return float(main) + float(gamma) * float(wranksim)
