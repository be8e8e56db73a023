"""Dense vector primitives: cosine geometry, stable softmax, seeded RNG.

All arithmetic is float64. Random state is always an explicit
``numpy.random.Generator`` created by :func:`seeded_rng`; there is no
global RNG anywhere in the package.
"""

import numpy as np

from .exceptions import DomainError

_SEED_MASK = (1 << 64) - 1


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D contiguous float64 array, rejecting anything else."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between ``u`` and ``v``, clamped into [-1, 1].

    Raises DomainError when either argument has zero norm.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0:
        raise DomainError("cosine_similarity: first argument 'u' has zero norm")
    if nv == 0.0:
        raise DomainError("cosine_similarity: second argument 'v' has zero norm")
    c = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, c))


def cosine_similarity_grad(u, v) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of cosine_similarity with respect to both arguments.

    grad_u = v/(|u||v|) - cos(u,v) * u/|u|^2, and symmetrically for v.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0:
        raise DomainError("cosine_similarity_grad: first argument 'u' has zero norm")
    if nv == 0.0:
        raise DomainError("cosine_similarity_grad: second argument 'v' has zero norm")
    c = float(np.dot(u, v)) / (nu * nv)
    grad_u = v / (nu * nv) - c * u / (nu * nu)
    grad_v = u / (nu * nv) - c * v / (nv * nv)
    return grad_u, grad_v


def softmax(logits) -> np.ndarray:
    """Probabilities from logits via the max-shift for overflow safety."""
    x = as_vector(logits, "logits")
    shifted = x - np.max(x)
    e = np.exp(shifted)
    return e / np.sum(e)


def log_softmax(logits) -> np.ndarray:
    """log(softmax(logits)) without intermediate overflow/underflow."""
    x = as_vector(logits, "logits")
    shifted = x - np.max(x)
    return shifted - np.log(np.sum(np.exp(shifted)))


def seeded_rng(seed: int) -> np.random.Generator:
    """Deterministic PCG64 generator from a 64-bit seed.

    Identical seeds yield identical streams; negative seeds are folded
    into the 64-bit range.
    """
    return np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))
