"""Rank functions, the brute-force permutation oracle, and the blackbox
surrogate gradient through ranking.

Ranking is descending: the largest entry gets rank 1. Two tie policies are
provided because tied entries either share a rank (COMPETITION) or are
forced into a permutation by a stable index tie-break (PERMUTATION); label
similarity rows always contain ties, so the distinction matters.
"""

import itertools
from enum import Enum

import numpy as np

from . import kernels
from .exceptions import DomainError
from .numeric import as_vector

MAX_BRUTEFORCE_N = 8


class TiePolicy(Enum):
    COMPETITION = "competition"
    PERMUTATION = "permutation"

    @property
    def code(self) -> int:
        return kernels.COMPETITION if self is TiePolicy.COMPETITION else kernels.PERMUTATION

    @classmethod
    def from_name(cls, name: str) -> "TiePolicy":
        try:
            return cls(name.lower())
        except ValueError:
            allowed = ", ".join(p.value for p in cls)
            raise DomainError(f"unknown tie policy {name!r}; allowed: {allowed}") from None


def _checked(a, op: str) -> np.ndarray:
    arr = as_vector(a, "a")
    if arr.size == 0:
        raise DomainError(f"{op}: input vector is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{op}: input contains non-finite entries")
    return arr


def rank(a, policy: TiePolicy = TiePolicy.COMPETITION) -> np.ndarray:
    """Descending ranks of ``a`` under the given tie policy.

    COMPETITION: rank_i = 1 + #{j : a_j > a_i} (ties share a rank).
    PERMUTATION: ties broken by ascending original index, so the result is
    always a permutation of {1..n}.
    """
    arr = _checked(a, "rank")
    return kernels.rank_kernel(arr, policy.code)


def rank_bruteforce(a) -> np.ndarray:
    """Rank by exhaustive minimization of a . pi over all permutations pi
    of {1..n}; among tied minimizers the lexicographically smallest pi wins.

    Test-only oracle: restricted to n <= MAX_BRUTEFORCE_N.
    """
    arr = _checked(a, "rank_bruteforce")
    n = arr.size
    if n > MAX_BRUTEFORCE_N:
        raise DomainError(
            f"rank_bruteforce: n={n} exceeds the factorial-enumeration limit "
            f"of {MAX_BRUTEFORCE_N}"
        )
    best_perm = None
    best_value = np.inf
    for perm in itertools.permutations(range(1, n + 1)):
        value = float(np.dot(arr, perm))
        if value < best_value:
            best_value = value
            best_perm = perm
    return np.array(best_perm, dtype=np.int64)


def blackbox_rank_grad(a, upstream, lam: float,
                       policy: TiePolicy = TiePolicy.COMPETITION) -> np.ndarray:
    """Surrogate gradient through the piecewise-constant rank function.

    Solves the ranking twice, once at ``a`` and once at the perturbed point
    a + lam * upstream, and returns -(rank(a) - rank(a_lam)) / lam. ``lam``
    trades faithfulness to the true (zero almost everywhere) derivative
    against informativeness.
    """
    arr = _checked(a, "blackbox_rank_grad")
    up = as_vector(upstream, "upstream")
    if up.shape != arr.shape:
        raise DomainError(
            f"blackbox_rank_grad: upstream shape {up.shape} != input shape {arr.shape}"
        )
    if not lam > 0.0:
        raise DomainError(f"blackbox_rank_grad: lambda must be positive, got {lam}")
    return kernels.blackbox_rank_grad_kernel(arr, up, float(lam), policy.code)
