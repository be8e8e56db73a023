"""Rank functions, the permutation oracle, and the surrogate gradient."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wranksim.exceptions import DomainError
from wranksim.ranking import (
    MAX_BRUTEFORCE_N,
    TiePolicy,
    blackbox_rank_grad,
    rank,
    rank_bruteforce,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)
vectors = st.lists(finite_floats, min_size=1, max_size=12).map(np.array)


class TestTiePolicy:
    def test_from_name(self):
        assert TiePolicy.from_name("competition") is TiePolicy.COMPETITION
        assert TiePolicy.from_name("PERMUTATION") is TiePolicy.PERMUTATION

    def test_unknown_name_lists_allowed(self):
        with pytest.raises(DomainError, match="competition, permutation"):
            TiePolicy.from_name("dense")


class TestCompetitionRank:
    def test_distinct(self):
        np.testing.assert_array_equal(rank([3.0, 1.0, 2.0]), [1, 3, 2])

    def test_descending_convention(self):
        np.testing.assert_array_equal(rank([10.0, 20.0, 30.0]), [3, 2, 1])

    def test_ties_share_rank(self):
        np.testing.assert_array_equal(rank([1.0, 2.0, 1.0]), [2, 1, 2])

    def test_all_equal(self):
        np.testing.assert_array_equal(rank([5.0, 5.0, 5.0]), [1, 1, 1])

    def test_label_similarity_middle_row(self):
        # the middle row of a 3-class negative-distance matrix
        np.testing.assert_array_equal(rank([-1.0, 0.0, -1.0]), [2, 1, 2])

    def test_single_element(self):
        np.testing.assert_array_equal(rank([7.0]), [1])

    @given(vectors)
    @settings(max_examples=200, deadline=None)
    def test_definition_one_plus_greater_count(self, a):
        r = rank(a, TiePolicy.COMPETITION)
        expected = [1 + int(np.sum(a > x)) for x in a]
        np.testing.assert_array_equal(r, expected)


class TestPermutationRank:
    def test_distinct_matches_competition(self):
        a = np.array([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(rank(a, TiePolicy.PERMUTATION),
                                      rank(a, TiePolicy.COMPETITION))

    def test_ties_broken_by_index(self):
        np.testing.assert_array_equal(
            rank([1.0, 2.0, 1.0], TiePolicy.PERMUTATION), [2, 1, 3])

    def test_all_equal_gives_identity(self):
        np.testing.assert_array_equal(
            rank([5.0, 5.0, 5.0], TiePolicy.PERMUTATION), [1, 2, 3])

    @given(vectors)
    @settings(max_examples=200, deadline=None)
    def test_always_a_permutation(self, a):
        r = rank(a, TiePolicy.PERMUTATION)
        np.testing.assert_array_equal(np.sort(r), np.arange(1, a.size + 1))

    @given(vectors)
    @settings(max_examples=200, deadline=None)
    def test_refines_competition(self, a):
        # permutation ranks agree with competition ranks except on ties,
        # where they enumerate the shared block
        comp = rank(a, TiePolicy.COMPETITION)
        perm = rank(a, TiePolicy.PERMUTATION)
        assert np.all(perm >= comp)
        order = np.argsort(perm)
        np.testing.assert_array_equal(np.sort(a)[::-1], a[order])


class TestRankBruteforce:
    def test_small_example(self):
        np.testing.assert_array_equal(rank_bruteforce([3.0, 1.0, 2.0]), [1, 3, 2])

    def test_matches_permutation_rank_on_distinct(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            n = int(rng.integers(2, 7))
            a = rng.uniform(-10, 10, size=n)
            if np.unique(a).size < n:
                continue
            np.testing.assert_array_equal(rank_bruteforce(a),
                                          rank(a, TiePolicy.PERMUTATION))

    def test_ties_pick_lexicographically_smallest(self):
        # a = [1, 1]: both [1,2] and [2,1] give a.pi = 3; [1,2] is smaller
        np.testing.assert_array_equal(rank_bruteforce([1.0, 1.0]), [1, 2])

    def test_size_limit(self):
        with pytest.raises(DomainError, match=str(MAX_BRUTEFORCE_N)):
            rank_bruteforce(np.arange(MAX_BRUTEFORCE_N + 1, dtype=float))


class TestRankValidation:
    def test_empty_rejected(self):
        with pytest.raises(DomainError, match="empty"):
            rank(np.array([]))

    def test_nan_rejected(self):
        with pytest.raises(DomainError, match="non-finite"):
            rank([1.0, np.nan])

    def test_inf_rejected(self):
        with pytest.raises(DomainError, match="non-finite"):
            rank_bruteforce([np.inf, 0.0])


class TestBlackboxRankGrad:
    def test_zero_upstream_gives_zero(self):
        a = np.array([3.0, 1.0, 2.0])
        g = blackbox_rank_grad(a, np.zeros(3), 2.0)
        np.testing.assert_array_equal(g, np.zeros(3))

    def test_no_rank_change_gives_zero(self):
        # perturbation too small to cross any boundary
        a = np.array([10.0, 0.0, -10.0])
        g = blackbox_rank_grad(a, np.array([0.1, -0.1, 0.1]), 1.0)
        np.testing.assert_array_equal(g, np.zeros(3))

    def test_worked_swap_case(self):
        g = blackbox_rank_grad(np.array([1.0, 0.0]), np.array([-1.0, 1.0]), 2.0)
        np.testing.assert_array_equal(g, [0.5, -0.5])

    def test_difference_quotient_structure(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            a = rng.normal(size=n)
            up = rng.normal(size=n)
            lam = float(rng.uniform(0.5, 4.0))
            for policy in TiePolicy:
                g = blackbox_rank_grad(a, up, lam, policy)
                expected = -(rank(a, policy) - rank(a + lam * up, policy)) / lam
                np.testing.assert_array_equal(g, expected)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError, match="shape"):
            blackbox_rank_grad([1.0, 2.0], [1.0], 2.0)

    def test_nonpositive_lambda(self):
        with pytest.raises(DomainError, match="positive"):
            blackbox_rank_grad([1.0, 2.0], [1.0, 0.0], 0.0)
