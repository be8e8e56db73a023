"""Vector primitives: cosine geometry, softmax stability, seeded RNG."""

import numpy as np
import pytest

from wranksim.exceptions import DomainError
from wranksim.numeric import (
    as_vector,
    cosine_similarity,
    cosine_similarity_grad,
    log_softmax,
    seeded_rng,
    softmax,
)


class TestAsVector:
    def test_accepts_lists(self):
        np.testing.assert_array_equal(as_vector([1, 2, 3]), [1.0, 2.0, 3.0])

    def test_rejects_matrix(self):
        with pytest.raises(DomainError, match="1-D"):
            as_vector(np.ones((2, 2)))

    def test_result_is_float64(self):
        assert as_vector([1, 2]).dtype == np.float64


class TestCosineSimilarity:
    def test_parallel(self):
        assert cosine_similarity([1.0, 0.0], [2.0, 0.0]) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 3.0]) == 0.0

    def test_antiparallel_axis_aligned(self):
        assert cosine_similarity([1.0, 0.0], [-2.0, 0.0]) == -1.0

    def test_antiparallel_diagonal(self):
        np.testing.assert_allclose(
            cosine_similarity([1.0, 1.0], [-2.0, -2.0]), -1.0, rtol=1e-15)

    def test_known_angle(self):
        ang = np.deg2rad(10.0)
        u = np.array([1.0, 0.0])
        v = np.array([np.cos(ang), np.sin(ang)])
        np.testing.assert_allclose(cosine_similarity(u, v), np.cos(ang), rtol=1e-15)

    def test_clamped_to_unit_interval(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            u = rng.normal(size=4) * 1e-3
            assert -1.0 <= cosine_similarity(u, 3.0 * u) <= 1.0

    def test_zero_norm_u_named(self):
        with pytest.raises(DomainError, match="'u'"):
            cosine_similarity([0.0, 0.0], [1.0, 0.0])

    def test_zero_norm_v_named(self):
        with pytest.raises(DomainError, match="'v'"):
            cosine_similarity([1.0, 0.0], [0.0, 0.0])


class TestCosineSimilarityGrad:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        h = 1e-6
        for _ in range(50):
            dim = int(rng.integers(2, 6))
            u = rng.normal(size=dim) + 0.1
            v = rng.normal(size=dim) + 0.1
            gu, gv = cosine_similarity_grad(u, v)
            for k in range(dim):
                up, um = u.copy(), u.copy()
                up[k] += h
                um[k] -= h
                num = (cosine_similarity(up, v) - cosine_similarity(um, v)) / (2 * h)
                np.testing.assert_allclose(gu[k], num, rtol=1e-5, atol=1e-8)
                vp, vm = v.copy(), v.copy()
                vp[k] += h
                vm[k] -= h
                num = (cosine_similarity(u, vp) - cosine_similarity(u, vm)) / (2 * h)
                np.testing.assert_allclose(gv[k], num, rtol=1e-5, atol=1e-8)

    def test_grad_orthogonal_to_own_argument(self):
        # cosine is scale-invariant, so the gradient has no radial component
        rng = np.random.default_rng(2)
        for _ in range(20):
            u = rng.normal(size=5)
            v = rng.normal(size=5)
            gu, gv = cosine_similarity_grad(u, v)
            assert abs(np.dot(gu, u)) < 1e-12
            assert abs(np.dot(gv, v)) < 1e-12

    def test_zero_norm_rejected(self):
        with pytest.raises(DomainError):
            cosine_similarity_grad([0.0, 0.0], [1.0, 2.0])


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(softmax(np.zeros(4)), np.full(4, 0.25))

    def test_sums_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = softmax(rng.normal(scale=50.0, size=6))
            np.testing.assert_allclose(p.sum(), 1.0, rtol=1e-12)
            assert np.all(p >= 0.0)

    def test_large_logits_do_not_overflow(self):
        p = softmax([1000.0, 0.0])
        np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-300)

    def test_log_softmax_consistent(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=7)
        np.testing.assert_allclose(log_softmax(x), np.log(softmax(x)), rtol=1e-12)

    def test_log_softmax_large_inputs(self):
        lp = log_softmax([1000.0, 0.0])
        np.testing.assert_allclose(lp[0], 0.0, atol=1e-300)
        np.testing.assert_allclose(lp[1], -1000.0)


class TestSeededRng:
    def test_same_seed_same_stream(self):
        a = seeded_rng(42).normal(size=10)
        b = seeded_rng(42).normal(size=10)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a = seeded_rng(1).normal(size=10)
        b = seeded_rng(2).normal(size=10)
        assert not np.array_equal(a, b)

    def test_negative_seed_folds_into_range(self):
        a = seeded_rng(-1).normal(size=4)
        b = seeded_rng((1 << 64) - 1).normal(size=4)
        np.testing.assert_array_equal(a, b)
