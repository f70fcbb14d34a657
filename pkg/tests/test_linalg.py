import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from latlrr.linalg import (
    BlockPartition,
    ToleranceProfile,
    ZeroMatrixError,
    block_partition,
    is_block_compatible,
    is_idempotent,
    is_psd,
    nuclear_norm,
    numerical_rank,
    orthogonal_complement,
    pseudo_inverse,
    skinny_svd,
    spectral_norm,
)
from latlrr.problems import random_orthonormal

TOL = ToleranceProfile()

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
matrices = hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8), elements=finite)


class TestToleranceProfile:
    def test_defaults(self):
        assert TOL.to_dict() == {"rank_rel_tol": 1e-8, "eq_rel_tol": 1e-9, "psd_tol": 1e-10,
                                 "sigma_group_rel_tol": 1e-8}

    @pytest.mark.parametrize("bad", [0.0, -1e-3, 1.0, 2.0])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            ToleranceProfile(eq_rel_tol=bad)

    def test_rank_tol_above_eps(self):
        with pytest.raises(ValueError):
            ToleranceProfile(rank_rel_tol=1e-17)

    def test_uniform(self):
        assert set(ToleranceProfile.uniform(1e-4).to_dict().values()) == {1e-4}


class TestSkinnySvd:
    def test_rank_one_diagonal(self):
        s = skinny_svd(np.diag([3.0, 0.0]), TOL)
        np.testing.assert_allclose(s.U, [[1.0], [0.0]])
        np.testing.assert_allclose(s.sigma, [3.0])
        np.testing.assert_allclose(s.V, [[1.0], [0.0]])

    def test_zero_matrix(self):
        with pytest.raises(ZeroMatrixError):
            skinny_svd(np.zeros((3, 2)), TOL)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            skinny_svd(np.array([[np.nan]]), TOL)

    def test_sign_convention(self, rng):
        s = skinny_svd(rng.standard_normal((7, 4)), TOL)
        pivots = s.U[np.argmax(np.abs(s.U), axis=0), np.arange(s.rank)]
        assert np.all(pivots > 0)

    @settings(max_examples=60, deadline=None)
    @given(matrices)
    def test_invariants(self, X):
        if not np.any(X):
            return
        s = skinny_svd(X, TOL)
        np.testing.assert_allclose(s.U.T @ s.U, np.eye(s.rank), atol=1e-10)
        np.testing.assert_allclose(s.V.T @ s.V, np.eye(s.rank), atol=1e-10)
        assert np.all(np.diff(s.sigma) <= 0) and np.all(s.sigma > 0)
        # Discarded singular values are at most rank_rel_tol * sigma_max.
        assert np.linalg.norm(s.reconstruct() - X) <= 1e-7 * np.linalg.norm(X) * np.sqrt(min(X.shape))


class TestPseudoInverse:
    def test_diagonal(self):
        np.testing.assert_allclose(pseudo_inverse(np.diag([2.0, 0.0]), TOL), np.diag([0.5, 0.0]))

    def test_invertible(self, rng):
        X = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        np.testing.assert_allclose(pseudo_inverse(X, TOL), np.linalg.inv(X), rtol=1e-10, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(matrices)
    def test_penrose(self, X):
        sv = np.linalg.svd(X, compute_uv=False)
        assume(sv[0] > 1e-3)
        kept = sv[sv > TOL.rank_rel_tol * sv[0]]
        # Identities are only meaningful when the retained spectrum is well separated from the cutoff.
        assume(kept[-1] >= 1e-4 * sv[0] and np.all((sv <= TOL.rank_rel_tol * sv[0]) | (sv >= 1e-4 * sv[0])))
        P = pseudo_inverse(X, TOL)
        for lhs, rhs in [(X @ P @ X, X), (P @ X @ P, P), (X @ P, (X @ P).T), (P @ X, (P @ X).T)]:
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(rhs))


class TestRankAndNorms:
    def test_rank_cutoff(self):
        assert numerical_rank(np.diag([1.0, 1e-14]), TOL) == 1

    def test_rank_zero(self):
        assert numerical_rank(np.zeros((2, 3)), TOL) == 0

    def test_rank_scale_invariant(self, rng):
        X = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 5))
        assert numerical_rank(X, TOL) == numerical_rank(1e-12 * X, TOL) == numerical_rank(1e12 * X, TOL) == 3

    def test_nuclear_norm(self):
        assert nuclear_norm(np.diag([3.0, 4.0])) == pytest.approx(7.0)

    def test_spectral_norm(self):
        assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)

    @settings(max_examples=60, deadline=None)
    @given(hnp.arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)).map(lambda t: (t[0], t[0])),
                      elements=finite))
    def test_nuclear_dominates_trace(self, Y):
        assert nuclear_norm(Y) >= np.trace(Y) - 1e-10 * max(1.0, np.abs(Y).sum())


class TestPredicates:
    def test_idempotent_examples(self, rng):
        assert is_idempotent(np.diag([1.0, 0.0]), TOL)
        assert not is_idempotent(0.5 * np.eye(2), TOL)
        Q, d = random_orthonormal(5, 5, rng), np.exp(rng.uniform(0, 2, 5))
        P = (Q * d) @ random_orthonormal(5, 5, rng).T
        W = P @ np.diag([1, 1, 0, 0, 0.0]) @ np.linalg.inv(P)
        assert is_idempotent(W, TOL)

    def test_idempotent_non_square(self):
        with pytest.raises(ValueError):
            is_idempotent(np.ones((2, 3)), TOL)

    def test_psd_examples(self, rng):
        assert is_psd(np.diag([0.3, 0.7]), TOL)
        assert not is_psd(np.array([[0.0, 1.0], [0.0, 0.0]]), TOL)
        assert not is_psd(np.diag([1.0, -1e-3]), TOL)
        Q = random_orthonormal(6, 6, rng)
        assert is_psd((Q * rng.uniform(0, 1, 6)) @ Q.T, TOL)

    def test_psd_non_square(self):
        with pytest.raises(ValueError):
            is_psd(np.ones((3, 2)), TOL)


class TestBlockPartition:
    def test_repeated_leading(self):
        assert block_partition([5.0, 5.0, 2.0], TOL).sizes == [2, 1]

    def test_distinct(self):
        assert block_partition([3.0, 2.0, 1.0], TOL).sizes == [1, 1, 1]

    def test_near_equal(self):
        assert block_partition([1.0, 1.0 - 1e-12, 0.5], TOL).sizes == [2, 1]

    def test_transitive_chaining(self):
        tol = ToleranceProfile(sigma_group_rel_tol=0.15)
        assert block_partition([1.0, 0.9, 0.8, 0.3], tol).sizes == [3, 1]

    @pytest.mark.parametrize("bad", [[], [1.0, 2.0], [1.0, 0.0], [1.0, -1.0]])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            block_partition(bad, TOL)

    def test_zero_based_half_open(self):
        part = BlockPartition.from_sizes([2, 1])
        assert part.groups == ((0, 2), (2, 3)) and part.size == 3
        assert part.to_dict() == {"groups": [[0, 2], [2, 3]]}

    def test_rejects_gaps(self):
        with pytest.raises(ValueError):
            BlockPartition(((0, 2), (3, 4)))

    def test_compatibility(self):
        part = BlockPartition.from_sizes([1, 1])
        assert is_block_compatible(np.diag([0.2, 0.9]), part, TOL)
        assert not is_block_compatible(np.ones((2, 2)), part, TOL)
        assert is_block_compatible(np.ones((2, 2)), BlockPartition.from_sizes([2]), TOL)

    def test_compatibility_size_mismatch(self):
        with pytest.raises(ValueError):
            is_block_compatible(np.eye(3), BlockPartition.from_sizes([1, 1]), TOL)


def test_orthogonal_complement(rng):
    Q = random_orthonormal(6, 2, rng)
    C = orthogonal_complement(Q)
    assert C.shape == (6, 4)
    np.testing.assert_allclose(Q.T @ C, 0, atol=1e-12)
    np.testing.assert_allclose(C.T @ C, np.eye(4), atol=1e-12)
    assert orthogonal_complement(random_orthonormal(3, 3, rng)).shape == (3, 0)
