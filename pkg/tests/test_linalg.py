import numpy as np
import pytest

from polydg.errors import RankDeficiencyError
from polydg.linalg import mgs_orthonormalize, rank_svd, solve_saddle_dense


class TestSolveSaddleDense:
    def test_hand_solved_two_unknowns(self):
        u, p = solve_saddle_dense(np.array([[1.0, 0.0]]), 0, np.array([3.0]))
        np.testing.assert_allclose(u, [3.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(p, [-3.0], atol=1e-14)

    def test_zero_rhs_gives_zero(self):
        B = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
        u, p = solve_saddle_dense(B, 0, np.zeros(2))
        assert np.all(u == 0.0) and np.all(p == 0.0)

    def test_orthonormal_rows_give_bt_rhs(self):
        B = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        rhs_c = np.array([2.0, -5.0])
        u, _ = solve_saddle_dense(B, 0, rhs_c)
        np.testing.assert_allclose(u, B.T @ rhs_c, atol=1e-14)

    @pytest.mark.parametrize("m,n", [(1, 3), (3, 6), (6, 10), (10, 15)])
    def test_matches_dense_kkt_oracle(self, m, n):
        rng = np.random.default_rng(m * 100 + n)
        B = rng.standard_normal((m, n))
        rhs_u = rng.standard_normal(n)
        rhs_c = rng.standard_normal(m)
        u, p = solve_saddle_dense(B, rhs_u, rhs_c)

        kkt = np.block([[np.eye(n), B.T], [B, np.zeros((m, m))]])
        ref = np.linalg.solve(kkt, np.concatenate([rhs_u, rhs_c]))
        np.testing.assert_allclose(u, ref[:n], rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(p, ref[n:], rtol=1e-12, atol=1e-12)
        # both block equations hold
        scale = max(np.linalg.norm(rhs_u), np.linalg.norm(rhs_c), 1.0)
        assert np.linalg.norm(u + B.T @ p - rhs_u) <= 1e-12 * scale
        assert np.linalg.norm(B @ u - rhs_c) <= 1e-12 * scale

    def test_rank_deficient_raises(self):
        B = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        with pytest.raises(RankDeficiencyError):
            solve_saddle_dense(B, 0, np.ones(2))


class TestMgsOrthonormalize:
    def test_axis_vectors(self):
        M = mgs_orthonormalize([np.array([1.0, 0.0]), np.array([0.0, 2.0])])
        np.testing.assert_allclose(M, np.eye(2), atol=1e-15)

    def test_dependent_vector_dropped(self):
        M = mgs_orthonormalize([np.array([1.0, 0.0]), np.array([1.0, 1e-14])])
        assert M.shape == (2, 1)

    def test_gram_identity(self):
        rng = np.random.default_rng(7)
        vecs = rng.standard_normal((8, 12))
        M = mgs_orthonormalize(vecs)
        assert M.shape == (12, 8)
        np.testing.assert_allclose(M.T @ M, np.eye(8), atol=1e-12)

    def test_early_stop(self):
        rng = np.random.default_rng(8)
        M = mgs_orthonormalize(rng.standard_normal((6, 6)), max_vectors=3)
        assert M.shape == (6, 3)

    def test_zero_vector_dropped(self):
        M = mgs_orthonormalize([np.zeros(3), np.array([0.0, 1.0, 0.0])])
        assert M.shape == (3, 1)


class TestRankSvd:
    def test_identity(self):
        assert rank_svd(np.eye(3)) == 3

    def test_zero(self):
        assert rank_svd(np.zeros((4, 2))) == 0

    def test_rank_one(self):
        assert rank_svd(np.array([[1.0, 1.0], [1.0, 1.0]])) == 1

    def test_near_dependence_threshold(self):
        M = np.array([[1.0, 0.0], [0.0, 1e-12]])
        assert rank_svd(M, rel_tol=1e-10) == 1
        assert rank_svd(M, rel_tol=1e-14) == 2
