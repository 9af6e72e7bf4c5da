"""Dense kernels for the small per-cell problems.

Everything here operates on matrices of a few dozen rows at most, so plain
LAPACK-backed dense routines are used throughout.
"""

import numpy as np
import scipy.linalg

from .errors import RankDeficiencyError


def solve_saddle_dense(B, rhs_u, rhs_c):
    """Solve the saddle-point system  u + B^T p = rhs_u,  B u = rhs_c.

    Parameters
    ----------
    B : ndarray
        (m x n) constraint matrix with m < n and full row rank.
    rhs_u : ndarray or scalar 0
        Length-n right-hand side of the first block row.
    rhs_c : ndarray
        Length-m right-hand side of the constraint row.

    Returns
    -------
    u : ndarray
        Length-n primal solution. With ``rhs_u = 0`` this is the
        minimum-Euclidean-norm solution of ``B u = rhs_c``.
    p : ndarray
        Length-m multiplier.

    Raises
    ------
    RankDeficiencyError
        If the Gram matrix ``B B^T`` is not positive definite.
    """
    B = np.asarray(B, dtype=float)
    m, n = B.shape
    rhs_u = np.zeros(n) if np.isscalar(rhs_u) and rhs_u == 0 else np.asarray(rhs_u, dtype=float)
    rhs_c = np.asarray(rhs_c, dtype=float)

    gram = B @ B.T
    try:
        factor = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficiencyError("constraint Gram matrix is singular") from exc
    p = scipy.linalg.cho_solve(factor, B @ rhs_u - rhs_c)
    u = rhs_u - B.T @ p
    return u, p


def mgs_orthonormalize(vectors, drop_tol=1e-10, max_vectors=None):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Candidates whose residual after projection is below ``drop_tol`` times
    the largest norm seen so far are discarded as linearly dependent.

    Parameters
    ----------
    vectors : iterable of ndarray
        Candidate vectors, consumed in order.
    drop_tol : float
        Relative dependence threshold.
    max_vectors : int, optional
        Stop as soon as this many orthonormal vectors have been kept.

    Returns
    -------
    ndarray
        Matrix whose columns are the retained orthonormal vectors
        (shape (n, kept); kept may be 0).
    """
    kept = []
    scale = 0.0
    dimension = 0
    for v in vectors:
        if max_vectors is not None and len(kept) >= max_vectors:
            break
        w = np.array(v, dtype=float)
        dimension = w.size
        scale = max(scale, float(np.linalg.norm(w)))
        for _ in range(2):  # second pass re-orthogonalizes
            for q in kept:
                w -= (q @ w) * q
        norm = float(np.linalg.norm(w))
        if norm <= drop_tol * scale or norm == 0.0:
            continue
        kept.append(w / norm)
    if not kept:
        return np.zeros((dimension, 0))
    return np.column_stack(kept)


def rank_svd(M, rel_tol=1e-10):
    """Numerical rank: count of singular values above ``rel_tol * s_max``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))
