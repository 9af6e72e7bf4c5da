"""Linear solvers and the three end-to-end pipelines.

``run_sip`` solves the plain interior-penalty system, ``run_scsip`` the
statically condensed variant, and ``run_saddle_oracle`` the equivalent
monolithic saddle-point system whose unique solution the condensed
pipeline must reproduce.
"""

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import basis as basis_mod
from .assembly import (
    DGSolution,
    assemble_constraints,
    assemble_sip,
    cell_quadrature,
)
from .basis import BasisSpec, dim
from .condensation import condense, reconstruct, reduce_system
from .errors import NotPositiveDefiniteError
from .quadrature import triangle_rule

RESIDUAL_TOL = 1e-12
_MAX_REFINE = 10


@dataclass
class SolveReport:
    method: str
    unknowns: int
    residual: float
    wall_time: float
    solution: DGSolution
    multiplier_norm: Optional[float] = None


def default_gamma(k):
    """Penalty parameter 2k(k+1), the standard choice for degree k."""
    return 2.0 * k * (k + 1)


def symmetric_factor(matrix):
    """Diagonal-pivot LU of a symmetric sparse matrix; raises if any pivot
    is non-positive, which for a symmetric matrix certifies indefiniteness."""
    matrix = matrix.tocsc()
    try:
        lu = scipy.sparse.linalg.splu(
            matrix,
            diag_pivot_thresh=0.0,
            permc_spec="MMD_AT_PLUS_A",
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:  # exactly singular
        raise NotPositiveDefiniteError(f"symmetric factorization failed: {exc}") from exc
    if not np.array_equal(lu.perm_r, lu.perm_c):
        # row and column orders diverged: no congruence, pivot signs unusable
        raise NotPositiveDefiniteError("factorization abandoned diagonal pivoting")
    pivots = lu.U.diagonal()
    worst = float(pivots.min())
    if worst <= 0.0:
        raise NotPositiveDefiniteError(
            f"non-positive pivot {worst:g}: matrix is not positive definite "
            "(penalty parameter likely too small)"
        )
    return lu


def _refine(lu, matrix, rhs):
    """Direct solve plus iterative refinement down to RESIDUAL_TOL.

    The reported residual is the normwise backward error
    ||rhs - A x|| / (||A||_F ||x|| + ||rhs||); with the unscaled monomial
    bases the plain ||r||/||rhs|| ratio has a representation floor around
    eps * ||A|| ||x|| / ||rhs||, which refinement cannot cross.
    """
    x = lu.solve(rhs)
    if float(np.linalg.norm(rhs)) == 0.0:
        return np.zeros_like(rhs), 0.0
    anorm = scipy.sparse.linalg.norm(matrix)
    for _ in range(_MAX_REFINE):
        r = rhs - matrix @ x
        rel = float(np.linalg.norm(r)) / (
            anorm * float(np.linalg.norm(x)) + float(np.linalg.norm(rhs))
        )
        if rel <= RESIDUAL_TOL:
            return x, rel
        x = x + lu.solve(r)
    raise RuntimeError(f"iterative refinement stalled at relative residual {rel:g}")


def solve_spd(sys):
    """Solve a symmetric positive definite block system; flat solution vector."""
    matrix = sys.to_csr().tocsc()
    lu = symmetric_factor(matrix)
    x, _ = _refine(lu, matrix, sys.rhs.ravel())
    return x


def run_sip(poly, k, problem, gamma=None):
    """Assemble and solve the plain interior-penalty discretization."""
    start = time.perf_counter()
    gamma = default_gamma(k) if gamma is None else gamma
    sys = assemble_sip(poly, k, gamma, problem)
    matrix = sys.to_csr().tocsc()
    lu = symmetric_factor(matrix)
    x, rel = _refine(lu, matrix, sys.rhs.ravel())
    sol = DGSolution.from_vector(k, np.array(poly.seeds), x)
    return SolveReport("sip", sys.global_size, rel, time.perf_counter() - start, sol)


def run_scsip(poly, k, problem, gamma=None, shared_basis=False, threads=1):
    """Statically condensed pipeline: local particular solutions, kernel
    bases, reduced global solve, reconstruction."""
    start = time.perf_counter()
    gamma = default_gamma(k) if gamma is None else gamma
    sys = assemble_sip(poly, k, gamma, problem)
    constraints = assemble_constraints(poly, k, problem)
    cond = condense(poly, constraints, shared_basis=shared_basis, threads=threads)
    reduced = reduce_system(sys, cond)
    matrix = reduced.to_csr().tocsc()
    lu = symmetric_factor(matrix)
    x, rel = _refine(lu, matrix, reduced.rhs.ravel())
    sol = reconstruct(x, cond)
    return SolveReport("scsip", reduced.global_size, rel, time.perf_counter() - start, sol)


def run_saddle_oracle(poly, k, problem, gamma=None, weighted=True):
    """Monolithic saddle-point solve coupling the interior-penalty form
    with the cellwise constraints (rows scaled by h_T^2 when ``weighted``).

    Serves as the equivalence oracle for ``run_scsip``; the reported
    multiplier norm is the h_T-weighted L2 norm of the multiplier field.
    """
    start = time.perf_counter()
    gamma = default_gamma(k) if gamma is None else gamma
    sys = assemble_sip(poly, k, gamma, problem)
    constraints = assemble_constraints(poly, k, problem)

    n_cells = poly.n_cells
    nk, nkm2 = dim(k), dim(k - 2)
    n_u = n_cells * nk
    n_p = n_cells * nkm2
    size = n_u + n_p
    weights = poly.h_T**2 if weighted else np.ones(n_cells)

    rows, cols, data = [], [], []
    i, j = np.divmod(np.arange(nk * nk), nk)
    for (l, m), block in sys.blocks.items():
        rows.append(l * nk + i)
        cols.append(m * nk + j)
        data.append(block.ravel())
    i, j = np.divmod(np.arange(nkm2 * nk), nk)
    for l in range(n_cells):
        scaled = weights[l] * constraints.B[l]
        rows.append(n_u + l * nkm2 + i)
        cols.append(l * nk + j)
        data.append(scaled.ravel())
        rows.append(l * nk + j)
        cols.append(n_u + l * nkm2 + i)
        data.append(scaled.ravel())
    matrix = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsc()
    rhs = np.concatenate([sys.rhs.ravel(), (weights[:, None] * constraints.F_psi).ravel()])

    try:
        lu = scipy.sparse.linalg.splu(matrix)
    except RuntimeError as exc:
        # a singular saddle system signals a penalty or constraint-rank issue
        raise RuntimeError(f"saddle-point system is singular: {exc}") from exc
    x, rel = _refine(lu, matrix, rhs)

    sol = DGSolution.from_vector(k, np.array(poly.seeds), x[:n_u])
    p = x[n_u:].reshape(n_cells, nkm2)
    return SolveReport(
        "saddle",
        size,
        rel,
        time.perf_counter() - start,
        sol,
        multiplier_norm=multiplier_norm(p, poly, k),
    )


def multiplier_norm(p, poly, k):
    """||p||_h = (sum_T h_T^2 ||p||_{L2(T)}^2)^{1/2} for cellwise
    coefficients of the degree-(k-2) basis."""
    rule = triangle_rule(2 * k + 2)
    total = 0.0
    for l in range(poly.n_cells):
        spec = BasisSpec(k - 2, tuple(poly.seeds[l]))
        pts, w = cell_quadrature(poly, l, rule)
        vals = basis_mod.values(spec, pts[:, 0], pts[:, 1]) @ p[l]
        total += float(poly.h_T[l] ** 2 * (w @ vals**2))
    return float(np.sqrt(total))
