"""Static condensation: per-cell particular solutions, cellwise kernel
bases, the reduced global system, and the reconstruction of the full
solution.

The cellwise work solves two families of small saddle-point systems built
on the constraint matrix B: one for a particular solution of B u = F_psi
(the minimum-norm representative), and one per canonical unit vector whose
orthonormalized kernel projections span the reduced trial space. With a
constant diffusion matrix the kernel does not depend on the cell, so a
single basis can be reused everywhere (``shared_basis``).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import BlockSystem, DGSolution
from .basis import dim
from .errors import RankDeficiencyError
from .linalg import mgs_orthonormalize, solve_saddle_dense


@dataclass
class LocalCondensation:
    """Per-cell particular solutions and orthonormal kernel bases."""

    degree: int
    shifts: np.ndarray       # (N_e, 2)
    particular: np.ndarray   # (N_e, N_k)
    multipliers: np.ndarray  # (N_e, N_{k-2})
    kernels: np.ndarray      # (N_e, N_k, N_k')
    shared_basis: bool = False

    @property
    def reduced_dim(self):
        return self.kernels.shape[2]


def local_particular_solution(B, f_psi):
    """Minimum-norm u with B u = f_psi, via the saddle system
    u + B^T p = 0, B u = f_psi. Returns (u, p)."""
    return solve_saddle_dense(B, 0, f_psi)


def kernel_basis(B, reuse_hint=None, drop_tol=1e-10):
    """Orthonormal basis of ker B as columns of an (N_k x N_k') matrix.

    Canonical unit vectors are projected onto the kernel one by one and fed
    to modified Gram-Schmidt, stopping once N_k' = N_k - N_{k-2} columns
    survive. ``reuse_hint`` short-circuits the construction with an already
    computed basis (constant-coefficient mode)."""
    if reuse_hint is not None:
        return reuse_hint
    B = np.asarray(B, dtype=float)
    m, n = B.shape
    target = n - m
    try:
        factor = scipy.linalg.cho_factor(B @ B.T)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficiencyError("constraint Gram matrix is singular") from exc
    projected = np.eye(n) - B.T @ scipy.linalg.cho_solve(factor, B)
    M = mgs_orthonormalize(projected.T, drop_tol=drop_tol, max_vectors=target)
    if M.shape[1] < target:
        raise RankDeficiencyError(
            f"kernel basis construction found {M.shape[1]} independent vectors, "
            f"expected {target}"
        )
    return M


def condense(poly, constraints, shared_basis=False, threads=1):
    """Run the per-cell condensation over the whole mesh."""
    n_cells = poly.n_cells
    k_dim = constraints.B.shape[2]
    degree = _degree_from_dim(k_dim)

    def one_cell(l):
        try:
            u, p = local_particular_solution(constraints.B[l], constraints.F_psi[l])
        except RankDeficiencyError as exc:
            raise RankDeficiencyError(f"cell {l}: {exc}") from exc
        return u, p

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            locals_ = list(pool.map(one_cell, range(n_cells)))
    else:
        locals_ = [one_cell(l) for l in range(n_cells)]

    particular = np.array([u for u, _ in locals_])
    multipliers = np.array([p for _, p in locals_])

    if shared_basis:
        first = kernel_basis(constraints.B[0])
        kernels = np.broadcast_to(first, (n_cells,) + first.shape).copy()
    else:
        def one_kernel(l):
            try:
                return kernel_basis(constraints.B[l])
            except RankDeficiencyError as exc:
                raise RankDeficiencyError(f"cell {l}: {exc}") from exc

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                kernels = np.array(list(pool.map(one_kernel, range(n_cells))))
        else:
            kernels = np.array([one_kernel(l) for l in range(n_cells)])

    return LocalCondensation(
        degree=degree,
        shifts=np.array(poly.seeds),
        particular=particular,
        multipliers=multipliers,
        kernels=kernels,
        shared_basis=shared_basis,
    )


def _degree_from_dim(n):
    k = 0
    while dim(k) < n:
        k += 1
    if dim(k) != n:
        raise ValueError(f"{n} is not a polynomial-space dimension")
    return k


def reduce_system(sys, cond):
    """Congruence-reduce a block system onto the kernel bases:
    A'^(lm) = M^(l)^T A^(lm) M^(m) and
    F'^(l) = M^(l)^T (F^(l) - sum_m A^(lm) u^(m))."""
    if sys.block_dim != cond.kernels.shape[1]:
        raise ValueError(
            f"block dimension {sys.block_dim} does not match "
            f"condensation basis size {cond.kernels.shape[1]}"
        )
    M = cond.kernels
    blocks = {}
    shift = np.array(sys.rhs)  # becomes F^(l) - sum_m A^(lm) u^(m)
    for (l, m), block in sys.blocks.items():
        blocks[(l, m)] = M[l].T @ block @ M[m]
        shift[l] -= block @ cond.particular[m]
    rhs = np.einsum("lik,li->lk", M, shift)
    return BlockSystem(sys.n_blocks, cond.reduced_dim, blocks, rhs)


def reconstruct(u_reduced, cond):
    """Full cellwise coefficients u^(l) + M^(l) U'^(l) from the reduced
    solution (flat vector or (N_e, N_k') array)."""
    u_reduced = np.asarray(u_reduced, dtype=float).reshape(len(cond.particular), -1)
    coeffs = cond.particular + np.einsum("lij,lj->li", cond.kernels, u_reduced)
    return DGSolution(cond.degree, cond.shifts, coeffs)
