"""Assembly of the interior-penalty forms on agglomerated meshes.

Cell integrals run over each cell's background triangles and facet
integrals over the facet's background edges, so only triangle and segment
rules are ever needed. The volume rule has degree 2k+2 and edge
integration uses k+2 Gauss points (degree 2k+3): enough to keep the
quadrature error far below the discretization error for smooth data.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import basis
from .basis import BasisSpec, dim
from .errors import MeshTopologyError
from .quadrature import segment_rule, triangle_rule


@dataclass
class BlockSystem:
    """Symmetric block-sparse matrix plus right-hand side.

    ``blocks[(l, m)]`` is the dense (b x b) coupling between the bases of
    cells l and m; the sparsity pattern is symmetric by construction.
    """

    n_blocks: int
    block_dim: int
    blocks: dict
    rhs: np.ndarray

    @property
    def global_size(self):
        return self.n_blocks * self.block_dim

    def to_csr(self):
        b = self.block_dim
        nnz = len(self.blocks) * b * b
        data = np.empty(nnz)
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        i, j = np.divmod(np.arange(b * b), b)
        for pos, ((l, m), block) in enumerate(sorted(self.blocks.items())):
            sl = slice(pos * b * b, (pos + 1) * b * b)
            data[sl] = block.ravel()
            rows[sl] = l * b + i
            cols[sl] = m * b + j
        mat = scipy.sparse.coo_matrix(
            (data, (rows, cols)), shape=(self.global_size, self.global_size)
        )
        return mat.tocsr()

    def symmetry_defect(self):
        """Worst blockwise relative asymmetry ||A^(lm) - A^(ml)^T|| / ||A^(lm)||."""
        worst = 0.0
        for (l, m), block in self.blocks.items():
            if (m, l) not in self.blocks:
                return np.inf
            ref = np.linalg.norm(block)
            if ref == 0.0:
                continue
            defect = np.linalg.norm(block - self.blocks[(m, l)].T) / ref
            worst = max(worst, defect)
        return worst


@dataclass
class DGSolution:
    """Cellwise polynomial field: coefficients in each cell's shifted basis."""

    degree: int
    shifts: np.ndarray   # (N_e, 2)
    coeffs: np.ndarray   # (N_e, N_k)

    @classmethod
    def from_vector(cls, degree, shifts, vec):
        return cls(degree, shifts, np.asarray(vec, dtype=float).reshape(len(shifts), -1))

    def cell_spec(self, l):
        return BasisSpec(self.degree, tuple(self.shifts[l]))

    def values_on(self, l, x, y):
        return basis.values(self.cell_spec(l), x, y) @ self.coeffs[l]

    def gradients_on(self, l, x, y):
        return np.einsum("qia,i->qa", basis.gradients(self.cell_spec(l), x, y), self.coeffs[l])


@dataclass
class ConstraintBlock:
    """Per-cell constraint matrices B^(l) (N_{k-2} x N_k) and moment
    vectors of the source against the lower-degree basis."""

    B: np.ndarray       # (N_e, N_{k-2}, N_k)
    F_psi: np.ndarray   # (N_e, N_{k-2})


# ---------------------------------------------------------------------------
# quadrature helpers


def cell_quadrature(poly, l, rule):
    """Mapped rule over all background triangles of cell ``l``."""
    v = poly.tri.vertices[poly.tri.triangles[poly.cells[l]]]  # (Tc, 3, 2)
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    r = rule.points
    pts = (
        v[:, None, 0, :]
        + r[None, :, 0, None] * e1[:, None, :]
        + r[None, :, 1, None] * e2[:, None, :]
    )
    w = jac[:, None] * rule.weights[None, :]
    return pts.reshape(-1, 2), w.ravel()


def facet_quadrature(poly, facet, rule):
    """Mapped rule over all background edges of a facet.

    Returns points (Q,2), weights (Q,) and per-point unit normals (Q,2)
    oriented from the facet's first cell to its second (outward on the
    boundary).
    """
    a = poly.tri.vertices[facet.edges[:, 0]]
    b = poly.tri.vertices[facet.edges[:, 1]]
    mid = (a + b) / 2.0
    half = (b - a) / 2.0
    pts = mid[:, None, :] + rule.points[None, :, 0, None] * half[:, None, :]
    w = (facet.lengths / 2.0)[:, None] * rule.weights[None, :]
    q = len(rule.weights)
    normals = np.repeat(facet.normals, q, axis=0)
    return pts.reshape(-1, 2), w.ravel(), normals


def _cell_specs(poly, k):
    return [BasisSpec(k, tuple(poly.seeds[l])) for l in range(poly.n_cells)]


def _require_topology(poly):
    if poly.facets is None:
        raise MeshTopologyError("facet topology not built; call build_topology first")


# ---------------------------------------------------------------------------
# SIP form


def assemble_sip(poly, k, gamma, problem):
    """Assemble the symmetric interior-penalty system.

    Per cell: the diffusion volume term. Per facet: the two consistency
    terms -int({A grad u . n}[v] + {A grad v . n}[u]) and the penalty
    (gamma/h_E) int [u][v], with the jump taken first-cell-minus-second and
    the mean flux averaging both sides. Boundary facets use the one-sided
    convention [v] = v, {A grad v . n} = A grad v . n, and the load picks
    up int g (gamma v / h_E - A grad v . n).
    """
    if k < 2:
        raise ValueError(f"polynomial degree must be >= 2, got {k}")
    if gamma <= 0:
        raise ValueError(f"penalty parameter must be positive, got {gamma}")
    _require_topology(poly)

    nk = dim(k)
    vol_rule = triangle_rule(2 * k + 2)
    edge_rule = segment_rule(2 * k + 3)
    specs = _cell_specs(poly, k)
    blocks = {}
    rhs = np.zeros((poly.n_cells, nk))

    def add(l, m, mat):
        key = (l, m)
        if key in blocks:
            blocks[key] += mat
        else:
            blocks[key] = np.array(mat)

    for l in range(poly.n_cells):
        pts, w = cell_quadrature(poly, l, vol_rule)
        x, y = pts[:, 0], pts[:, 1]
        G = basis.gradients(specs[l], x, y)
        A = problem.A.matrix(x, y)
        AG = np.einsum("qab,qjb->qja", A, G)
        add(l, l, np.einsum("qia,qja->ij", G * w[:, None, None], AG))
        V = basis.values(specs[l], x, y)
        rhs[l] += (w * problem.f(x, y)) @ V

    for facet in poly.facets:
        pts, w, nrm = facet_quadrature(poly, facet, edge_rule)
        x, y = pts[:, 0], pts[:, 1]
        A = problem.A.matrix(x, y)
        An = np.einsum("qab,qb->qa", A, nrm)
        scale = gamma / facet.h_E

        if facet.kind == "interior":
            l1, l2 = facet.cells
            sides = []
            for l, sign in ((l1, 1.0), (l2, -1.0)):
                V = basis.values(specs[l], x, y)
                G = basis.gradients(specs[l], x, y)
                flux = 0.5 * np.einsum("qa,qia->qi", An, G)
                sides.append((l, sign, V, flux))
            for lv, sv, Vv, fluxv in sides:
                for lu, su, Vu, fluxu in sides:
                    wVv = w[:, None] * Vv
                    mat = -(sv * (wVv.T @ fluxu) + su * ((w[:, None] * fluxv).T @ Vu))
                    mat += (scale * sv * su) * (wVv.T @ Vu)
                    add(lv, lu, mat)
        else:
            (l,) = facet.cells
            V = basis.values(specs[l], x, y)
            G = basis.gradients(specs[l], x, y)
            flux = np.einsum("qa,qia->qi", An, G)
            wV = w[:, None] * V
            mat = -(wV.T @ flux + (w[:, None] * flux).T @ V) + scale * (wV.T @ V)
            add(l, l, mat)
            gv = w * problem.g(x, y)
            rhs[l] += scale * (gv @ V) - gv @ flux

    return BlockSystem(poly.n_cells, nk, blocks, rhs)


# ---------------------------------------------------------------------------
# cellwise constraints


def assemble_constraints(poly, k, problem):
    """Per-cell matrices of q -> int q Lu over the degree-(k-2) test basis,
    evaluated through integration by parts (volume term plus the flux over
    the whole cell boundary), and the matching source moments."""
    if k < 2:
        raise ValueError(f"polynomial degree must be >= 2, got {k}")
    _require_topology(poly)

    nk, nkm2 = dim(k), dim(k - 2)
    vol_rule = triangle_rule(2 * k + 2)
    edge_rule = segment_rule(2 * k + 3)
    B = np.zeros((poly.n_cells, nkm2, nk))
    F_psi = np.zeros((poly.n_cells, nkm2))

    for l in range(poly.n_cells):
        phi = BasisSpec(k, tuple(poly.seeds[l]))
        psi = BasisSpec(k - 2, tuple(poly.seeds[l]))
        pts, w = cell_quadrature(poly, l, vol_rule)
        x, y = pts[:, 0], pts[:, 1]
        Gphi = basis.gradients(phi, x, y)
        Gpsi = basis.gradients(psi, x, y)
        A = problem.A.matrix(x, y)
        AGphi = np.einsum("qab,qjb->qja", A, Gphi)
        B[l] = np.einsum("qia,qja->ij", Gpsi * w[:, None, None], AGphi)
        F_psi[l] = (w * problem.f(x, y)) @ basis.values(psi, x, y)

        for fi in poly.cell_facets[l]:
            facet = poly.facets[fi]
            pts, w_e, nrm = facet_quadrature(poly, facet, edge_rule)
            if facet.cells[0] != l:
                nrm = -nrm  # stored normals point away from the first cell
            x, y = pts[:, 0], pts[:, 1]
            A = problem.A.matrix(x, y)
            An = np.einsum("qab,qb->qa", A, nrm)
            flux = np.einsum("qa,qia->qi", An, basis.gradients(phi, x, y))
            Vpsi = basis.values(psi, x, y)
            B[l] -= (w_e[:, None] * Vpsi).T @ flux

    return ConstraintBlock(B, F_psi)


# ---------------------------------------------------------------------------
# norms


def error_norms(sol, exact, poly):
    """(L2, broken H1) errors of a DG solution against an exact pair."""
    rule = triangle_rule(2 * sol.degree + 2)
    l2 = 0.0
    h1 = 0.0
    for l in range(poly.n_cells):
        pts, w = cell_quadrature(poly, l, rule)
        x, y = pts[:, 0], pts[:, 1]
        du = sol.values_on(l, x, y) - exact.u(x, y)
        dg = sol.gradients_on(l, x, y) - exact.grad(x, y)
        l2 += float(w @ du**2)
        h1 += float(w @ np.einsum("qa,qa->q", dg, dg))
    return np.sqrt(l2), np.sqrt(h1)


def triple_norm(sol, poly):
    """Coercivity norm: broken H1 seminorm plus 1/h_T-weighted squared
    jumps over each cell boundary (the trace itself on the domain
    boundary)."""
    _require_topology(poly)
    vol_rule = triangle_rule(2 * sol.degree + 2)
    edge_rule = segment_rule(2 * sol.degree + 3)
    total = 0.0
    for l in range(poly.n_cells):
        pts, w = cell_quadrature(poly, l, vol_rule)
        g = sol.gradients_on(l, pts[:, 0], pts[:, 1])
        total += float(w @ np.einsum("qa,qa->q", g, g))
    for facet in poly.facets:
        pts, w, _ = facet_quadrature(poly, facet, edge_rule)
        x, y = pts[:, 0], pts[:, 1]
        if facet.kind == "interior":
            l1, l2 = facet.cells
            jump = sol.values_on(l1, x, y) - sol.values_on(l2, x, y)
            weight = 1.0 / poly.h_T[l1] + 1.0 / poly.h_T[l2]
        else:
            (l1,) = facet.cells
            jump = sol.values_on(l1, x, y)
            weight = 1.0 / poly.h_T[l1]
        total += weight * float(w @ jump**2)
    return float(np.sqrt(total))
