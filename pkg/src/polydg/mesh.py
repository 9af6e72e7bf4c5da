"""Polygonal meshes built by agglomerating a background triangulation.

The pipeline is: ``generate_background`` (structured criss-cross grid on
the unit square) -> ``agglomerate`` (grow n x n cells from seed points by
round-robin BFS) -> ``build_topology`` (facets between cell pairs, length
scales) -> optional ``quality_report`` (shape-regularity audit).
"""

import functools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import MeshTopologyError

_GEOM_TOL = 1e-12


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


# ---------------------------------------------------------------------------
# background triangulation


@dataclass
class TriMesh:
    """Background triangulation. Treated as immutable after construction."""

    vertices: np.ndarray       # (V, 2) float
    triangles: np.ndarray      # (T, 3) int, counterclockwise
    boundary_edges: np.ndarray  # (B, 2) int

    def triangle_areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    def edge_incidence(self):
        """Map sorted vertex pair -> list of incident triangle indices."""
        inc = {}
        for t, tri in enumerate(self.triangles):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(a), int(b)) if a < b else (int(b), int(a))
                inc.setdefault(key, []).append(t)
        return inc

    def neighbors(self):
        """Per-triangle list of edge-adjacent triangle indices."""
        nbrs = [[] for _ in range(len(self.triangles))]
        for tris in self.edge_incidence().values():
            if len(tris) == 2:
                a, b = tris
                nbrs[a].append(b)
                nbrs[b].append(a)
        return [sorted(n) for n in nbrs]

    def validate(self):
        areas = self.triangle_areas()
        if np.any(areas <= 0):
            bad = int(np.argmin(areas))
            raise MeshTopologyError(f"triangle {bad} has non-positive area {areas[bad]:g}")
        boundary = {tuple(sorted(map(int, e))) for e in self.boundary_edges}
        for key, tris in self.edge_incidence().items():
            if len(tris) == 1 and key not in boundary:
                raise MeshTopologyError(f"edge {key} is on the hull but not listed as boundary")
            if len(tris) == 2 and key in boundary:
                raise MeshTopologyError(f"interior edge {key} listed as boundary")
            if len(tris) > 2:
                raise MeshTopologyError(f"edge {key} shared by {len(tris)} triangles")
        total = float(np.sum(areas))
        if abs(total - 1.0) > 1e-12:
            raise MeshTopologyError(f"triangle areas sum to {total!r}, expected 1 (unit square)")
        return self


def generate_background(n):
    """Structured triangulation of (0,1)^2: a (4n x 4n) grid of squares,
    each split along its up-right diagonal; (4n+1)^2 vertices, 2(4n)^2
    triangles."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    m = 4 * n
    coords = np.linspace(0.0, 1.0, m + 1)
    X, Y = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (m + 1) + i

    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    ii, jj = ii.ravel(), jj.ravel()
    a = vid(ii, jj)
    b = vid(ii + 1, jj)
    c = vid(ii + 1, jj + 1)
    d = vid(ii, jj + 1)
    lower = np.column_stack([a, b, c])
    upper = np.column_stack([a, c, d])
    triangles = np.empty((2 * m * m, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    r = np.arange(m)
    boundary_edges = np.concatenate([
        np.column_stack([vid(r, 0), vid(r + 1, 0)]),
        np.column_stack([vid(m, r), vid(m, r + 1)]),
        np.column_stack([vid(m - r, m), vid(m - r - 1, m)]),
        np.column_stack([vid(0, m - r), vid(0, m - r - 1)]),
    ]).astype(np.int64)
    return TriMesh(vertices, triangles, boundary_edges)


# ---------------------------------------------------------------------------
# agglomeration


@dataclass
class Facet:
    """One interface: a chain of background edges between two cells, or
    between a cell and the domain boundary. Normals point from cells[0]
    toward cells[1] (outward for boundary facets)."""

    kind: str                  # "interior" | "boundary"
    cells: tuple
    edges: np.ndarray          # (E, 2) vertex indices
    normals: np.ndarray        # (E, 2) unit normals
    lengths: np.ndarray        # (E,)
    h_E: float = 0.0


@dataclass
class PolyMesh:
    """Agglomerated polygonal mesh over a background triangulation."""

    tri: TriMesh
    cells: list                     # per-cell sorted triangle-index arrays
    seeds: np.ndarray               # (N_e, 2) basis shift points
    cell_of_triangle: np.ndarray    # (T,)
    h_T: np.ndarray                 # (N_e,) cell diameters
    grid_n: Optional[int] = None    # n for n x n agglomerations of the unit square
    he_mode: Optional[str] = None
    facets: Optional[list] = None
    cell_facets: Optional[list] = field(default=None, repr=False)

    @property
    def n_cells(self):
        return len(self.cells)

    def cell_vertices(self, l):
        """Coordinates of the distinct background vertices of cell ``l``."""
        vids = np.unique(self.tri.triangles[self.cells[l]])
        return self.tri.vertices[vids]

    def boundary_lengths(self):
        """|dT| per cell, from facet edge lengths (topology required)."""
        if self.facets is None:
            raise MeshTopologyError("facet topology not built")
        out = np.zeros(self.n_cells)
        for f in self.facets:
            total = float(np.sum(f.lengths))
            for c in f.cells:
                out[c] += total
        return out


def _containing_triangle(tri, point, boxes=None):
    """Lowest-index triangle containing ``point`` (closed triangles), or -1.

    ``boxes`` is the optional (lo, hi) bounding-box pair used to prefilter
    candidates; it only prunes, so the lowest-index tie-break is kept.
    """
    if boxes is None:
        candidates = np.arange(len(tri.triangles))
    else:
        lo, hi = boxes
        candidates = np.flatnonzero(np.all(point >= lo, axis=1) & np.all(point <= hi, axis=1))
        if candidates.size == 0:
            return -1
    p = tri.vertices[tri.triangles[candidates]]
    d0 = _cross2(p[:, 1] - p[:, 0], point - p[:, 0])
    d1 = _cross2(p[:, 2] - p[:, 1], point - p[:, 1])
    d2 = _cross2(p[:, 0] - p[:, 2], point - p[:, 2])
    mask = (d0 >= -_GEOM_TOL) & (d1 >= -_GEOM_TOL) & (d2 >= -_GEOM_TOL)
    if not mask.any():
        return -1
    return int(candidates[np.argmax(mask)])


def _diameter(points):
    """(max pairwise distance, midpoint of a farthest pair)."""
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    flat = int(np.argmax(d2))
    i, j = divmod(flat, len(points))
    return float(np.sqrt(d2[i, j])), (points[i] + points[j]) / 2.0


def agglomerate(tri, n):
    """Group the triangles of ``tri`` into n x n cells.

    The triangle containing seed ``O = ((i-1/2)/n, (j-1/2)/n)`` starts cell
    ``(i-1) + (j-1) n``; remaining triangles are attached ring by ring,
    visiting cells in ascending index (so ties go to the lower cell) and
    frontier triangles in ascending index.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n_cells = n * n
    seeds = np.empty((n_cells, 2))
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            seeds[(i - 1) + (j - 1) * n] = ((i - 0.5) / n, (j - 0.5) / n)

    n_tri = len(tri.triangles)
    corners = tri.vertices[tri.triangles]
    boxes = (corners.min(axis=1) - _GEOM_TOL, corners.max(axis=1) + _GEOM_TOL)
    cell_of = np.full(n_tri, -1, dtype=np.int64)
    frontier = []
    for m, seed in enumerate(seeds):
        t = _containing_triangle(tri, seed, boxes)  # lowest index wins ties
        if t < 0:
            raise MeshTopologyError(f"seed {m} at {tuple(seed)} lies outside the mesh")
        if cell_of[t] != -1:
            raise MeshTopologyError(f"seeds {cell_of[t]} and {m} share triangle {t}")
        cell_of[t] = m
        frontier.append([t])

    nbrs = tri.neighbors()
    unassigned = n_tri - n_cells
    while unassigned > 0:
        attached = 0
        for m in range(n_cells):
            ring = []
            for t in frontier[m]:
                for nb in nbrs[t]:
                    if cell_of[nb] == -1:
                        cell_of[nb] = m
                        ring.append(nb)
            frontier[m] = sorted(ring)
            attached += len(ring)
        if attached == 0:
            raise MeshTopologyError(f"{unassigned} triangle(s) unreachable from any seed")
        unassigned -= attached

    cells = [np.flatnonzero(cell_of == m) for m in range(n_cells)]
    h_T = np.empty(n_cells)
    poly = PolyMesh(tri, cells, seeds, cell_of, h_T, grid_n=n)
    for m in range(n_cells):
        h_T[m], _ = _diameter(poly.cell_vertices(m))
    return poly


# ---------------------------------------------------------------------------
# facet topology


def _outward_normal(tri, t, a, b):
    """Unit normal of edge (a, b) pointing out of triangle ``t``."""
    verts = tri.triangles[t]
    other = [v for v in verts if v != a and v != b][0]
    pa, pb, po = tri.vertices[a], tri.vertices[b], tri.vertices[other]
    e = pb - pa
    nrm = np.array([e[1], -e[0]])
    if np.dot(nrm, po - pa) > 0:
        nrm = -nrm
    return nrm / np.linalg.norm(nrm)


def build_topology(poly, he_mode="facet"):
    """Return a copy of ``poly`` with facets and h_E populated.

    ``he_mode="facet"`` sets h_E to the harmonic-type mean
    2 (1/h_T1 + 1/h_T2)^{-1} on interior facets and h_T on boundary ones;
    ``he_mode="uniform"`` sets h_E = 1/n everywhere (agglomerated meshes
    only).
    """
    if he_mode not in ("facet", "uniform"):
        raise ValueError(f"he_mode must be 'facet' or 'uniform', got {he_mode!r}")
    if he_mode == "uniform" and poly.grid_n is None:
        raise ValueError("uniform h_E requires an n x n agglomerated mesh")

    tri = poly.tri
    cell_of = poly.cell_of_triangle
    interior = {}
    boundary = {}
    for (a, b), tris in sorted(tri.edge_incidence().items()):
        if len(tris) == 2:
            ta, tb = tris
            ca, cb = int(cell_of[ta]), int(cell_of[tb])
            if ca == cb:
                continue
            if ca < cb:
                entry = (a, b, _outward_normal(tri, ta, a, b))
                interior.setdefault((ca, cb), []).append(entry)
            else:
                entry = (a, b, _outward_normal(tri, tb, a, b))
                interior.setdefault((cb, ca), []).append(entry)
        else:
            t = tris[0]
            c = int(cell_of[t])
            boundary.setdefault(c, []).append((a, b, _outward_normal(tri, t, a, b)))

    def make_facet(kind, cells, entries, h_E):
        edges = np.array([(a, b) for a, b, _ in entries], dtype=np.int64)
        normals = np.array([n for _, _, n in entries])
        vecs = tri.vertices[edges[:, 1]] - tri.vertices[edges[:, 0]]
        lengths = np.hypot(vecs[:, 0], vecs[:, 1])
        if not np.sum(lengths) > 0.0:
            raise MeshTopologyError(f"facet {cells} has zero total length")
        return Facet(kind, cells, edges, normals, lengths, h_E)

    uniform_h = 1.0 / poly.grid_n if poly.grid_n else None
    facets = []
    for (c1, c2), entries in sorted(interior.items()):
        if he_mode == "uniform":
            h_E = uniform_h
        else:
            h_E = 2.0 / (1.0 / poly.h_T[c1] + 1.0 / poly.h_T[c2])
        facets.append(make_facet("interior", (c1, c2), entries, h_E))
    for c, entries in sorted(boundary.items()):
        h_E = uniform_h if he_mode == "uniform" else float(poly.h_T[c])
        facets.append(make_facet("boundary", (c,), entries, h_E))

    cell_facets = [[] for _ in range(poly.n_cells)]
    for fi, f in enumerate(facets):
        for c in f.cells:
            cell_facets[c].append(fi)
    return replace(poly, he_mode=he_mode, facets=facets, cell_facets=cell_facets)


# ---------------------------------------------------------------------------
# quality audit


@dataclass
class QualityReport:
    """Shape-regularity audit: rho1 = R_T/r_T (upper estimate, since r_T is
    the best triangle incircle, a lower bound on the true inscribed radius),
    rho2 = worst diameter ratio among cells with intersecting bounding
    balls, rho3 = |dT|/h_T."""

    rho1_max: float
    rho2_max: float
    rho3_max: float
    table: dict
    degenerate_cells: list

    def to_text(self):
        lines = [
            f"cells: {len(self.table['h_T'])}",
            f"rho1_max (R_T/r_T, upper estimate): {self.rho1_max:.4f}",
            f"rho2_max (adjacent h ratio):        {self.rho2_max:.4f}",
            f"rho3_max (|dT|/h_T):                {self.rho3_max:.4f}",
            "cell      h_T        R_T        r_T       rho1       rho3",
        ]
        for i in range(len(self.table["h_T"])):
            lines.append(
                f"{i:4d} {self.table['h_T'][i]:10.5f} {self.table['R_T'][i]:10.5f} "
                f"{self.table['r_T'][i]:10.5f} {self.table['rho1'][i]:10.4f} "
                f"{self.table['rho3'][i]:10.4f}"
            )
        if self.degenerate_cells:
            lines.append(f"degenerate cells: {self.degenerate_cells}")
        return "\n".join(lines)


def quality_report(poly):
    """Audit the mesh against the shape-regularity assumptions."""
    if poly.facets is None:
        raise MeshTopologyError("facet topology not built")
    n_cells = poly.n_cells
    areas = poly.tri.triangle_areas()
    perims = np.zeros(len(poly.tri.triangles))
    p = poly.tri.vertices[poly.tri.triangles]
    for i in range(3):
        e = p[:, (i + 1) % 3] - p[:, i]
        perims += np.hypot(e[:, 0], e[:, 1])
    incircle = 2.0 * areas / perims

    R_T = np.empty(n_cells)
    r_T = np.empty(n_cells)
    centers = np.empty((n_cells, 2))
    degenerate = []
    for m in range(n_cells):
        d, mid = _diameter(poly.cell_vertices(m))
        R_T[m] = d / 2.0
        centers[m] = mid
        r_T[m] = float(np.max(incircle[poly.cells[m]]))
        if r_T[m] <= 0.0:
            degenerate.append(m)
    with np.errstate(divide="ignore"):
        rho1 = np.where(r_T > 0, R_T / r_T, np.inf)

    # M2 scan over cell pairs whose (approximate) bounding balls intersect
    dist = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
    touching = dist <= (R_T[:, None] + R_T[None, :])
    ratio = poly.h_T[:, None] / poly.h_T[None, :]
    rho2 = float(np.max(np.where(touching, np.maximum(ratio, 1.0 / ratio), 1.0)))

    bnd = poly.boundary_lengths()
    rho3 = bnd / poly.h_T

    return QualityReport(
        rho1_max=float(np.max(rho1)),
        rho2_max=rho2,
        rho3_max=float(np.max(rho3)),
        table={"h_T": poly.h_T.copy(), "R_T": R_T, "r_T": r_T,
               "rho1": rho1, "boundary_len": bnd, "rho3": rho3},
        degenerate_cells=degenerate,
    )


# ---------------------------------------------------------------------------
# JSON interchange


def save_mesh_json(poly, path):
    """Write the mesh interchange format (vertices / triangles /
    cell_of_triangle, plus the optional seeds key so a round trip keeps the
    basis shift points)."""
    data = {
        "vertices": poly.tri.vertices.tolist(),
        "triangles": poly.tri.triangles.tolist(),
        "cell_of_triangle": poly.cell_of_triangle.tolist(),
        "seeds": poly.seeds.tolist(),
    }
    Path(path).write_text(json.dumps(data))


def load_mesh_json(path):
    """Read the mesh interchange format; topology is left to build_topology.

    Files without a seeds key get area-weighted cell centroids as basis
    shift points. ``grid_n`` is unknown for imported meshes, so the uniform
    h_E mode is unavailable for them.
    """
    data = json.loads(Path(path).read_text())
    for key in ("vertices", "triangles", "cell_of_triangle"):
        if key not in data:
            raise MeshTopologyError(f"mesh file missing key {key!r}")
    vertices = np.asarray(data["vertices"], dtype=float)
    triangles = np.asarray(data["triangles"], dtype=np.int64)
    cell_of = np.asarray(data["cell_of_triangle"], dtype=np.int64)
    if len(cell_of) != len(triangles):
        raise MeshTopologyError("cell_of_triangle length does not match triangle count")

    tmp = TriMesh(vertices, triangles, np.empty((0, 2), dtype=np.int64))
    boundary = [k for k, tris in tmp.edge_incidence().items() if len(tris) == 1]
    tri = TriMesh(vertices, triangles, np.array(sorted(boundary), dtype=np.int64))
    tri.validate()

    n_cells = int(cell_of.max()) + 1
    cells = [np.flatnonzero(cell_of == m) for m in range(n_cells)]
    if any(len(c) == 0 for c in cells):
        raise MeshTopologyError("empty cell in cell_of_triangle")

    if "seeds" in data:
        seeds = np.asarray(data["seeds"], dtype=float)
    else:
        areas = tri.triangle_areas()
        cents = vertices[triangles].mean(axis=1)
        seeds = np.array([
            np.average(cents[c], axis=0, weights=areas[c]) for c in cells
        ])

    h_T = np.empty(n_cells)
    poly = PolyMesh(tri, cells, seeds, cell_of, h_T, grid_n=None)
    for m in range(n_cells):
        h_T[m], _ = _diameter(poly.cell_vertices(m))
    return poly


@functools.lru_cache(maxsize=16)
def unit_square_poly_mesh(n, he_mode="facet"):
    """Cached full pipeline: background mesh, agglomeration, topology."""
    return build_topology(agglomerate(generate_background(n), n), he_mode=he_mode)
