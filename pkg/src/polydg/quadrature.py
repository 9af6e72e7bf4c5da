"""Quadrature rules on the reference triangle and segment.

Triangle rules are built as collapsed tensor products of Gauss-Legendre
rules, which keeps every weight positive and gives exactness for any
requested total degree without hard-coded point tables. Segment rules are
plain Gauss-Legendre on [-1, 1].
"""

import functools
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_TRIANGLE_DEGREE = 10

# Reference elements: triangle {(0,0),(1,0),(0,1)} of measure 1/2,
# segment [-1,1] of measure 2.


@dataclass(frozen=True)
class QuadRule:
    """Points/weights on a reference element, exact up to ``exact_degree``."""

    points: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)


def _gauss01(npts):
    """Gauss-Legendre nodes/weights mapped from [-1,1] to [0,1]."""
    t, w = leggauss(npts)
    return (t + 1.0) / 2.0, w / 2.0


@functools.lru_cache(maxsize=None)
def triangle_rule(degree):
    """Rule on the reference triangle exact for total degree <= ``degree``.

    Degrees 0 and 1 use the one-point centroid rule. Higher degrees use a
    Duffy-collapsed product of one-dimensional Gauss rules; the direction
    carrying the (1-x) measure factor gets one extra order.
    """
    if degree < 0:
        raise ValueError(f"quadrature degree must be non-negative, got {degree}")
    if degree > MAX_TRIANGLE_DEGREE:
        raise ValueError(
            f"unsupported triangle quadrature degree {degree} "
            f"(max {MAX_TRIANGLE_DEGREE})"
        )
    if degree <= 1:
        points = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        weights = np.array([0.5])
        return QuadRule(points, weights, 1)

    nx = (degree + 3) // 2  # integrates x^degree * (1-x) exactly
    nu = (degree + 2) // 2
    x, wx = _gauss01(nx)
    u, wu = _gauss01(nu)
    X, U = np.meshgrid(x, u, indexing="ij")
    WX, WU = np.meshgrid(wx, wu, indexing="ij")
    points = np.column_stack([X.ravel(), (U * (1.0 - X)).ravel()])
    weights = (WX * WU * (1.0 - X)).ravel()
    return QuadRule(points, weights, degree)


@functools.lru_cache(maxsize=None)
def segment_rule(degree):
    """Gauss-Legendre rule on [-1, 1] exact for degree <= ``degree``."""
    if degree < 0:
        raise ValueError(f"quadrature degree must be non-negative, got {degree}")
    npts = degree // 2 + 1
    t, w = leggauss(npts)
    return QuadRule(t.reshape(-1, 1), w, 2 * npts - 1)


def map_triangle(rule, vertices):
    """Map a reference-triangle rule to physical points and weights.

    Returns (points (Q,2), weights (Q,)) with weights carrying the affine
    Jacobian; a degenerate triangle yields zero weights and a warning.
    """
    v = np.asarray(vertices, dtype=float)
    e1 = v[1] - v[0]
    e2 = v[2] - v[0]
    jac = e1[0] * e2[1] - e1[1] * e2[0]
    if jac == 0.0:
        warnings.warn("degenerate triangle in quadrature mapping", stacklevel=2)
        return np.zeros((len(rule.weights), 2)), np.zeros(len(rule.weights))
    pts = v[0] + np.outer(rule.points[:, 0], e1) + np.outer(rule.points[:, 1], e2)
    return pts, rule.weights * abs(jac)


def map_segment(rule, endpoints):
    """Map a reference-segment rule to a physical edge."""
    a, b = np.asarray(endpoints, dtype=float)
    length = float(np.hypot(*(b - a)))
    if length == 0.0:
        warnings.warn("degenerate edge in quadrature mapping", stacklevel=2)
        return np.zeros((len(rule.weights), 2)), np.zeros(len(rule.weights))
    mid = (a + b) / 2.0
    half = (b - a) / 2.0
    pts = mid + np.outer(rule.points[:, 0], half)
    return pts, rule.weights * (length / 2.0)


def integrate(f, region, rule):
    """Integrate ``f(x, y)`` over a physical triangle or edge.

    ``region`` is a (3,2) array of triangle vertices or a (2,2) array of
    edge endpoints; ``f`` must accept coordinate arrays.
    """
    region = np.asarray(region, dtype=float)
    if region.shape == (3, 2):
        pts, w = map_triangle(rule, region)
    elif region.shape == (2, 2):
        pts, w = map_segment(rule, region)
    else:
        raise ValueError(f"region must have shape (3,2) or (2,2), got {region.shape}")
    if not np.any(w):
        return 0.0
    return float(w @ np.broadcast_to(f(pts[:, 0], pts[:, 1]), w.shape))
