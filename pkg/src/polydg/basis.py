"""Shifted-monomial bases for the per-cell polynomial spaces.

Basis i is ``(x - shift_x)^{i1} (y - shift_y)^{i2}`` with the multi-indexes
enumerated i1-major: (0,0), (0,1), ..., (0,k), (1,0), ..., (k,0).
"""

import functools
from dataclasses import dataclass

import numpy as np


def dim(k):
    """Dimension of the bivariate polynomial space of total degree <= k."""
    if k < 0:
        return 0
    return (k + 1) * (k + 2) // 2


@functools.lru_cache(maxsize=None)
def multi_indices(k):
    """Exponent pairs (i1, i2) in the fixed enumeration order."""
    return tuple((i1, i2) for i1 in range(k + 1) for i2 in range(k + 1 - i1))


@dataclass(frozen=True)
class BasisSpec:
    degree: int
    shift: tuple

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"basis degree must be non-negative, got {self.degree}")
        object.__setattr__(self, "shift", (float(self.shift[0]), float(self.shift[1])))

    @property
    def size(self):
        return dim(self.degree)


def _shifted_powers(coords, shift, k):
    """Powers (dx)^p for p = 0..k; shape (Q, k+1)."""
    dx = np.asarray(coords, dtype=float) - shift
    out = np.ones(dx.shape + (k + 1,))
    for p in range(1, k + 1):
        out[..., p] = out[..., p - 1] * dx
    return out


def _exponent_arrays(k):
    idx = multi_indices(k)
    i1 = np.array([a for a, _ in idx])
    i2 = np.array([b for _, b in idx])
    return i1, i2


def values(spec, x, y):
    """Basis values at points; shape (Q, N)."""
    k = spec.degree
    i1, i2 = _exponent_arrays(k)
    px = _shifted_powers(x, spec.shift[0], k)
    py = _shifted_powers(y, spec.shift[1], k)
    return px[..., i1] * py[..., i2]


def gradients(spec, x, y):
    """Basis gradients at points; shape (Q, N, 2)."""
    k = spec.degree
    i1, i2 = _exponent_arrays(k)
    px = _shifted_powers(x, spec.shift[0], k)
    py = _shifted_powers(y, spec.shift[1], k)
    gx = i1 * px[..., np.maximum(i1 - 1, 0)] * py[..., i2]
    gy = i2 * px[..., i1] * py[..., np.maximum(i2 - 1, 0)]
    return np.stack([gx, gy], axis=-1)


def hessians(spec, x, y):
    """Basis Hessians at points; shape (Q, N, 2, 2)."""
    k = spec.degree
    i1, i2 = _exponent_arrays(k)
    px = _shifted_powers(x, spec.shift[0], k)
    py = _shifted_powers(y, spec.shift[1], k)
    hxx = i1 * (i1 - 1) * px[..., np.maximum(i1 - 2, 0)] * py[..., i2]
    hxy = i1 * i2 * px[..., np.maximum(i1 - 1, 0)] * py[..., np.maximum(i2 - 1, 0)]
    hyy = i2 * (i2 - 1) * px[..., i1] * py[..., np.maximum(i2 - 2, 0)]
    row0 = np.stack([hxx, hxy], axis=-1)
    row1 = np.stack([hxy, hyy], axis=-1)
    return np.stack([row0, row1], axis=-2)


def eval_basis(spec, point, up_to="value"):
    """Evaluate the basis at one or more points.

    Returns values, (values, gradients) or (values, gradients, hessians)
    depending on ``up_to`` in {"value", "gradient", "hessian"}.
    """
    point = np.atleast_2d(np.asarray(point, dtype=float))
    x, y = point[:, 0], point[:, 1]
    if up_to == "value":
        return values(spec, x, y)
    if up_to == "gradient":
        return values(spec, x, y), gradients(spec, x, y)
    if up_to == "hessian":
        return values(spec, x, y), gradients(spec, x, y), hessians(spec, x, y)
    raise ValueError(f"up_to must be value|gradient|hessian, got {up_to!r}")
