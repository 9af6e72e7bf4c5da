"""PDE data: diffusion matrix, source, Dirichlet data, optional exact solution.

The governing equation is -div(A grad u) = f on the unit square with
u = g on the boundary; A is a symmetric positive definite 2x2 field.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .expressions import parse_expr


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric 2x2 coefficient matrix field; entries are vectorized callables."""

    a11: Callable
    a12: Callable
    a22: Callable

    def matrix(self, x, y):
        """Matrix values at points; shape (Q, 2, 2)."""
        x = np.asarray(x, dtype=float)
        shape = x.shape
        out = np.empty(shape + (2, 2))
        out[..., 0, 0] = np.broadcast_to(self.a11(x, y), shape)
        out[..., 0, 1] = np.broadcast_to(self.a12(x, y), shape)
        out[..., 1, 0] = out[..., 0, 1]
        out[..., 1, 1] = np.broadcast_to(self.a22(x, y), shape)
        return out

    def eigen_bounds(self, x, y):
        """(min, max) eigenvalue over the sampled points (closed form, 2x2)."""
        m = self.matrix(x, y)
        tr = m[..., 0, 0] + m[..., 1, 1]
        disc = np.sqrt((m[..., 0, 0] - m[..., 1, 1]) ** 2 + 4.0 * m[..., 0, 1] ** 2)
        return float(np.min((tr - disc) / 2.0)), float(np.max((tr + disc) / 2.0))

    def check_positive_definite(self, x, y):
        alpha, beta = self.eigen_bounds(x, y)
        if alpha <= 0.0:
            raise ConfigError(f"coefficient matrix not positive definite (min eigenvalue {alpha:g})")
        return alpha, beta

    def gradient_bound(self, x, y, step=1e-6):
        """Diagnostic bound on max |grad A_ij| over the sampled points, by
        central differences (smoothness indicator for the coefficients)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        worst = 0.0
        for entry in (self.a11, self.a12, self.a22):
            gx = (entry(x + step, y) - entry(x - step, y)) / (2.0 * step)
            gy = (entry(x, y + step) - entry(x, y - step)) / (2.0 * step)
            worst = max(worst, float(np.max(np.hypot(gx, gy))))
        return worst


@dataclass(frozen=True)
class ExactSolution:
    u: Callable
    ux: Callable
    uy: Callable

    def grad(self, x, y):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        out = np.empty(shape + (2,))
        out[..., 0] = np.broadcast_to(self.ux(x, y), shape)
        out[..., 1] = np.broadcast_to(self.uy(x, y), shape)
        return out


@dataclass(frozen=True)
class ProblemSpec:
    """Full problem data set; immutable and shareable."""

    A: CoefficientField
    f: Callable
    g: Callable
    exact: Optional[ExactSolution] = None
    name: str = "custom"

    def divergence_residual(self, points, step=1e-5):
        """Max |(-div(A grad u))(x) - f(x)| over sample points, by central differences.

        Only available when an exact solution is attached; serves as the
        self-consistency oracle for manufactured data.
        """
        if self.exact is None:
            raise ValueError("no exact solution attached")
        pts = np.asarray(points, dtype=float)
        x, y = pts[:, 0], pts[:, 1]

        def flux(xx, yy):
            m = self.A.matrix(xx, yy)
            g = self.exact.grad(xx, yy)
            return np.einsum("qab,qb->qa", m, g)

        dq1 = (flux(x + step, y)[:, 0] - flux(x - step, y)[:, 0]) / (2.0 * step)
        dq2 = (flux(x, y + step)[:, 1] - flux(x, y - step)[:, 1]) / (2.0 * step)
        return float(np.max(np.abs(-(dq1 + dq2) - self.f(x, y))))


def _const(value):
    return lambda x, y: np.full_like(np.asarray(x, dtype=float), value)


def builtin_case(name):
    """Built-in manufactured problems: ``poisson-sin`` and ``variable-a``."""
    if name == "poisson-sin":
        pi = np.pi
        u = lambda x, y: np.sin(pi * x) * np.sin(pi * y)
        return ProblemSpec(
            A=CoefficientField(_const(1.0), _const(0.0), _const(1.0)),
            f=lambda x, y: 2.0 * pi**2 * np.sin(pi * x) * np.sin(pi * y),
            g=_const(0.0),
            exact=ExactSolution(
                u=u,
                ux=lambda x, y: pi * np.cos(pi * x) * np.sin(pi * y),
                uy=lambda x, y: pi * np.sin(pi * x) * np.cos(pi * y),
            ),
            name=name,
        )
    if name == "variable-a":
        # u = e^{xy}; f = -div(A grad u) expanded by product/chain rule.
        u = lambda x, y: np.exp(x * y)

        def f(x, y):
            poly = (
                x + y + x**2 + y**2 + 4.0 * x * y
                + x * y**2 + x**2 * y + 2.0 * x**2 * y**2
            )
            return -np.exp(x * y) * poly

        return ProblemSpec(
            A=CoefficientField(
                a11=lambda x, y: 1.0 + x,
                a12=lambda x, y: x * y,
                a22=lambda x, y: 1.0 + y,
            ),
            f=f,
            g=u,
            exact=ExactSolution(
                u=u,
                ux=lambda x, y: y * np.exp(x * y),
                uy=lambda x, y: x * np.exp(x * y),
            ),
            name=name,
        )
    raise ConfigError(f"unknown built-in case {name!r} (expected poisson-sin or variable-a)")


_FIELD_KEYS = ("A11", "A12", "A22", "f", "g")
_EXACT_KEYS = ("u", "ux", "uy")


def from_expressions(fields, name="custom"):
    """Build a ProblemSpec from a mapping of expression strings.

    Required keys: A11, A22, f, g. Optional: A12 (default 0) and the exact
    triple u, ux, uy (all three or none).
    """
    missing = [k for k in ("A11", "A22", "f", "g") if k not in fields]
    if missing:
        raise ConfigError(f"missing problem field(s): {', '.join(missing)}")
    unknown = set(fields) - set(_FIELD_KEYS) - set(_EXACT_KEYS) - {"case"}
    if unknown:
        raise ConfigError(f"unknown problem field(s): {', '.join(sorted(unknown))}")

    def compiled(key, default=None):
        if key not in fields:
            return default
        return parse_expr(str(fields[key]))

    exact = None
    present = [k for k in _EXACT_KEYS if k in fields]
    if present:
        if len(present) != 3:
            raise ConfigError("exact solution requires all of u, ux, uy")
        exact = ExactSolution(u=compiled("u"), ux=compiled("ux"), uy=compiled("uy"))

    return ProblemSpec(
        A=CoefficientField(
            a11=compiled("A11"),
            a12=compiled("A12", parse_expr("0")),
            a22=compiled("A22"),
        ),
        f=compiled("f"),
        g=compiled("g"),
        exact=exact,
        name=name,
    )


def load_problem(path):
    """Read a problem from a JSON or TOML config file.

    The file holds either ``case = "<builtin name>"`` or the expression
    fields understood by :func:`from_expressions`.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a table/object, got {type(data).__name__}")
    if "case" in data:
        extra = set(data) - {"case"}
        if extra:
            raise ConfigError(f"'case' cannot be combined with {', '.join(sorted(extra))}")
        return builtin_case(data["case"])
    return from_expressions(data, name=path.stem)
