"""Convergence sweeps over n x n agglomerated meshes, with CSV and
plot-data emission."""

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .assembly import error_norms
from .errors import ConfigError
from .mesh import unit_square_poly_mesh
from .problem import builtin_case
from .solve import run_saddle_oracle, run_scsip, run_sip

CSV_HEADER = "n,h,method,k,dofs,l2_error,h1_error,eoc_l2,eoc_h1"


@dataclass
class ConvergenceRow:
    n: int
    h: float
    method: str
    k: int
    dofs: int
    l2_error: float
    h1_error: float
    eoc_l2: Optional[float] = None
    eoc_h1: Optional[float] = None


def _eoc(err_prev, err, h_prev, h):
    return math.log(err_prev / err) / math.log(h_prev / h)


def run_convergence(case, method, k, n_list, gamma=None, he_mode="uniform",
                    shared_basis=False, threads=1):
    """One row per mesh size n (ascending); errors against the exact
    solution and experimental orders between consecutive rows."""
    if list(n_list) != sorted(set(n_list)):
        raise ConfigError(f"n_list must be strictly ascending, got {list(n_list)}")
    problem = builtin_case(case) if isinstance(case, str) else case
    if problem.exact is None:
        raise ConfigError("convergence study requires a problem with an exact solution")

    runners = {"sip": run_sip, "scsip": run_scsip, "saddle": run_saddle_oracle}
    if method not in runners:
        raise ConfigError(f"unknown method {method!r} (expected sip, scsip or saddle)")

    rows = []
    for n in n_list:
        poly = unit_square_poly_mesh(n, he_mode)
        kwargs = {"gamma": gamma}
        if method == "scsip":
            kwargs.update(shared_basis=shared_basis, threads=threads)
        report = runners[method](poly, k, problem, **kwargs)
        l2, h1 = error_norms(report.solution, problem.exact, poly)
        row = ConvergenceRow(n, 1.0 / n, method, k, report.unknowns, l2, h1)
        if rows:
            prev = rows[-1]
            row.eoc_l2 = _eoc(prev.l2_error, l2, prev.h, row.h)
            row.eoc_h1 = _eoc(prev.h1_error, h1, prev.h, row.h)
        rows.append(row)
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.16g}"
    return str(value)


def format_csv(rows):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in (
            r.n, r.h, r.method, r.k, r.dofs,
            r.l2_error, r.h1_error, r.eoc_l2, r.eoc_h1,
        )) + "\n")
    return buf.getvalue()


def emit_csv(rows, path):
    Path(path).write_text(format_csv(rows))


def parse_csv(source):
    """Inverse of emit_csv; accepts a path or CSV text."""
    text = source if "\n" in str(source) else Path(source).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER.split(","):
        raise ConfigError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(ConvergenceRow(
            n=int(rec["n"]),
            h=float(rec["h"]),
            method=rec["method"],
            k=int(rec["k"]),
            dofs=int(rec["dofs"]),
            l2_error=float(rec["l2_error"]),
            h1_error=float(rec["h1_error"]),
            eoc_l2=float(rec["eoc_l2"]) if rec["eoc_l2"] else None,
            eoc_h1=float(rec["eoc_h1"]) if rec["eoc_h1"] else None,
        ))
    return rows


def emit_plotdata(rows, path):
    """Whitespace-separated log10(h), log10(l2), log10(h1) columns."""
    lines = ["# log10_h log10_l2_error log10_h1_error"]
    for r in rows:
        lines.append(
            f"{math.log10(r.h):.16g} {math.log10(r.l2_error):.16g} "
            f"{math.log10(r.h1_error):.16g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def format_table(rows):
    """Human-readable sweep table for terminal output."""
    out = [f"{'n':>4} {'h':>10} {'dofs':>8} {'l2_error':>13} {'h1_error':>13} {'eoc_l2':>7} {'eoc_h1':>7}"]
    for r in rows:
        eoc_l2 = f"{r.eoc_l2:7.3f}" if r.eoc_l2 is not None else "      -"
        eoc_h1 = f"{r.eoc_h1:7.3f}" if r.eoc_h1 is not None else "      -"
        out.append(
            f"{r.n:>4} {r.h:>10.5f} {r.dofs:>8} {r.l2_error:>13.6e} "
            f"{r.h1_error:>13.6e} {eoc_l2} {eoc_h1}"
        )
    return "\n".join(out)
