#!/usr/bin/env python3
"""Convergence studies for both built-in cases, both methods, k = 2, 3, 4.

Reproduces the reference setup: n x n meshes for n = 4..32, uniform
h_E = 1/n, penalty 2k(k+1). Expect orders k in the broken H1 seminorm and
k+1 in L2, with sip and scsip errors close to each other. Writes one CSV
and one log-log data file per (case, method, k). Takes a minute or two.
"""

from polydg import emit_csv, emit_plotdata, run_convergence
from polydg.convergence import format_table

N_LIST = [4, 8, 16, 32]

for case in ("poisson-sin", "variable-a"):
    for method in ("sip", "scsip"):
        for k in (2, 3, 4):
            rows = run_convergence(case, method, k, N_LIST, he_mode="uniform")
            print(f"\n=== {case} / {method} / k={k} ===")
            print(format_table(rows))
            stem = f"{case}_{method}_k{k}"
            emit_csv(rows, f"{stem}.csv")
            emit_plotdata(rows, f"{stem}.dat")

print("\nwrote *.csv (sweep tables) and *.dat (log10 h vs log10 error).")
