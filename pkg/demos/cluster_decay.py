#!/usr/bin/env python3
"""Cluster property: connected correlations decay with separation.

For Alice's bump f and a bump h a gap d to the right, the connected
correlator <A_f C_h> - <A_f><C_h> is 4 exp(-(H_ff + H_hh)) (exp(-H_fh) - 1).
We tabulate it against d together with C = e^{-(H_ff + H_hh)} |1 - e^{-H_fh}| - e^{-m d}/4,
whose sign expresses the bound. H(f, h) itself falls off roughly like
exp(-m d) once d exceeds the bump size.

Run: python3 demos/cluster_decay.py
"""

from dataclasses import replace

from bellqft.quad import BilinearCache, QuadSettings
from bellqft.reference import CLUSTER_ROWS
from bellqft.search import evaluate_cluster

settings = QuadSettings()
cache = BilinearCache()

for row in CLUSTER_ROWS:
    ev = evaluate_cluster(row.params, settings, cache)
    print(f"{row.name}: C = {ev.value:+.6f} (table {row.value:+.6f})")
print()

base = CLUSTER_ROWS[0].params
print(f"m = {base.m}, R = {base.R}")
print(f"{'d':>6s} {'H(f,h)':>12s} {'connected':>12s} {'C':>10s}")
for d in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
    rep = evaluate_cluster(replace(base, d=d), settings, cache).report
    print(f"{d:6.1f} {rep.bilinears['H(f,h)']:12.4e} {rep.extras['connected']:12.4e} {rep.value:10.6f}")
