#!/usr/bin/env python3
"""Three ways to evaluate a smeared bilinear, and why the default is deterministic.

The deterministic backend reduces the four-dimensional integral to a
radial sum of one-dimensional kernel integrals; the sampling backends
integrate the full four-dimensional form with scrambled Sobol points or a
counter-based Philox stream. All three should agree within their error
estimates. The sampling ones cost far more points for the same accuracy.

Run: python3 demos/quadrature_backends.py
"""

import time

from bellqft.quad import Backend, QuadSettings, h_form
from bellqft.testfn import left_diamond, right_diamond

f = right_diamond(1.0, 0.3, 1.0)
g = left_diamond(1.0, 0.4, 0.8)

for m in (1e-6, 0.1, 1.0):
    print(f"H(f, g) at m = {m:g}")
    runs = [QuadSettings(points_per_axis=n) for n in (8, 16, 24, 48)]
    runs += [QuadSettings(b, sample_count=n) for b in (Backend.QMC, Backend.MC_ORACLE) for n in (1 << 16, 1 << 20)]
    for s in runs:
        t0 = time.perf_counter()
        r = h_form(f, g, m, s)
        size = f"ppa={s.points_per_axis}" if s.backend is Backend.DETERMINISTIC else f"n=2^{s.sample_count.bit_length() - 1}"
        print(f"  {s.backend.value:13s} {size:9s} {r.value:.10f} +- {r.error_estimate:.1e}"
              f"  ({r.evaluation_count} kernel calls, {time.perf_counter() - t0:.2f}s)")
