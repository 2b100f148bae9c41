"""Quick invariant suite behind ``bellqft verify``.

Every check returns ``(name, ok, detail)``; none of them takes more than a
few seconds.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .correlators import (
    Dressing,
    chsh_correlator,
    cluster_quantity,
    party_word,
    reduce_vacuum_expectation,
    table_from_matrix,
    two_op_correlator,
)
from .kernel import hadamard, pauli_jordan
from .quad import Backend, BilinearCache, QuadSettings, h_form, pj_form
from .specfun import bessel_j0, bessel_k0, bessel_y0
from .testfn import left_diamond, right_diamond, third_diamond

__all__ = ["run_checks"]


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def check_bessel():
    x = np.geomspace(1e-6, 80.0, 97)
    # J0 and Y0 have zeros, so compare against max(1, |ref|)
    err = max(
        float(np.max(np.abs(bessel_j0(x) - special.j0(x)))),
        float(np.max(np.abs(bessel_y0(x) - special.y0(x)) / np.maximum(1.0, np.abs(special.y0(x))))),
        _rel(bessel_k0(x), special.k0(x)),
    )
    return "bessel", err < 1e-12, f"max deviation from scipy.special {err:.2e}"


def check_kernel_symmetry():
    rng = np.random.default_rng(7)
    dt, dx = rng.normal(size=(2, 200)) * 3.0
    m = 0.7
    odd = float(np.max(np.abs(pauli_jordan(dt, dx, m) + pauli_jordan(-dt, dx, m))))
    even = float(np.max(np.abs(hadamard(dt, dx, m) - hadamard(-dt, -dx, m))))
    space = np.abs(dx) > np.abs(dt)
    zero = bool(np.all(pauli_jordan(dt[space], dx[space], m) == 0.0))
    ok = odd == 0.0 and even == 0.0 and zero
    return "kernel_symmetry", ok, f"odd {odd:.1e}, even {even:.1e}, spacelike zero {zero}"


def check_reducer():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        v = rng.normal(size=(2, 3))
        gram = v.T @ v
        t = table_from_matrix(["f", "g"], gram[:2, :2] * 0.5 + np.diag([0.1, 0.1]))
        word = party_word(["f", "g"], Dressing.ALTERNATING)
        worst = max(worst, abs(reduce_vacuum_expectation(word, t) - two_op_correlator(t, "f", "g")))
    return "reducer", worst < 1e-12, f"max |reducer - closed form| {worst:.1e}"


def check_trivial_limits():
    t = table_from_matrix(["f", "f'", "g", "g'"], np.zeros((4, 4)))
    v = chsh_correlator(t).value
    return "zero_amplitude_chsh", v == 2.0, f"<C> = {v!r}"


def check_cluster_identity():
    t = table_from_matrix(["f", "h"], np.array([[0.4, 0.05], [0.05, 0.3]]), m=0.5)
    r = cluster_quantity(t, m=0.5, d=1.0)
    gap = abs(r.extras["connected"] - r.extras["connected_closed_form"])
    return "cluster_identity", gap < 1e-12, f"|reducer - closed form| {gap:.1e}"


def check_bilinears(cache=None):
    m = 0.5
    f = right_diamond(1.0, 0.3, 1.0)
    g = left_diamond(1.0, 0.4, 0.8)
    h = third_diamond(1.0, 0.5, 1.2, 0.5)
    det = QuadSettings(points_per_axis=16)
    hfg = h_form(f, g, m, det, cache)
    hgf = h_form(g, f, m, det, cache)
    pj = pj_form(f, h, m, det, cache)
    qmc = h_form(f, g, m, QuadSettings(Backend.QMC, sample_count=1 << 15), cache)
    sym = abs(hfg.value - hgf.value)
    cross = abs(hfg.value - qmc.value)
    tol = 5.0 * (qmc.error_estimate + hfg.error_estimate) + 1e-6
    ok = sym < 1e-12 and pj.value == 0.0 and cross <= tol
    return ("bilinears", ok,
            f"H symmetry {sym:.1e}, spacelike PJ {pj.value!r}, deterministic vs qmc {cross:.1e} (tol {tol:.1e})")


def run_checks(cache: BilinearCache | None = None) -> list:
    out = [check_bessel(), check_kernel_symmetry(), check_reducer(), check_trivial_limits(),
           check_cluster_identity(), check_bilinears(cache)]
    return out
