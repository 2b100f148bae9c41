import logging

import numpy as np
import pytest

from bellqft.kernel import SingularPointError, hadamard_from_interval
from bellqft.quad import (
    THREADS_ENV,
    Backend,
    BilinearCache,
    BilinearResult,
    QuadSettings,
    bilinear,
    diamond_area,
    h_form,
    lightcone_box,
    pj_form,
    worker_count,
)
from bellqft.testfn import DiamondBump, left_diamond, right_diamond, third_diamond
from cases import BILINEAR_SUITE

F = right_diamond(1.0, 0.3, 1.0)
G = left_diamond(1.0, 0.4, 0.8)
H3 = third_diamond(1.0, 0.5, 1.2, 2.0)
SAMPLING = {b: QuadSettings(b, sample_count=1 << 18) for b in (Backend.QMC, Backend.MC_ORACLE)}


def brute_force_h(f, g, m, n):
    """Tensor Gauss-Legendre over both light-cone squares."""
    x, w = np.polynomial.legendre.leggauss(n)

    def nodes(b):
        box = lightcone_box(b)
        s = box.u_min + (x + 1) * (box.u_max - box.u_min) / 2
        ws = w * (box.u_max - box.u_min) / 2
        U, V = np.meshgrid(s, s, indexing="ij")
        W = np.outer(ws, ws) * 0.5 * b.at_lightcone(U, V)
        return U.ravel(), V.ravel(), W.ravel()

    u1, v1, w1 = nodes(f)
    u2, v2, w2 = nodes(g)
    lam = -np.subtract.outer(u1, u2) * np.subtract.outer(v1, v2)
    return float(w1 @ hadamard_from_interval(lam, m) @ w2)


@pytest.mark.parametrize("R", [0.3, 1.0, 2.5])
def test_jacobian_area(R):
    assert diamond_area(DiamondBump(0.0, R, 1.0, 1.0)) == pytest.approx(2 * R * R, rel=1e-14)


def test_against_brute_force():
    m = 0.5
    assert h_form(F, H3, m).value == pytest.approx(brute_force_h(F, H3, m, 32), rel=3e-3)


def test_symmetry_and_positivity():
    m = 0.3
    assert h_form(F, G, m).value == pytest.approx(h_form(G, F, m).value, rel=1e-12)
    assert h_form(F, F, m).value > 0
    assert h_form(G, G, m).value > 0


def test_bilinearity():
    m = 0.8
    base = h_form(F, G, m).value
    assert h_form(F.scaled(2.0), G, m).value == pytest.approx(2 * base, rel=1e-12)
    assert h_form(F, G.scaled(-0.5), m).value == pytest.approx(-0.5 * base, rel=1e-12)


def test_translation_invariance():
    m = 0.8
    shift = 3.7
    f2 = DiamondBump(F.center_x + shift, F.radius, F.sharpness, F.amplitude)
    g2 = DiamondBump(G.center_x + shift, G.radius, G.sharpness, G.amplitude)
    assert h_form(f2, g2, m).value == pytest.approx(h_form(F, G, m).value, rel=1e-12)


def test_zero_amplitude_exact():
    z = F.scaled(0.0)
    for backend in Backend:
        s = QuadSettings(backend, sample_count=1 << 14)
        assert h_form(z, G, 0.5, s).value == 0.0
        assert pj_form(G, z, 0.5, s).value == 0.0


def test_pj_time_symmetric_bumps():
    # bumps even in t pair to zero against a kernel odd in t, even when the
    # supports overlap and timelike separations occur
    assert abs(pj_form(F, F, 0.5).value) <= 1e-10
    overlap = DiamondBump(1.4, 0.6, 0.2, 1.1)
    assert abs(pj_form(F, overlap, 0.5).value) <= 1e-15
    assert abs(pj_form(overlap, F, 0.5).value) <= 1e-15
    r = pj_form(F, overlap, 0.5, SAMPLING[Backend.MC_ORACLE])
    assert abs(r.value) <= 3 * r.error_estimate


@pytest.mark.parametrize("g", [G, H3], ids=["tangent", "gapped"])
def test_pj_causal_pairs_vanish(g):
    for m in (1e-6, 0.1, 2.0):
        h = np.sqrt(h_form(F, F, m).value * h_form(g, g, m).value)
        assert abs(pj_form(F, g, m).value) <= 1e-6 * h


def test_resolution_convergence():
    m = 0.1
    coarse = h_form(F, G, m, QuadSettings(points_per_axis=24))
    fine = h_form(F, G, m, QuadSettings(points_per_axis=48))
    assert abs(coarse.value - fine.value) <= 1e-5 * abs(fine.value)
    assert coarse.converged
    assert coarse.error_estimate <= 1e-4 * abs(coarse.value)


def test_small_mass_log_growth():
    # H(f, f) = -(1/pi) ln(m) (int f)^2 + O(1) as m -> 0
    x, w = np.polynomial.legendre.leggauss(200)
    box = lightcone_box(F)
    s = box.u_min + (x + 1) * F.radius
    U, V = np.meshgrid(s, s, indexing="ij")
    total = 0.5 * F.radius**2 * float(w @ F.at_lightcone(U, V) @ w)
    step = h_form(F, F, 1e-8).value - h_form(F, F, 1e-6).value
    assert step == pytest.approx(np.log(100.0) / np.pi * total**2, rel=1e-4)


@pytest.mark.parametrize("case", BILINEAR_SUITE, ids=[c[0] for c in BILINEAR_SUITE])
def test_backends_agree(case):
    _, kind, f, g, m = case
    det = bilinear(kind, f, g, m)
    for backend, s in SAMPLING.items():
        r = bilinear(kind, f, g, m, s)
        assert abs(r.value - det.value) <= 3 * (r.error_estimate + det.error_estimate), backend


@pytest.mark.parametrize("backend", [Backend.QMC, Backend.MC_ORACLE])
def test_sampling_deterministic_across_threads(backend):
    vals = []
    for workers in (1, 3):
        s = QuadSettings(backend, sample_count=1 << 17, workers=workers)
        r = h_form(F, G, 0.4, s)
        vals.append((r.value, r.error_estimate))
    assert vals[0] == vals[1]


def test_seed_changes_sampling():
    a = h_form(F, G, 0.4, QuadSettings(Backend.MC_ORACLE, sample_count=1 << 15, seed=1)).value
    b = h_form(F, G, 0.4, QuadSettings(Backend.MC_ORACLE, sample_count=1 << 15, seed=2)).value
    assert a != b


def test_clamp_validation():
    with pytest.raises(SingularPointError):
        QuadSettings(lightcone_clamp=0.0)
    with pytest.raises(ValueError):
        h_form(F, G, 0.4, QuadSettings(Backend.QMC, sample_count=1 << 14, lightcone_clamp=1e-3))


@pytest.mark.parametrize("kw", [dict(points_per_axis=4), dict(sample_count=100), dict(seed=-1),
                                dict(target_rel_error=0.0), dict(workers=0), dict(backend="simpson")])
def test_settings_validation(kw):
    with pytest.raises(ValueError):
        QuadSettings(**kw)


def test_bad_kind():
    with pytest.raises(ValueError):
        bilinear("X", F, G, 0.5)


def test_result_validation():
    with pytest.raises(ValueError):
        BilinearResult(np.nan, 0.0, "deterministic", 1)
    with pytest.raises(ValueError):
        BilinearResult(1.0, -1.0, "deterministic", 1)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3
    assert worker_count(QuadSettings(workers=2)) == 2
    monkeypatch.setenv(THREADS_ENV, "lots")
    assert worker_count() >= 1


def test_cache_memo_and_persistence(tmp_path):
    path = tmp_path / "cache.csv"
    cache = BilinearCache(path)
    first = h_form(F, G, 0.5, cache=cache)
    again = h_form(F, G, 0.5, cache=cache)
    assert again.value == first.value
    assert cache.stats() == {"hits": 1, "misses": 1, "entries": 1}
    reloaded = BilinearCache(path)
    assert h_form(F, G, 0.5, cache=reloaded).value == first.value
    assert reloaded.hits == 1


def test_cache_key_depends_on_inputs():
    s = QuadSettings()
    k = BilinearCache.key("H", F, G, 0.5, s)
    assert k != BilinearCache.key("PJ", F, G, 0.5, s)
    assert k != BilinearCache.key("H", F, G, 0.5000001, s)
    assert k != BilinearCache.key("H", F, G, 0.5, QuadSettings(points_per_axis=32))
    assert k != BilinearCache.key("H", F.scaled(1.0 + 1e-15), G, 0.5, s)
    # worker count does not change values, so it is not part of the key
    assert k == BilinearCache.key("H", F, G, 0.5, QuadSettings(workers=2))


def test_cache_corrupt_lines_skipped(tmp_path, caplog):
    path = tmp_path / "cache.csv"
    cache = BilinearCache(path)
    value = h_form(F, G, 0.5, cache=cache).value
    with open(path, "a") as fh:
        fh.write("not,a,number\nzz\n\n")
    with caplog.at_level(logging.WARNING):
        reloaded = BilinearCache(path)
    assert reloaded.corrupt_lines == 2
    assert "malformed" in caplog.text
    assert h_form(F, G, 0.5, cache=reloaded).value == value
