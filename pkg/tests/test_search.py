import math

import numpy as np
import pytest

from bellqft.correlators import Dressing, FormulaMode
from bellqft.quad import BilinearCache, QuadSettings
from bellqft.reference import CHSH_ROWS, CLUSTER_ROWS, MERMIN_ROWS
from bellqft.search import (
    DEFAULT_RANGES,
    FilterStatus,
    SearchConfig,
    causality_filter,
    draw_parameters,
    evaluate_chsh,
    evaluate_cluster,
    evaluate_mermin,
    extrapolate_massless,
    mass_sweep,
    random_search,
)
from bellqft.testfn import BellParameters, MerminParameters

LOW = QuadSettings(points_per_axis=8)


def small_config(**kw):
    base = dict(target="chsh", sample_count=12, seed=3, top_k=4, settings=LOW)
    base.update(kw)
    return SearchConfig(**base)


def test_draws_depend_only_on_seed_and_index():
    cfg = small_config()
    assert draw_parameters(cfg, 5) == draw_parameters(cfg, 5)
    assert draw_parameters(cfg, 5) != draw_parameters(cfg, 6)
    assert draw_parameters(cfg, 5) != draw_parameters(small_config(seed=4), 5)
    # the sample count does not shift the stream
    assert draw_parameters(small_config(sample_count=1000), 5) == draw_parameters(cfg, 5)


def test_draws_respect_ranges():
    cfg = small_config(ranges={"a": (0.2, 0.3)}, mass_range=(1e-4, 1e-2))
    for i in range(200):
        p = draw_parameters(cfg, i)
        assert 0.2 <= p["a"] <= 0.3
        assert 1e-4 <= p["m"] <= 1e-2
        lo, hi = DEFAULT_RANGES["R"]
        assert lo <= p["R"] <= hi


def test_mermin_draws_use_2r_by_default():
    p = draw_parameters(small_config(target="mermin3"), 0)
    assert p["d"] == p["d_prime"] == 2 * p["R"]
    p = draw_parameters(small_config(target="mermin3", d_range=(1.0, 2.0)), 0)
    assert 1.0 <= p["d"] <= 2.0 and 1.0 <= p["d_prime"] <= 2.0


@pytest.mark.parametrize("kw", [dict(target="ghz"), dict(sample_count=-1), dict(top_k=0),
                                dict(ranges={"zz": (0, 1)}), dict(ranges={"a": (1.0, 0.5)}),
                                dict(mass_range=(0.0, 1.0)), dict(d_range=(-1.0, 1.0))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        small_config(**kw)


def test_random_search_ranking_and_threads():
    one = random_search(small_config(workers=1))
    many = random_search(small_config(workers=4))
    assert [(r.index, r.value) for r in one] == [(r.index, r.value) for r in many]
    values = [abs(r.value) for r in one]
    assert values == sorted(values, reverse=True)
    assert len(one) == 4
    assert one.counts["total"] == 12 and one.counts["accepted"] == 12


def test_zero_samples():
    out = random_search(small_config(sample_count=0))
    assert len(out) == 0 and out.counts["total"] == 0


def test_cluster_search_values_negative():
    out = random_search(small_config(target="cluster", sample_count=6, top_k=6))
    assert len(out) == 6
    assert all(r.value < 0 for r in out)


def test_mermin_search_counts():
    out = random_search(small_config(target="mermin3", sample_count=4, top_k=2))
    assert sum(out.counts[s.value] for s in FilterStatus) == 4
    assert all(abs(r.value) <= 4.0 + 1e-3 for r in out)


def test_evaluate_chsh_reports_errors():
    ev = evaluate_chsh(CHSH_ROWS[2].params, QuadSettings())
    assert ev.converged
    assert "err_H(f,g)" in ev.report.extras
    assert ev.table.H("f", "g") == ev.report.bilinears["H(f,g)"]


def test_geometry_rejection():
    p = MERMIN_ROWS[0].params.replace(R=1.0, d=0.0)
    assert causality_filter(p, LOW).status is FilterStatus.REJECTED_GEOMETRY
    ev = evaluate_mermin(p, LOW)
    assert ev.report is None and ev.filter.status is FilterStatus.REJECTED_GEOMETRY


def test_causality_filter_accepts_table_rows():
    for row in MERMIN_ROWS[:2]:
        out = causality_filter(row.params, LOW)
        assert out.status is FilterStatus.ACCEPTED
        assert set(out.pj_values) == {"PJ(h,f)", "PJ(h,f')", "PJ(h',f)", "PJ(h',f')"}
        assert all(t > 0 for t in out.tolerances.values())


def test_causality_filter_rejects_nonzero_commutator():
    # a negative tolerance rejects every pair, exercising the rejection path
    out = causality_filter(MERMIN_ROWS[0].params, LOW, pj_tolerance=-1.0)
    assert out.status is FilterStatus.REJECTED_CAUSALITY
    assert len(out.failed_pairs) == 4


def test_cluster_support_gap_recorded():
    ev = evaluate_cluster(CLUSTER_ROWS[0].params, LOW)
    assert ev.report.extras["support_gap"] == pytest.approx(CLUSTER_ROWS[0].params.d)


def test_mass_sweep_ordering_and_duplicates():
    base = CHSH_ROWS[2].params
    pts = mass_sweep([(1e-6, base), (1e-2, base), (1e-6, base)], LOW, BilinearCache())
    assert [m for m, _ in pts] == [1e-2, 1e-6, 1e-6]
    assert pts[1][1] == pts[2][1]
    single = mass_sweep([base], LOW)
    assert single[0][0] == base.m


def test_extrapolation_exact_polynomial():
    ms = np.array([1e-2, 1e-4, 1e-6, 1e-8])
    xi = 1 / np.abs(np.log(ms))
    vals = 2.8 - 3.0 * xi + 5.0 * xi**2
    intercept, coef = extrapolate_massless(zip(ms, vals))
    assert intercept == pytest.approx(2.8, abs=1e-10)
    assert coef[1] == pytest.approx(-3.0, abs=1e-8)
    lin, _ = extrapolate_massless(zip(ms, 1 + xi), degree=1)
    assert lin == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("pts", [
    [(1e-2, 2.0), (1e-3, 2.1)],
    [(1e-2, 2.0), (1e-3, 2.1), (1.5, 2.2)],
    [(1e-2, 2.0), (1e-2, 2.1), (1e-2, 2.2)],
])
def test_extrapolation_rejects_bad_input(pts):
    with pytest.raises(ValueError):
        extrapolate_massless(pts)


def test_dressing_choice_matters_for_chsh():
    p = CHSH_ROWS[3].params
    uni = evaluate_chsh(p, LOW, dressing=Dressing.UNIFORM).value
    alt = evaluate_chsh(p, LOW, dressing=Dressing.ALTERNATING).value
    printed = evaluate_chsh(p, LOW, mode=FormulaMode.PRINTED).value
    assert uni > 2.0 > alt
    assert printed == pytest.approx(alt, abs=1e-12)


def test_bell_parameters_roundtrip():
    p = BellParameters(**draw_parameters(small_config(), 0))
    assert math.isfinite(evaluate_chsh(p, LOW).value)
    assert isinstance(MerminParameters(**draw_parameters(small_config(target="mermin3"), 0)), MerminParameters)
