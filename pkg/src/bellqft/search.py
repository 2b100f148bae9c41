"""End-to-end evaluation, random parameter search, mass sweep and extrapolation.

The ``evaluate_*`` functions turn a parameter vector into a bilinear table
(through :mod:`bellqft.quad`) and a :class:`~bellqft.correlators.CorrelatorReport`.
:func:`random_search` draws parameter vectors from a counter-based stream
indexed by sample number, so the ranked output does not depend on how the
samples are scheduled across threads.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .correlators import (
    BilinearTable,
    Dressing,
    FormulaMode,
    chsh_correlator,
    cluster_quantity,
    mermin3_correlator,
)
from .kernel import M_MIN
from .quad import BilinearCache, QuadSettings, h_form, pj_form, worker_count
from .testfn import (
    BellParameters,
    ClusterParameters,
    MerminParameters,
    spatial_gap,
    supports_spacelike,
)

__all__ = [
    "FilterStatus",
    "FilterOutcome",
    "Evaluation",
    "compute_table",
    "evaluate_chsh",
    "evaluate_mermin",
    "evaluate_cluster",
    "causality_filter",
    "SearchConfig",
    "SearchRecord",
    "SearchOutcome",
    "DEFAULT_RANGES",
    "random_search",
    "mass_sweep",
    "extrapolate_massless",
]

log = logging.getLogger(__name__)

ALICE = ("f", "f'")
BOB = ("g", "g'")
CHARLIE = ("h", "h'")
PJ_TOLERANCE = 1e-6


class FilterStatus(str, Enum):
    ACCEPTED = "accepted"
    REJECTED_CAUSALITY = "rejected_causality"
    REJECTED_GEOMETRY = "rejected_geometry"


@dataclass
class FilterOutcome:
    status: FilterStatus
    pj_values: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    failed_pairs: list = field(default_factory=list)


@dataclass
class Evaluation:
    """A correlator report with the table and per-bilinear results behind it."""

    report: object
    table: BilinearTable
    results: dict
    filter: FilterOutcome | None = None

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.results.values())

    @property
    def value(self) -> float:
        return self.report.value


def compute_table(bumps: dict, m, h_pairs, pj_pairs=(), settings=None, cache=None) -> tuple:
    """Evaluate the requested bilinears into a :class:`BilinearTable`.

    Returns ``(table, results)`` with ``results`` keyed ``("H", a, b)`` or
    ``("PJ", a, b)``.
    """
    settings = settings or QuadSettings()
    table = BilinearTable(m=float(m))
    results = {}
    for a, b in h_pairs:
        res = h_form(bumps[a], bumps[b], m, settings, cache)
        table.set_h(a, b, max(res.value, 0.0) if a == b else res.value, res.error_estimate)
        results[("H", a, b)] = res
    for a, b in pj_pairs:
        res = pj_form(bumps[a], bumps[b], m, settings, cache)
        table.set_pj(a, b, res.value, res.error_estimate)
        results[("PJ", a, b)] = res
    return table, results


def _diag(labels):
    return [(x, x) for x in labels]


def _cross(*groups):
    out = []
    for ga, gb in itertools.combinations(groups, 2):
        out.extend(itertools.product(ga, gb))
    return out


def evaluate_chsh(params: BellParameters, settings=None, cache=None,
                  mode=FormulaMode.DERIVED, dressing=Dressing.UNIFORM) -> Evaluation:
    bumps = params.bumps()
    cross = _cross(ALICE, BOB)
    table, results = compute_table(bumps, params.m, _diag(ALICE + BOB) + cross, cross, settings, cache)
    report = chsh_correlator(table, mode=mode, dressing=dressing)
    report.extras.update(_error_extras(results))
    return Evaluation(report, table, results)


def evaluate_mermin(params: MerminParameters, settings=None, cache=None,
                    mode=FormulaMode.DERIVED, dressing=Dressing.ALTERNATING,
                    pj_tolerance=PJ_TOLERANCE) -> Evaluation:
    """Mermin-3 correlator after the causality filter.

    A rejected configuration still returns an :class:`Evaluation` whose
    ``filter`` explains the rejection; its report is ``None`` when the
    supports overlap (no table is computed then).
    """
    bumps = params.bumps()
    geometry = _geometry_ok(bumps)
    if not geometry:
        return Evaluation(None, BilinearTable(m=params.m), {},
                          FilterOutcome(FilterStatus.REJECTED_GEOMETRY))
    cross = _cross(ALICE, BOB, CHARLIE)
    table, results = compute_table(bumps, params.m, _diag(ALICE + BOB + CHARLIE) + cross, cross,
                                   settings, cache)
    outcome = _pj_filter(table, pj_tolerance)
    report = mermin3_correlator(table, mode=mode, dressing=dressing)
    report.extras.update(_error_extras(results))
    report.extras["filter_status"] = outcome.status.value
    for k, v in outcome.pj_values.items():
        report.extras[f"filter_{k}"] = v
    return Evaluation(report, table, results, outcome)


def evaluate_cluster(params: ClusterParameters, settings=None, cache=None,
                     dressing=Dressing.ALTERNATING) -> Evaluation:
    bumps = params.bumps()
    table, results = compute_table(bumps, params.m, [("f", "f"), ("h", "h"), ("f", "h")],
                                   [("f", "h")], settings, cache)
    report = cluster_quantity(table, "f", "h", params.m, params.d, dressing=dressing)
    report.extras["support_gap"] = spatial_gap(bumps["f"], bumps["h"])
    report.extras.update(_error_extras(results))
    return Evaluation(report, table, results)


def _error_extras(results):
    out = {}
    for (kind, a, b), res in results.items():
        out[f"err_{kind}({a},{b})"] = res.error_estimate
    out["all_converged"] = all(r.converged for r in results.values())
    return out


def _geometry_ok(bumps) -> bool:
    groups = [[bumps[x] for x in grp] for grp in (ALICE, BOB, CHARLIE)]
    for ga, gb in itertools.combinations(groups, 2):
        for x, y in itertools.product(ga, gb):
            if not supports_spacelike(x, y):
                return False
    return True


def _pj_filter(table: BilinearTable, pj_tolerance) -> FilterOutcome:
    values, tols, failed = {}, {}, []
    for h, f in itertools.product(CHARLIE, ALICE):
        v = table.PJ(h, f)
        scale = math.sqrt(max(table.H(h, h), 0.0) * max(table.H(f, f), 0.0))
        tol = pj_tolerance * scale
        key = f"PJ({h},{f})"
        values[key] = v
        tols[key] = tol
        if abs(v) > tol:
            failed.append(key)
    status = FilterStatus.REJECTED_CAUSALITY if failed else FilterStatus.ACCEPTED
    return FilterOutcome(status, values, tols, failed)


def causality_filter(params: MerminParameters, settings=None, cache=None,
                     pj_tolerance=PJ_TOLERANCE) -> FilterOutcome:
    """Accept a Mermin configuration only if Charlie's functions commute with Alice's.

    Supports of all cross-party pairs must be spacelike (tangency allowed),
    and each ``|Delta_PJ(h, f)|`` for ``h in (h, h')``, ``f in (f, f')`` must
    lie below ``pj_tolerance * sqrt(H(h,h) H(f,f))``.
    """
    bumps = params.bumps()
    if not _geometry_ok(bumps):
        return FilterOutcome(FilterStatus.REJECTED_GEOMETRY)
    pairs = list(itertools.product(CHARLIE, ALICE))
    table, _ = compute_table(bumps, params.m, _diag(ALICE + CHARLIE), pairs, settings, cache)
    return _pj_filter(table, pj_tolerance)


# ---------------------------------------------------------------------------
# random search

DEFAULT_RANGES = {
    "a": (0.01, 1.0),
    "b": (0.01, 1.0),
    "a_prime": (0.1, 8.0),
    "b_prime": (0.1, 8.0),
    "p": (0.1, 8.0),
    "p_prime": (0.1, 8.0),
    "eta": (0.005, 0.5),
    "sigma": (0.005, 0.5),
    "eta_prime": (0.01, 12.0),
    "sigma_prime": (0.01, 12.0),
    "zeta": (0.01, 12.0),
    "zeta_prime": (0.01, 12.0),
    "R": (0.5, 3.0),
    "R_prime": (0.5, 3.0),
    "d": (0.5, 5.0),
}

_PARAM_ORDER = {
    "chsh": ("a", "eta", "b", "sigma", "a_prime", "eta_prime", "b_prime", "sigma_prime", "R", "R_prime"),
    "mermin3": ("a", "eta", "b", "sigma", "a_prime", "eta_prime", "b_prime", "sigma_prime", "R", "R_prime",
                "p", "p_prime", "zeta", "zeta_prime"),
    "cluster": ("a", "eta", "p", "zeta", "R", "d"),
}

# counter word that separates search streams from quadrature streams
_SEARCH_STREAM = 1


@dataclass(frozen=True)
class SearchConfig:
    """Random-search setup.

    ``ranges`` overrides entries of :data:`DEFAULT_RANGES`. Masses are drawn
    log-uniformly from ``mass_range``. For the Mermin target, ``d`` and
    ``d_prime`` equal ``2R`` unless ``d_range`` is given, in which case both
    are drawn from it.
    """

    target: str = "chsh"
    sample_count: int = 100_000
    seed: int = 0
    ranges: dict = field(default_factory=dict)
    mass_range: tuple = (1e-8, 1.0)
    settings: QuadSettings = field(default_factory=lambda: QuadSettings(points_per_axis=12))
    top_k: int = 10
    d_range: tuple | None = None
    formula_mode: FormulaMode = FormulaMode.DERIVED
    dressing: Dressing | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.target not in _PARAM_ORDER:
            raise ValueError(f"target must be one of {sorted(_PARAM_ORDER)}, got {self.target!r}")
        if self.sample_count < 0:
            raise ValueError("sample_count must be non-negative")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        for k in self.ranges:
            if k not in DEFAULT_RANGES:
                raise ValueError(f"unknown range {k!r}")
        for name, (lo, hi) in self.all_ranges().items():
            if not lo <= hi:
                raise ValueError(f"range for {name} is empty: [{lo}, {hi}]")
        lo, hi = self.mass_range
        if not (M_MIN <= lo <= hi <= 10.0):
            raise ValueError("mass_range must lie within [1e-10, 10]")
        if self.d_range is not None and not 0 <= self.d_range[0] <= self.d_range[1]:
            raise ValueError("d_range must be a non-negative interval")
        object.__setattr__(self, "formula_mode", FormulaMode(self.formula_mode))

    def all_ranges(self) -> dict:
        out = dict(DEFAULT_RANGES)
        out.update({k: tuple(map(float, v)) for k, v in self.ranges.items()})
        return out

    def resolved_dressing(self) -> Dressing:
        if self.dressing is not None:
            return Dressing(self.dressing)
        return Dressing.UNIFORM if self.target == "chsh" else Dressing.ALTERNATING


@dataclass
class SearchRecord:
    index: int
    params: dict
    status: FilterStatus
    value: float | None
    errors: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = {"index": self.index, "status": self.status.value,
               "value": "" if self.value is None else self.value}
        row.update(self.params)
        return row


@dataclass
class SearchOutcome:
    records: list
    counts: dict

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def _uniforms(seed, index, n):
    bitgen = np.random.Philox(key=int(seed), counter=[0, 0, _SEARCH_STREAM, int(index)])
    return np.random.Generator(bitgen).random(n)


def draw_parameters(cfg: SearchConfig, index: int) -> dict:
    """Parameter vector of sample ``index``; depends only on ``(seed, index)``."""
    names = _PARAM_ORDER[cfg.target]
    ranges = cfg.all_ranges()
    u = _uniforms(cfg.seed, index, len(names) + 3)
    out = {}
    for k, name in enumerate(names):
        lo, hi = ranges[name]
        out[name] = lo + (hi - lo) * float(u[k])
    lo, hi = cfg.mass_range
    out["m"] = float(math.exp(math.log(lo) + (math.log(hi) - math.log(lo)) * float(u[len(names)])))
    if cfg.target == "mermin3":
        if cfg.d_range is None:
            out["d"] = 2.0 * out["R"]
            out["d_prime"] = 2.0 * out["R"]
        else:
            lo, hi = cfg.d_range
            out["d"] = lo + (hi - lo) * float(u[len(names) + 1])
            out["d_prime"] = lo + (hi - lo) * float(u[len(names) + 2])
    return out


def _evaluate_sample(cfg: SearchConfig, index: int, cache) -> SearchRecord:
    p = draw_parameters(cfg, index)
    dressing = cfg.resolved_dressing()
    if cfg.target == "chsh":
        ev = evaluate_chsh(BellParameters(**p), cfg.settings, cache, cfg.formula_mode, dressing)
        status = FilterStatus.ACCEPTED
    elif cfg.target == "mermin3":
        ev = evaluate_mermin(MerminParameters(**p), cfg.settings, cache, cfg.formula_mode, dressing)
        status = ev.filter.status
    else:
        ev = evaluate_cluster(ClusterParameters(**p), cfg.settings, cache, dressing)
        status = FilterStatus.ACCEPTED
    value = ev.report.value if status is FilterStatus.ACCEPTED else None
    errors = {f"{k}({a},{b})": r.error_estimate for (k, a, b), r in ev.results.items()}
    return SearchRecord(index, p, status, value, errors)


def random_search(cfg: SearchConfig, cache: BilinearCache | None = None) -> SearchOutcome:
    """Draw ``cfg.sample_count`` vectors, evaluate, and keep the ``top_k`` by ``|value|``.

    Ties are broken by ascending sample index. ``counts`` tallies filter
    outcomes over all samples.
    """
    cache = cache if cache is not None else BilinearCache()
    indices = range(cfg.sample_count)
    n = min(cfg.workers or worker_count(), max(cfg.sample_count, 1))

    def run(i):
        return _evaluate_sample(cfg, i, cache)

    if n <= 1:
        records = [run(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(run, indices))
    counts = {s.value: 0 for s in FilterStatus}
    for r in records:
        counts[r.status.value] += 1
    accepted = [r for r in records if r.status is FilterStatus.ACCEPTED]
    accepted.sort(key=lambda r: (-abs(r.value), r.index))
    counts["total"] = len(records)
    if records and not accepted:
        log.warning("random_search: all %d samples rejected", len(records))
    return SearchOutcome(accepted[: cfg.top_k], counts)


# ---------------------------------------------------------------------------
# mass dependence


def mass_sweep(params_per_mass, settings=None, cache=None, dressing=Dressing.UNIFORM) -> list:
    """CHSH value for each parameter vector, ordered by decreasing mass.

    Each entry is a :class:`BellParameters` (its own ``m`` is used) or an
    ``(m, BellParameters)`` pair whose ``m`` overrides the vector's mass.
    Duplicates are kept.
    """
    out = []
    for entry in params_per_mass:
        if isinstance(entry, BellParameters):
            params = entry
        else:
            m, params = entry
            params = params.replace(m=float(m))
        ev = evaluate_chsh(params, settings, cache, FormulaMode.DERIVED, dressing)
        out.append((params.m, ev.report.value))
    # stable sort keeps duplicates in input order
    out.sort(key=lambda mv: -mv[0])
    return out


def extrapolate_massless(points, degree: int = 2) -> tuple:
    """Least-squares polynomial in ``xi = 1/|ln m|`` and its ``xi -> 0`` intercept.

    Parameters
    ----------
    points : sequence of (m, value)
        At least three points with ``0 < m < 1``.
    degree : int
        Polynomial degree, default 2.

    Returns
    -------
    intercept : float
    coefficients : ndarray
        Ascending powers of ``xi``; ``coefficients[0]`` is the intercept.

    Raises
    ------
    ValueError
        Fewer than three points, masses outside ``(0, 1)``, or fewer distinct
        ``xi`` than ``degree + 1``.
    """
    pts = [(float(m), float(v)) for m, v in points]
    if len(pts) < 3:
        raise ValueError("extrapolation needs at least 3 points")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    m = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any((m <= 0.0) | (m >= 1.0)):
        raise ValueError("all masses must lie in (0, 1)")
    xi = 1.0 / np.abs(np.log(m))
    if np.unique(xi).size < degree + 1:
        raise ValueError(f"degenerate design: need {degree + 1} distinct masses for degree {degree}")
    coef = np.polynomial.polynomial.polyfit(xi, y, degree)
    return float(coef[0]), coef
