"""Smeared bilinears ``H(f, g)`` and ``Delta_PJ(f, g)`` of two diamond bumps.

Both are four-dimensional integrals

    B(f, g) = int d^2x d^2y f(x) K(x - y) g(y)

with ``K`` the Hadamard or Pauli-Jordan kernel. Every backend works in
light-cone coordinates ``u = x + t``, ``v = x - t`` where each diamond is the
square ``[c - R, c + R]**2``, the interval is ``lam = -du dv`` and the volume
element picks up a Jacobian of ``1/2`` per point.

Backends
--------
deterministic
    Radial layer decomposition. A bump is a superposition of indicator
    squares, ``f = int_0^R w(r) 1[|u - c| < r] 1[|v - c| < r] dr`` with
    ``w = -F'``. The distribution of ``du`` between two squares is a
    trapezoid, i.e. a second difference of ramps, so the pairing of two
    squares collapses onto a one-dimensional integral of the kernel
    against a fixed logarithmic weight. The substitution
    ``y = a / (R**2 - r**2)`` turns ``w(r) dr`` into ``A exp(-y) dy``; a
    further logarithmic map of ``y - a/R**2`` makes the radial integrands
    analytic in a strip, and they are summed with the trapezoid rule. The
    light-cone singularity is handled analytically, so no clamp is needed.
qmc
    Randomly scrambled Sobol points on the product of squares, with
    independent scrambles as replicates for the error estimate.
mc_oracle
    Plain Monte Carlo from a counter-based Philox stream keyed by
    ``(seed, chunk)``, independent of scheduling.

The sampling backends skip points with ``|lam| < lightcone_clamp`` and add a
bound on the skipped contribution to the error estimate.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial.laguerre import laggauss
from scipy.stats import qmc

from .kernel import Mass, SingularPointError, hadamard_from_interval, pauli_jordan_from_interval
from .testfn import DiamondBump

__all__ = [
    "Backend",
    "QuadSettings",
    "BilinearResult",
    "BilinearCache",
    "LightconeBox",
    "lightcone_box",
    "diamond_area",
    "h_form",
    "pj_form",
    "bilinear",
    "worker_count",
    "THREADS_ENV",
]

log = logging.getLogger(__name__)

THREADS_ENV = "BELLQFT_THREADS"

# nodes of the inner (logarithmic weight) Gauss-Laguerre rule
KERNEL_NODES = 48
# log-radial trapezoid: step TAU_SPAN / points_per_axis on [TAU_MIN, ln(TAU_TOP / y0)]
TAU_SPAN = 12.0
TAU_MIN = -12.0
TAU_TOP = 37.0
COARSE_RATIO = 4.0 / 3.0
MC_CHUNK = 1 << 15
QMC_REPLICATES = 8

_RAMP_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])


class Backend(str, Enum):
    DETERMINISTIC = "deterministic"
    QMC = "qmc"
    MC_ORACLE = "mc_oracle"


@dataclass(frozen=True)
class QuadSettings:
    """Budget and method for one bilinear evaluation.

    Parameters
    ----------
    backend : Backend or str
    points_per_axis : int
        Radial node density of the deterministic backend: the log-radial
        trapezoid step is ``12 / points_per_axis``. The error estimate is
        the difference to a rule with a step ``4/3`` as large.
    sample_count : int
        Total number of points (qmc and mc_oracle).
    lightcone_clamp : float
        Half-width ``eps`` of the band ``|lam| < eps`` skipped by the
        sampling backends. Must be positive.
    seed : int
        64-bit seed for the sampling backends.
    target_rel_error : float
        A result is flagged ``converged`` when its error estimate is below
        this fraction of ``|value|`` (or below it in absolute terms when the
        value is smaller than one).
    workers : int or None
        Worker threads; ``None`` reads ``BELLQFT_THREADS`` or uses all cores.
        Results do not depend on it.
    """

    backend: Backend = Backend.DETERMINISTIC
    points_per_axis: int = 24
    sample_count: int = 1 << 19
    lightcone_clamp: float = 1e-9
    seed: int = 20240917
    target_rel_error: float = 1e-3
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if int(self.points_per_axis) < 8:
            raise ValueError("points_per_axis must be >= 8")
        if int(self.sample_count) < 10_000:
            raise ValueError("sample_count must be >= 1e4")
        if not self.lightcone_clamp > 0.0:
            raise SingularPointError(
                "lightcone_clamp must be positive; the Hadamard kernel is singular at lam = 0"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not self.target_rel_error > 0.0:
            raise ValueError("target_rel_error must be positive")
        if self.workers is not None and int(self.workers) < 1:
            raise ValueError("workers must be >= 1")

    def token(self) -> str:
        """Settings that influence the value, as a stable string."""
        if self.backend is Backend.DETERMINISTIC:
            return f"det:{int(self.points_per_axis)}:{KERNEL_NODES}:{TAU_MIN!r}:{TAU_TOP!r}"
        return (
            f"{self.backend.value}:{int(self.sample_count)}:"
            f"{float(self.lightcone_clamp)!r}:{int(self.seed)}"
        )

    def as_dict(self) -> dict:
        return {
            "backend": self.backend.value,
            "points_per_axis": int(self.points_per_axis),
            "sample_count": int(self.sample_count),
            "lightcone_clamp": float(self.lightcone_clamp),
            "seed": int(self.seed),
            "target_rel_error": float(self.target_rel_error),
            "kernel_nodes": KERNEL_NODES,
            "tau_span": TAU_SPAN,
            "tau_min": TAU_MIN,
            "tau_top": TAU_TOP,
        }


@dataclass(frozen=True)
class BilinearResult:
    value: float
    error_estimate: float
    backend: str
    evaluation_count: int
    converged: bool = True
    skipped_fraction: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.value) and np.isfinite(self.error_estimate)):
            raise ValueError("bilinear value and error estimate must be finite")
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be non-negative")


@dataclass(frozen=True)
class LightconeBox:
    u_min: float
    u_max: float
    v_min: float
    v_max: float

    @property
    def area(self) -> float:
        return (self.u_max - self.u_min) * (self.v_max - self.v_min)


def lightcone_box(b: DiamondBump) -> LightconeBox:
    """The square a diamond maps to under ``u = x + t``, ``v = x - t``."""
    lo, hi = b.center_x - b.radius, b.center_x + b.radius
    return LightconeBox(lo, hi, lo, hi)


def diamond_area(b: DiamondBump, nodes: int = 8) -> float:
    """Area of the diamond in ``(t, x)``, integrated over its light-cone square.

    Gauss-Legendre on the square with the Jacobian ``1/2``; equals ``2 R**2``.
    """
    box = lightcone_box(b)
    x, w = np.polynomial.legendre.leggauss(nodes)
    hu = 0.5 * (box.u_max - box.u_min)
    hv = 0.5 * (box.v_max - box.v_min)
    return 0.5 * float(np.sum(w) * hu * np.sum(w) * hv)


def worker_count(settings: QuadSettings | None = None) -> int:
    if settings is not None and settings.workers is not None:
        return int(settings.workers)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
        else:
            if n >= 1:
                return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# cache


class BilinearCache:
    """Thread-safe memo of bilinear values keyed by a content hash.

    With a ``path`` the cache loads prior records and appends new ones as
    ``hash,value,error`` lines. Malformed lines are skipped with a warning.
    """

    def __init__(self, path=None):
        self._lock = threading.Lock()
        self._store: dict[str, BilinearResult] = {}
        self.hits = 0
        self.misses = 0
        self.corrupt_lines = 0
        self.path = path
        if path is not None and os.path.exists(path):
            self._load(path)

    @staticmethod
    def key(kind, f: DiamondBump, g: DiamondBump, m: float, settings: QuadSettings) -> str:
        parts = [kind, _bump_token(f), _bump_token(g), repr(float(m)), settings.token()]
        return hashlib.blake2b("|".join(parts).encode(), digest_size=8).hexdigest()

    def _load(self, path):
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    h, value, err = line.split(",")
                    if len(h) != 16 or int(h, 16) < 0:
                        raise ValueError(h)
                    res = BilinearResult(float(value), float(err), "cache", 0)
                except (ValueError, TypeError):
                    self.corrupt_lines += 1
                    log.warning("cache %s line %d is malformed; ignored", path, lineno)
                    continue
                self._store[h] = res
        if self.corrupt_lines:
            log.warning("cache %s: %d malformed line(s) ignored", path, self.corrupt_lines)

    def get(self, key):
        with self._lock:
            res = self._store.get(key)
            if res is None:
                self.misses += 1
            else:
                self.hits += 1
            return res

    def put(self, key, result: BilinearResult):
        with self._lock:
            if key in self._store:
                return
            self._store[key] = result
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(f"{key},{result.value!r},{result.error_estimate!r}\n")

    def __len__(self):
        return len(self._store)

    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "entries": len(self._store)}


def _bump_token(b: DiamondBump) -> str:
    return ",".join(repr(v) for v in (b.center_x, b.radius, b.sharpness, b.amplitude))


# ---------------------------------------------------------------------------
# deterministic backend


@lru_cache(maxsize=None)
def _log_weight():
    """Nodes ``w_i`` and weights for ``int_0^1 phi(w) rho(w) dw``.

    ``rho(w) = -(1 + w) ln w - 2 (1 - w)`` is the weight left after
    integrating a product kernel ``k(x y)`` against ``(X - x)(Y - y)`` over
    ``[0, X] x [0, Y]``; with ``w = exp(-s)`` it is a Gauss-Laguerre sum.
    """
    s, ws = laggauss(KERNEL_NODES)
    w = np.exp(-s)
    rho = (1.0 + w) * s - 2.0 * (1.0 - w)
    return w, ws * rho


def _gamma(z, m, kind):
    """``z**2 int_0^1 k(z w) rho(w) dw`` with ``k(z) = K(lam = -z)``."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape)
    nz = z != 0.0
    if not np.any(nz):
        return out
    w, weight = _log_weight()
    zz = z[nz]
    lam = -(zz[:, None] * w)
    if kind == "H":
        k = hadamard_from_interval(lam, m)
    else:
        k = pauli_jordan_from_interval(lam, 1.0, m)
    out[nz] = zz * zz * (k @ weight)
    return out


def _radii(b: DiamondBump, step):
    """Layer radii, trapezoid weights and prefactor in the log-radial variable.

    With ``y = y0 + y0 exp(tau)`` and ``y0 = a / R**2`` the layer radius is
    ``R / sqrt(1 + exp(-tau))`` and ``A exp(-y) dy`` becomes
    ``A exp(-y0) exp(-x) x dtau`` with ``x = y0 exp(tau)``. The integrand is
    analytic in a strip around the real ``tau`` axis for every ``y0``, so the
    trapezoid rule converges geometrically for sharp and flat bumps alike.
    """
    y0 = b.sharpness / b.radius**2
    tau = np.arange(TAU_MIN, np.log(TAU_TOP / y0) + step, step)
    x = y0 * np.exp(tau)
    r = b.radius / np.sqrt(1.0 + np.exp(-tau))
    return r, step * np.exp(-x) * x, b.amplitude * np.exp(-y0)


def _layer_pairing(delta, r, rp, m, kind):
    """Pairing of indicator squares of half-widths ``r``, ``rp`` at offset ``delta``."""
    R, Rp = np.meshgrid(r, rp, indexing="ij")
    s = R + Rp
    a = np.abs(R - Rp)
    P = delta + np.stack([-s, -a, a, s])
    iu, ju = np.triu_indices(4)
    G = np.empty((4, 4) + R.shape)
    # the kernel sees only the product P_k P_l, symmetric in (k, l)
    upper = _gamma((P[iu] * P[ju]).ravel(), m, kind).reshape((len(iu),) + R.shape)
    G[iu, ju] = upper
    G[ju, iu] = upper
    if kind == "PJ":
        G = np.sign(P)[:, None] * G
    return 0.25 * np.einsum("k,l,klij->ij", _RAMP_SIGNS, _RAMP_SIGNS, G)


def _deterministic_once(f, g, m, step, kind):
    rf, wf, cf = _radii(f, step)
    rg, wg, cg = _radii(g, step)
    phi = _layer_pairing(f.center_x - g.center_x, rf, rg, m, kind)
    return cf * cg * float(wf @ phi @ wg), rf.size * rg.size


def _deterministic(f, g, m, settings, kind):
    step = TAU_SPAN / int(settings.points_per_axis)
    fine, n1 = _deterministic_once(f, g, m, step, kind)
    rough, n2 = _deterministic_once(f, g, m, step * COARSE_RATIO, kind)
    err = abs(fine - rough) + 1e-13 * abs(fine)
    return fine, err, (n1 + n2) * 10 * KERNEL_NODES, 0.0


# ---------------------------------------------------------------------------
# sampling backends


def _sample_block(f, g, m, kind, eps, unit):
    """Integrand sums over a block of unit-cube points of shape ``(N, 4)``."""
    bf, bg = lightcone_box(f), lightcone_box(g)
    u1 = bf.u_min + (bf.u_max - bf.u_min) * unit[:, 0]
    v1 = bf.v_min + (bf.v_max - bf.v_min) * unit[:, 1]
    u2 = bg.u_min + (bg.u_max - bg.u_min) * unit[:, 2]
    v2 = bg.v_min + (bg.v_max - bg.v_min) * unit[:, 3]
    vals = f.at_lightcone(u1, v1) * g.at_lightcone(u2, v2)
    du, dv = u1 - u2, v1 - v2
    lam = -du * dv
    live = (vals != 0.0) & (np.abs(lam) >= eps)
    skipped = int(np.count_nonzero((vals != 0.0) & (np.abs(lam) < eps)))
    out = np.zeros(unit.shape[0])
    if np.any(live):
        if kind == "H":
            k = hadamard_from_interval(lam[live], m)
        else:
            k = pauli_jordan_from_interval(lam[live], np.sign(du[live] - dv[live]), m)
        out[live] = vals[live] * k
    return float(out.sum()), float(out @ out), skipped


def _volume(f, g):
    # Jacobian 1/2 per point
    return 0.25 * lightcone_box(f).area * lightcone_box(g).area


def _skip_bound(f, g, m, kind, eps, skipped, total):
    if skipped == 0:
        return 0.0
    if kind == "H":
        kmax = max(abs(hadamard_from_interval(eps, m)), abs(hadamard_from_interval(-eps, m)))
    else:
        kmax = 0.5
    return _volume(f, g) * abs(f.peak * g.peak) * kmax * skipped / total


def _map(fn, items, settings):
    n = min(worker_count(settings), len(items))
    if n <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _mc_oracle(f, g, m, settings, kind):
    total = int(settings.sample_count)
    eps = float(settings.lightcone_clamp)
    chunks = [(i, min(MC_CHUNK, total - i * MC_CHUNK)) for i in range(-(-total // MC_CHUNK))]

    def run(chunk):
        idx, size = chunk
        # counter-based stream: the chunk index lives in the top counter word
        bitgen = np.random.Philox(key=int(settings.seed), counter=[0, 0, 0, idx])
        unit = np.random.Generator(bitgen).random((size, 4))
        return _sample_block(f, g, m, kind, eps, unit)

    parts = _map(run, chunks, settings)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    skipped = sum(p[2] for p in parts)
    vol = _volume(f, g)
    mean = s1 / total
    var = max(s2 / total - mean * mean, 0.0)
    value = vol * mean
    err = vol * np.sqrt(var / max(total - 1, 1))
    err += _skip_bound(f, g, m, kind, eps, skipped, total)
    return value, err, total, skipped / total


def _qmc(f, g, m, settings, kind):
    total = int(settings.sample_count)
    eps = float(settings.lightcone_clamp)
    per = 1 << max(int(np.floor(np.log2(total / QMC_REPLICATES))), 1)
    seeds = np.random.SeedSequence(int(settings.seed)).spawn(QMC_REPLICATES)

    def run(rep):
        engine = qmc.Sobol(d=4, scramble=True, seed=np.random.default_rng(seeds[rep]))
        unit = engine.random_base2(int(np.log2(per)))
        s1 = 0.0
        skipped = 0
        for lo in range(0, per, MC_CHUNK):
            part = _sample_block(f, g, m, kind, eps, unit[lo : lo + MC_CHUNK])
            s1 += part[0]
            skipped += part[2]
        return s1 / per, skipped

    parts = _map(run, list(range(QMC_REPLICATES)), settings)
    means = np.array([p[0] for p in parts])
    skipped = sum(p[1] for p in parts)
    vol = _volume(f, g)
    value = vol * float(means.mean())
    err = vol * float(means.std(ddof=1)) / np.sqrt(QMC_REPLICATES)
    used = per * QMC_REPLICATES
    err += _skip_bound(f, g, m, kind, eps, skipped, used)
    return value, err, used, skipped / used


_BACKENDS = {
    Backend.DETERMINISTIC: _deterministic,
    Backend.QMC: _qmc,
    Backend.MC_ORACLE: _mc_oracle,
}


def bilinear(kind, f: DiamondBump, g: DiamondBump, m, settings: QuadSettings | None = None,
             cache: BilinearCache | None = None) -> BilinearResult:
    """Evaluate ``H(f, g)`` (``kind='H'``) or ``Delta_PJ(f, g)`` (``kind='PJ'``)."""
    if kind not in ("H", "PJ"):
        raise ValueError(f"kind must be 'H' or 'PJ', got {kind!r}")
    settings = settings or QuadSettings()
    mass = m.m if isinstance(m, Mass) else Mass(m).m
    backend = settings.backend
    if f.amplitude == 0.0 or g.amplitude == 0.0:
        return BilinearResult(0.0, 0.0, backend.value, 0)
    if kind == "PJ" and f == g:
        # antisymmetry
        return BilinearResult(0.0, 0.0, backend.value, 0)
    if backend is not Backend.DETERMINISTIC:
        limit = 1e-6 * max(f.radius, g.radius) ** 2
        if settings.lightcone_clamp > limit:
            raise ValueError(f"lightcone_clamp {settings.lightcone_clamp:g} exceeds 1e-6 R^2 = {limit:g}")
    key = None
    if cache is not None:
        key = BilinearCache.key(kind, f, g, mass, settings)
        hit = cache.get(key)
        if hit is not None:
            return hit
    value, err, count, skipped = _BACKENDS[backend](f, g, mass, settings, kind)
    converged = err <= settings.target_rel_error * max(abs(value), 1.0)
    res = BilinearResult(float(value), float(err), backend.value, int(count), bool(converged), float(skipped))
    if cache is not None:
        cache.put(key, res)
    return res


def h_form(f, g, m, settings=None, cache=None) -> BilinearResult:
    """Smeared Hadamard bilinear ``H(f, g)``; symmetric, ``H(f, f) >= 0``."""
    return bilinear("H", f, g, m, settings, cache)


def pj_form(f, g, m, settings=None, cache=None) -> BilinearResult:
    """Smeared Pauli-Jordan bilinear ``Delta_PJ(f, g)``; antisymmetric."""
    return bilinear("PJ", f, g, m, settings, cache)
