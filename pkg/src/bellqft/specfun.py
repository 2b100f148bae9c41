"""Real-argument Bessel functions J0, Y0 and K0.

Everything here is written against numpy only; no platform special-function
library is consulted. Each function accepts a scalar or an array and returns
the same shape (a Python float for scalar input).

Regimes
-------
J0, Y0
    ``x < SERIES_MAX``         ascending power series
    ``SERIES_MAX <= x < ASYMPTOTIC_MIN``
                               Miller backward recurrence normalised by
                               ``1 = J0 + 2 (J2 + J4 + ...)``; Y0 from the
                               Neumann series in the same even-order values
    ``x >= ASYMPTOTIC_MIN``    Hankel asymptotic expansion
K0
    ``x <= K0_SERIES_MAX``     ascending series ``-(ln(x/2)+gamma) I0 + ...``
    ``x > K0_SERIES_MAX``      trapezoidal rule on ``int_0^inf exp(-x cosh t) dt``
                               (geometric convergence, evaluated as
                               ``exp(-x) * int exp(-x (cosh t - 1)) dt`` with
                               ``t`` rescaled by ``min(1, 2/sqrt(x))`` so the
                               peak width stays O(1) in the node variable)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "SpecFunAccuracy",
    "DEFAULT_ACCURACY",
    "bessel_j0",
    "bessel_y0",
    "bessel_k0",
    "j0_y0",
    "regime_constants",
]

EULER_GAMMA = 0.57721566490153286061
TWO_OVER_PI = 0.63661977236758134308
PI_OVER_4 = 0.78539816339744830962

SERIES_MAX = 5.0
ASYMPTOTIC_MIN = 20.0
K0_SERIES_MAX = 2.0

# Miller start index, chosen for the largest argument handled by recurrence.
MILLER_START = 2 * int(np.ceil((1.2 * ASYMPTOTIC_MIN + 30.0) / 2.0))
ASYMPTOTIC_TERMS = 24
K0_TRAPEZOID_STEP = 0.2
K0_TRAPEZOID_NODES = 24
SERIES_MAX_TERMS = 80


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class SpecFunAccuracy:
    """Truncation tolerance for the ascending series.

    The recurrence, asymptotic and trapezoid regimes run a fixed number of
    steps sized for double precision; this only governs when the power
    series stop adding terms.
    """

    target_relative_error: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.target_relative_error < 1e-6:
            raise ValueError(
                "target_relative_error must lie in (0, 1e-6), got "
                f"{self.target_relative_error!r}"
            )

    @property
    def series_tolerance(self) -> float:
        # a few digits tighter than the target so that rounding dominates
        return self.target_relative_error * 1e-4


DEFAULT_ACCURACY = SpecFunAccuracy()


def regime_constants() -> dict:
    """Crossover points and truncation sizes, for run manifests."""
    return {
        "series_max": SERIES_MAX,
        "asymptotic_min": ASYMPTOTIC_MIN,
        "k0_series_max": K0_SERIES_MAX,
        "miller_start": MILLER_START,
        "asymptotic_terms": ASYMPTOTIC_TERMS,
        "k0_trapezoid_step": K0_TRAPEZOID_STEP,
        "k0_trapezoid_nodes": K0_TRAPEZOID_NODES,
    }


def _as_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: argument must be finite")
    return arr


def _wrap(result, scalar):
    return float(result) if scalar else result


# ---------------------------------------------------------------------------
# ascending series


def _series_j0_y0(x, tol, want_y0=True):
    """Power series of J0 and the regular part of Y0.

    Y0(x) = (2/pi) [ (ln(x/2) + gamma) J0(x) + sum_{k>=1} (-1)^(k+1) H_k q^k / (k!)^2 ]
    with q = x^2/4 and H_k the harmonic numbers.
    """
    q = 0.25 * x * x
    term = np.ones_like(x)
    j0 = np.ones_like(x)
    reg = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, SERIES_MAX_TERMS):
        term = -term * q / (k * k)
        harmonic += 1.0 / k
        j0 = j0 + term
        reg = reg - harmonic * term
        if np.all(np.abs(term) * harmonic <= tol * np.maximum(np.abs(j0), 1e-300)):
            break
    if not want_y0:
        return j0, None
    y0 = TWO_OVER_PI * ((np.log(0.5 * x) + EULER_GAMMA) * j0 + reg)
    return j0, y0


def _series_k0(x, tol):
    """K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} H_k q^k / (k!)^2."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    reg = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, SERIES_MAX_TERMS):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        reg = reg + harmonic * term
        if np.all(term * harmonic <= tol * i0):
            break
    return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + reg


# ---------------------------------------------------------------------------
# Miller backward recurrence


def _miller_j0_y0(x):
    """J0 and Y0 from backward recurrence on J_n, for moderate x."""
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    neumann = np.zeros_like(x)
    two_over_x = 2.0 / x
    for n in range(MILLER_START, 0, -1):
        # j_cur holds (unnormalised) J_n
        if n % 2 == 0:
            norm += 2.0 * j_cur
            k = n // 2
            neumann += (-1.0 if k % 2 else 1.0) * j_cur / k
        j_prev = n * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
    # j_cur now holds unnormalised J_0
    norm += j_cur
    j0 = j_cur / norm
    neumann = neumann / norm
    y0 = TWO_OVER_PI * ((np.log(0.5 * x) + EULER_GAMMA) * j0 - 2.0 * neumann)
    return j0, y0


# ---------------------------------------------------------------------------
# Hankel asymptotics


def _hankel_coefficients(n):
    a = np.empty(n)
    a[0] = 1.0
    for k in range(1, n):
        a[k] = a[k - 1] * (2 * k - 1) ** 2 / (8.0 * k)
    return a


_HANKEL = _hankel_coefficients(2 * ASYMPTOTIC_TERMS)


def _asymptotic_j0_y0(x, terms=ASYMPTOTIC_TERMS):
    inv = 1.0 / x
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    # Horner in 1/x^2 from the tail
    inv2 = inv * inv
    for k in range(terms - 1, -1, -1):
        sign = -1.0 if k % 2 else 1.0
        p = p * inv2 + sign * _HANKEL[2 * k]
        q = q * inv2 + sign * _HANKEL[2 * k + 1]
    # a_k(0) carries (-1)^k, so the odd series enters with a minus sign
    q = -q * inv
    chi = x - PI_OVER_4
    c, s = np.cos(chi), np.sin(chi)
    amp = np.sqrt(TWO_OVER_PI * inv)
    return amp * (p * c - q * s), amp * (p * s + q * c)


# ---------------------------------------------------------------------------
# K0 integral representation

_K0_TAU = K0_TRAPEZOID_STEP * np.arange(K0_TRAPEZOID_NODES)
_K0_W = np.full(K0_TRAPEZOID_NODES, K0_TRAPEZOID_STEP)
_K0_W[0] *= 0.5


def _trapezoid_k0(x):
    scale = np.minimum(1.0, 2.0 / np.sqrt(x))
    t = scale[..., None] * _K0_TAU
    # cosh(t) - 1 = 2 sinh(t/2)^2 avoids cancellation for small t
    body = np.exp(-2.0 * x[..., None] * np.sinh(0.5 * t) ** 2) @ _K0_W
    return np.exp(-x) * scale * body


# ---------------------------------------------------------------------------
# public functions


def _j0_y0(x, accuracy, want_y0):
    j0 = np.empty_like(x)
    y0 = np.empty_like(x) if want_y0 else None
    small = x < SERIES_MAX
    large = x >= ASYMPTOTIC_MIN
    mid = ~(small | large)
    if np.any(small):
        js, ys = _series_j0_y0(x[small], accuracy.series_tolerance, want_y0)
        j0[small] = js
        if want_y0:
            y0[small] = ys
    if np.any(mid):
        jm, ym = _miller_j0_y0(x[mid])
        j0[mid] = jm
        if want_y0:
            y0[mid] = ym
    if np.any(large):
        jl, yl = _asymptotic_j0_y0(x[large])
        j0[large] = jl
        if want_y0:
            y0[large] = yl
    return j0, y0


def bessel_j0(x, accuracy: SpecFunAccuracy = DEFAULT_ACCURACY):
    """Bessel function of the first kind of order zero.

    J0 is even, so negative arguments are folded onto ``|x|``.

    Raises
    ------
    DomainError
        If any argument is NaN or infinite.
    """
    scalar = np.ndim(x) == 0
    arr = np.abs(_as_array(x, "bessel_j0"))
    j0, _ = _j0_y0(np.atleast_1d(arr), accuracy, want_y0=False)
    return _wrap(j0.reshape(arr.shape), scalar)


def bessel_y0(x, accuracy: SpecFunAccuracy = DEFAULT_ACCURACY):
    """Bessel function of the second kind of order zero, for ``x > 0``."""
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "bessel_y0")
    if np.any(arr <= 0.0):
        raise DomainError("bessel_y0: argument must be positive")
    _, y0 = _j0_y0(np.atleast_1d(arr), accuracy, want_y0=True)
    return _wrap(y0.reshape(arr.shape), scalar)


def bessel_k0(x, accuracy: SpecFunAccuracy = DEFAULT_ACCURACY):
    """Modified Bessel function of the second kind of order zero, ``x > 0``."""
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "bessel_k0")
    if np.any(arr <= 0.0):
        raise DomainError("bessel_k0: argument must be positive")
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    small = flat <= K0_SERIES_MAX
    if np.any(small):
        out[small] = _series_k0(flat[small], accuracy.series_tolerance)
    if np.any(~small):
        out[~small] = _trapezoid_k0(flat[~small])
    return _wrap(out.reshape(arr.shape), scalar)


def j0_y0(x, accuracy: SpecFunAccuracy = DEFAULT_ACCURACY):
    """J0 and Y0 together (shared work in every regime); ``x > 0``."""
    arr = np.asarray(x, dtype=float)
    j0, y0 = _j0_y0(np.atleast_1d(arr), accuracy, want_y0=True)
    return j0.reshape(arr.shape), y0.reshape(arr.shape)
