"""Pointwise two-point kernels of the free massive scalar field in 1+1 dimensions.

With ``lam = dt**2 - dx**2``::

    pauli_jordan = -1/2 sign(dt) theta(lam) J0(m sqrt(lam))
    hadamard     = -1/2 Y0(m sqrt(lam))      for lam > 0
                 = (1/pi) K0(m sqrt(-lam))   for lam < 0

Both functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import bessel_j0, bessel_k0, j0_y0

__all__ = [
    "M_MIN",
    "Mass",
    "SingularPointError",
    "SpacetimePoint",
    "interval",
    "pauli_jordan",
    "hadamard",
    "hadamard_from_interval",
    "pauli_jordan_from_interval",
]

# Infrared guard: the 1+1 massless limit does not exist.
M_MIN = 1e-10


class SingularPointError(ValueError):
    """The Hadamard kernel was requested on the light cone (lam == 0)."""


@dataclass(frozen=True)
class Mass:
    """Field mass in inverse length units."""

    m: float

    def __post_init__(self):
        m = float(self.m)
        if not np.isfinite(m) or m < M_MIN:
            raise ValueError(f"mass must be finite and >= {M_MIN:g}, got {self.m!r}")
        object.__setattr__(self, "m", m)

    def __float__(self):
        return self.m


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float

    def __post_init__(self):
        if not (np.isfinite(self.t) and np.isfinite(self.x)):
            raise ValueError("spacetime point components must be finite")

    def __sub__(self, other):
        return (self.t - other.t, self.x - other.x)


def _mass_value(m):
    return m.m if isinstance(m, Mass) else Mass(m).m


def interval(dt, dx):
    """Minkowski interval ``dt**2 - dx**2``."""
    dt = np.asarray(dt, dtype=float)
    dx = np.asarray(dx, dtype=float)
    lam = dt * dt - dx * dx
    return float(lam) if lam.ndim == 0 else lam


def pauli_jordan_from_interval(lam, time_sign, m):
    """Pauli-Jordan kernel given ``lam`` and ``sign(dt)`` directly.

    ``time_sign`` must be -1, 0 or +1; zero gives an exact zero, as does any
    ``lam <= 0``.
    """
    m = _mass_value(m)
    lam = np.asarray(lam, dtype=float)
    time_sign = np.asarray(time_sign, dtype=float)
    lam, time_sign = np.broadcast_arrays(lam, time_sign)
    out = np.zeros(lam.shape)
    inside = (lam > 0.0) & (time_sign != 0.0)
    if np.any(inside):
        out[inside] = -0.5 * time_sign[inside] * bessel_j0(m * np.sqrt(lam[inside]))
    return float(out) if out.ndim == 0 else out


def hadamard_from_interval(lam, m):
    """Hadamard kernel as a function of ``lam`` alone.

    Raises
    ------
    SingularPointError
        If any ``lam`` is exactly zero.
    """
    m = _mass_value(m)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0.0):
        raise SingularPointError(
            "hadamard kernel is logarithmically singular on the light cone (lam == 0)"
        )
    out = np.empty(lam.shape)
    timelike = lam > 0.0
    if np.any(timelike):
        _, y0 = j0_y0(m * np.sqrt(lam[timelike]))
        out[timelike] = -0.5 * y0
    spacelike = ~timelike
    if np.any(spacelike):
        out[spacelike] = bessel_k0(m * np.sqrt(-lam[spacelike])) / np.pi
    return float(out) if out.ndim == 0 else out


def pauli_jordan(dt, dx, m):
    """Pauli-Jordan (commutator) kernel at separation ``(dt, dx)``.

    Odd under ``dt -> -dt``; vanishes identically (a literal zero, no
    cancellation) for spacelike separations and on the ``dt == 0`` slice.
    """
    dt = np.asarray(dt, dtype=float)
    dx = np.asarray(dx, dtype=float)
    return pauli_jordan_from_interval(dt * dt - dx * dx, np.sign(dt), m)


def hadamard(dt, dx, m):
    """Hadamard (symmetric) kernel at separation ``(dt, dx)``; even in both."""
    dt = np.asarray(dt, dtype=float)
    dx = np.asarray(dx, dtype=float)
    return hadamard_from_interval(dt * dt - dx * dx, m)
