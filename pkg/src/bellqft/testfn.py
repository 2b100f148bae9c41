"""Diamond-supported bump test functions and their parameter vectors.

A bump lives on the causal diamond ``|x - c| + |t| <= R`` centred on the
``t = 0`` axis and reads ``A exp(-a / (R**2 - s**2))`` with
``s = |x - c| + |t|``. In light-cone coordinates ``u = x + t``, ``v = x - t``
the diamond is the square ``[c - R, c + R]**2`` and ``s = max(|u - c|, |v - c|)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .kernel import Mass

__all__ = [
    "DiamondBump",
    "bump_value",
    "right_diamond",
    "left_diamond",
    "third_diamond",
    "spatial_gap",
    "supports_spacelike",
    "BellParameters",
    "MerminParameters",
    "ClusterParameters",
]


@dataclass(frozen=True)
class DiamondBump:
    center_x: float
    radius: float
    sharpness: float
    amplitude: float

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not np.isfinite(value):
                raise ValueError(f"{f.name} must be finite")
            object.__setattr__(self, f.name, value)
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.sharpness <= 0.0:
            raise ValueError(f"sharpness must be positive, got {self.sharpness}")

    @property
    def support(self):
        """Spatial extent ``(x_min, x_max)`` of the diamond."""
        return self.center_x - self.radius, self.center_x + self.radius

    @property
    def peak(self):
        """Value at the centre, ``A exp(-a / R**2)``."""
        return self.amplitude * np.exp(-self.sharpness / self.radius**2)

    def profile(self, s):
        """Radial profile ``A exp(-a / (R**2 - s**2))`` for ``s < R``, else 0."""
        s = np.abs(np.asarray(s, dtype=float))
        out = np.zeros(s.shape)
        inside = s < self.radius
        if np.any(inside):
            gap = (self.radius - s[inside]) * (self.radius + s[inside])
            out[inside] = self.amplitude * np.exp(-self.sharpness / gap)
        return out

    def __call__(self, t, x):
        return bump_value(self, t, x)

    def at_lightcone(self, u, v):
        """Evaluate at light-cone coordinates ``u = x + t``, ``v = x - t``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        s = np.maximum(np.abs(u - self.center_x), np.abs(v - self.center_x))
        return self.profile(s)

    def scaled(self, factor):
        """Same diamond and shape with the amplitude multiplied by ``factor``."""
        return DiamondBump(self.center_x, self.radius, self.sharpness, self.amplitude * factor)


def bump_value(b: DiamondBump, t, x):
    """Value of bump ``b`` at ``(t, x)``; exactly zero on and outside the boundary."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    out = b.profile(np.abs(x - b.center_x) + np.abs(t))
    return float(out) if out.ndim == 0 else out


def right_diamond(radius, sharpness, amplitude) -> DiamondBump:
    """Diamond ``|x - R| + |t| <= R`` (touching the origin from the right)."""
    return DiamondBump(radius, radius, sharpness, amplitude)


def left_diamond(radius, sharpness, amplitude) -> DiamondBump:
    """Mirror image of :func:`right_diamond`, ``|x + R| + |t| <= R``."""
    return DiamondBump(-radius, radius, sharpness, amplitude)


def third_diamond(radius, sharpness, amplitude, d) -> DiamondBump:
    """Diamond ``|x - d - 3R| + |t| <= R``, i.e. ``x in [d + 2R, d + 4R]``.

    It sits a gap ``d`` to the right of ``right_diamond`` of the same radius.
    """
    if d < 0:
        raise ValueError(f"separation d must be non-negative, got {d}")
    return DiamondBump(d + 3.0 * radius, radius, sharpness, amplitude)


def spatial_gap(b1: DiamondBump, b2: DiamondBump) -> float:
    """Distance between the closures of two diamonds; negative if they overlap."""
    return abs(b1.center_x - b2.center_x) - (b1.radius + b2.radius)


def supports_spacelike(b1: DiamondBump, b2: DiamondBump) -> bool:
    """True when every point of one diamond is spacelike or null to the other.

    For diamonds centred on the same time slice this is exactly
    ``|c1 - c2| >= R1 + R2``; tangent diamonds (one common corner) qualify.
    """
    return spatial_gap(b1, b2) >= 0.0


@dataclass(frozen=True)
class BellParameters:
    """Alice's ``f, f'`` on right diamonds and Bob's ``g, g'`` on left ones.

    Unprimed functions share radius ``R``, primed ones ``R_prime``.
    """

    a: float
    eta: float
    b: float
    sigma: float
    a_prime: float
    eta_prime: float
    b_prime: float
    sigma_prime: float
    m: float
    R: float
    R_prime: float

    def __post_init__(self):
        Mass(self.m)
        for name in ("a", "b", "a_prime", "b_prime", "R", "R_prime"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def mass(self) -> Mass:
        return Mass(self.m)

    def bumps(self) -> dict:
        return {
            "f": right_diamond(self.R, self.a, self.eta),
            "f'": right_diamond(self.R_prime, self.a_prime, self.eta_prime),
            "g": left_diamond(self.R, self.b, self.sigma),
            "g'": left_diamond(self.R_prime, self.b_prime, self.sigma_prime),
        }

    def as_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return type(self)(**values)


@dataclass(frozen=True)
class MerminParameters(BellParameters):
    """Adds Charlie's ``h, h'`` on third diamonds a gap ``d`` (``d'``) to the right.

    ``h`` uses radius ``R`` and ``h'`` radius ``R_prime``, each centred at
    ``d + 3R`` (``d' + 3R'``).
    """

    p: float = 1.0
    p_prime: float = 1.0
    zeta: float = 0.0
    zeta_prime: float = 0.0
    d: float = 0.0
    d_prime: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        for name in ("p", "p_prime"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("d", "d_prime"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def bumps(self) -> dict:
        out = super().bumps()
        out["h"] = third_diamond(self.R, self.p, self.zeta, self.d)
        out["h'"] = third_diamond(self.R_prime, self.p_prime, self.zeta_prime, self.d_prime)
        return out


@dataclass(frozen=True)
class ClusterParameters:
    """``f`` on the right diamond and ``h`` on the third diamond, same radius."""

    a: float
    eta: float
    p: float
    zeta: float
    R: float
    m: float
    d: float

    def __post_init__(self):
        Mass(self.m)
        for name in ("a", "p", "R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.d < 0:
            raise ValueError("d must be non-negative")

    @property
    def mass(self) -> Mass:
        return Mass(self.m)

    def bumps(self) -> dict:
        return {
            "f": right_diamond(self.R, self.a, self.eta),
            "h": third_diamond(self.R, self.p, self.zeta, self.d),
        }

    def as_dict(self) -> dict:
        return asdict(self)
