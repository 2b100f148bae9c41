import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellqft.testfn import (
    BellParameters,
    ClusterParameters,
    DiamondBump,
    MerminParameters,
    bump_value,
    left_diamond,
    right_diamond,
    spatial_gap,
    supports_spacelike,
    third_diamond,
)

pos = st.floats(min_value=0.05, max_value=5.0)


@settings(max_examples=100, deadline=None)
@given(pos, pos, st.floats(min_value=-3, max_value=3), st.floats(min_value=-1, max_value=1),
       st.floats(min_value=-1, max_value=1))
def test_zero_outside_and_on_boundary(R, a, c, ut, ux):
    b = DiamondBump(c, R, a, 1.0)
    # scale a direction so that |dx| + |t| >= R
    n = abs(ut) + abs(ux)
    if n == 0:
        return
    k = R / n * 1.0001
    assert b(ut * k, c + ux * k) == 0.0
    assert b(0.0, c + np.copysign(R, ux)) == 0.0


@settings(max_examples=100, deadline=None)
@given(pos, pos, st.floats(min_value=0.0, max_value=0.999))
def test_positive_inside_and_peak(R, a, frac):
    b = DiamondBump(0.0, R, a, 2.0)
    v = b(0.0, frac * R)
    assert 0.0 <= v <= b.peak
    assert b(0.0, 0.0) == pytest.approx(b.peak)


def test_lightcone_form_matches():
    b = DiamondBump(0.4, 1.2, 0.3, 1.7)
    rng = np.random.default_rng(1)
    t, x = rng.uniform(-1.5, 1.5, size=(2, 500))
    np.testing.assert_allclose(b.at_lightcone(x + t, x - t), b(t, x), rtol=1e-14, atol=0)


def test_smooth_decay_at_boundary():
    b = DiamondBump(0.0, 1.0, 1.0, 1.0)
    assert b(0.0, 0.99) < 1e-20
    assert b(0.0, 0.9) > 0


def test_constructors_and_geometry():
    f = right_diamond(1.0, 0.3, 1.0)
    g = left_diamond(1.0, 0.3, 1.0)
    h = third_diamond(1.0, 0.3, 1.0, 0.5)
    assert f.support == (0.0, 2.0)
    assert g.support == (-2.0, 0.0)
    assert h.support == (2.5, 4.5)
    assert spatial_gap(f, g) == 0.0
    assert spatial_gap(f, h) == pytest.approx(0.5)
    assert supports_spacelike(f, g) and supports_spacelike(f, h)
    assert not supports_spacelike(f, DiamondBump(1.5, 1.0, 0.3, 1.0))
    with pytest.raises(ValueError):
        third_diamond(1.0, 0.3, 1.0, -0.1)


@pytest.mark.parametrize("kw", [dict(radius=0.0), dict(sharpness=-1.0), dict(amplitude=np.inf)])
def test_bump_validation(kw):
    base = dict(center_x=0.0, radius=1.0, sharpness=0.5, amplitude=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        DiamondBump(**base)


def test_scaled_and_zero_amplitude():
    b = DiamondBump(0.0, 1.0, 0.5, 2.0)
    assert b.scaled(0.5)(0.1, 0.2) == pytest.approx(0.5 * b(0.1, 0.2))
    assert DiamondBump(0.0, 1.0, 0.5, 0.0)(0.0, 0.0) == 0.0
    assert isinstance(bump_value(b, 0.0, 0.0), float)


def test_bell_parameters_layout():
    p = BellParameters(0.1, 1.0, 0.2, 1.0, 0.3, 1.0, 0.4, 1.0, 0.5, 1.0, 2.0)
    bumps = p.bumps()
    assert set(bumps) == {"f", "f'", "g", "g'"}
    assert bumps["f'"].radius == 2.0 and bumps["g"].center_x == -1.0
    assert p.replace(m=0.1).m == 0.1
    with pytest.raises(ValueError):
        p.replace(R=0.0)
    with pytest.raises(ValueError):
        p.replace(m=0.0)


def test_mermin_and_cluster_layout():
    p = MerminParameters(0.1, 1.0, 0.2, 1.0, 0.3, 1.0, 0.4, 1.0, 0.5, 1.0, 2.0,
                         p=0.5, p_prime=0.6, zeta=1.0, zeta_prime=1.0, d=2.0, d_prime=4.0)
    b = p.bumps()
    assert b["h"].support == (4.0, 6.0)
    assert b["h'"].support == (8.0, 12.0)
    c = ClusterParameters(0.3, 0.2, 0.5, 0.7, 1.8, 0.1, 3.6)
    assert spatial_gap(*c.bumps().values()) == pytest.approx(3.6)
    with pytest.raises(ValueError):
        ClusterParameters(0.3, 0.2, 0.5, 0.7, 1.8, 0.1, -1.0)
