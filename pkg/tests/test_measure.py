import math
from fractions import Fraction

import numpy as np
import pytest

from fractalzeta import measure as me
from fractalzeta import spray as sp
from fractalzeta import strings as st
from fractalzeta import tube as tb
from fractalzeta.errors import EpsilonTooSmall, InsufficientRange, NotConverged, ResourceLimit

D_CS = math.log(2) / math.log(3)
CS = st.make_string("cantor")
AS = st.make_string("a_string", a=1)


def cantor_oracle(x: Fraction, depth=40) -> Fraction:
    """Self-similarity recursion, exact on rationals."""
    if depth == 0 or x <= 0:
        return Fraction(0) if x <= 0 else x
    if x >= 1:
        return Fraction(1)
    if x < Fraction(1, 3):
        return cantor_oracle(3 * x, depth - 1) / 2
    if x <= Fraction(2, 3):
        return Fraction(1, 2)
    return Fraction(1, 2) + cantor_oracle(3 * x - 2, depth - 1) / 2


@pytest.fixture(scope="module")
def gasket_tube():
    eps = np.geomspace(0.0019, 0.065, 40)
    return me.measure_tube("gasket", 10, 4096, eps)


def test_cantor_function_vs_oracle():
    pts = [Fraction(1, 3), Fraction(2, 9), Fraction(1, 4), Fraction(3, 4), Fraction(7, 27),
           Fraction(20, 27), Fraction(1, 10), Fraction(5, 7), Fraction(0), Fraction(1)]
    got = me.cantor_function(np.array([float(p) for p in pts]))
    # Holder continuity of order D turns float rounding of x (~1e-17) into ~1e-11
    for p, g in zip(pts, got):
        assert g == pytest.approx(float(cantor_oracle(p)), abs=1e-9)
    assert me.cantor_function(np.array([1 / 3]))[0] == 0.5


def test_gasket_depth_one_area():
    r = me.rasterize("gasket", 1, 1024)
    assert r.fill.sum() * r.h ** 2 == pytest.approx(0.75 * math.sqrt(3) / 4, rel=5e-3)


def test_carpet_depth_two_occupancy():
    r = me.rasterize("carpet", 2, 2048)
    assert r.fill.sum() * r.h ** 2 == pytest.approx((8 / 9) ** 2, rel=5e-3)


def test_rasterize_validation():
    with pytest.raises(ResourceLimit):
        me.rasterize("gasket", 5, 1 << 16)
    with pytest.raises(ValueError):
        me.rasterize("gasket", 0, 512)
    with pytest.raises(ValueError):
        me.rasterize("koch", 3, 512)


def test_square_boundary_inner_tube():
    t = me.measure_tube("square_boundary", 1, 1024, [0.1], relative_to_omega=True)
    assert t.V[0] == pytest.approx(1 - 0.8 ** 2, rel=1e-2)


def test_disk_rfd_tube():
    t = me.measure_tube("circle", 1, 1024, [0.2], relative_to_omega=True)
    assert t.V[0] == pytest.approx(2 * math.pi * 0.2 - math.pi * 0.04, rel=1e-2)


def test_single_raster_tube_volume():
    r = me.rasterize("square_boundary", 1, 1024)
    t = me.tube_volume(r, [0.1, 0.2], relative_to_omega=True)
    assert np.allclose(t.V, [0.36, 0.64], rtol=1e-2)
    assert np.all(t.err > 0)
    with pytest.raises(EpsilonTooSmall):
        me.tube_volume(r, [2 * r.h])


def test_epsilon_too_small():
    with pytest.raises(EpsilonTooSmall):
        me.measure_tube("gasket", 6, 512, [0.001])


def test_gasket_raster_vs_series(gasket_tube):
    ser = tb.catalog_series(sp.catalog_get("gasket"), K=100)
    for e in (0.01, 0.05):
        i = int(np.argmin(np.abs(gasket_tube.eps - e)))
        want = tb.eval_series(ser, gasket_tube.eps[i])[0]
        assert gasket_tube.V[i] == pytest.approx(want, rel=2e-2)


def test_gasket_dim_fit(gasket_tube):
    f = me.dim_fit(gasket_tube, 2)
    assert abs(f.D - math.log(3) / math.log(2)) <= 0.03
    # the same fit on the tube formula over the same range
    ser = tb.catalog_series(sp.catalog_get("gasket"), K=100)
    g = me.dim_fit(lambda e: tb.eval_series(ser, e)[0], 2, 0.0019, 0.065)
    assert abs(f.D - g.D) <= 5e-3


def test_tube_checks(gasket_tube):
    assert me.check_tube(gasket_tube, math.sqrt(3) / 4 + 2)


def test_cantor_graph_raster_vs_exact():
    eps = np.array([0.01, 0.03, 0.05])
    t = me.measure_tube("cantor_graph_rfd", 10, 4096, eps, relative_to_omega=True)
    want = np.array([me.cantor_graph_tube_exact(e) for e in eps])
    assert np.allclose(t.V, want, rtol=3e-2)


def test_dim_fit_exact_sources():
    f = me.dim_fit(lambda e: st.tube_exact(CS, e), 1)
    assert abs(f.D - D_CS) <= 0.01 and f.band < 0.01
    f = me.dim_fit(lambda e: st.tube_exact(AS, e), 1)
    assert abs(f.D - 0.5) <= 0.01


def test_dim_fit_insufficient_range():
    t = me.EmpiricalTube(np.geomspace(0.01, 0.02, 20), np.geomspace(0.1, 0.2, 20), np.zeros(20))
    with pytest.raises(InsufficientRange):
        me.dim_fit(t, 2)


def test_contents_cantor():
    lo, hi = me.contents(lambda e: st.tube_exact(CS, e), D_CS, 1)
    assert lo == pytest.approx(2.4950, abs=1e-3)
    assert hi == pytest.approx(2.5830, abs=1e-3)
    # the sup is approached at the gap edges up to the -2 eps**D correction
    assert hi == pytest.approx(2 ** (2 - D_CS), abs=3 * 1e-8 ** D_CS)


def test_contents_astring_and_cantor_graph():
    lo, hi = me.contents(lambda e: st.tube_exact(AS, e), 0.5, 1)
    assert lo == pytest.approx(2 * math.sqrt(2), rel=1e-2) and hi == pytest.approx(2 * math.sqrt(2), rel=1e-2)
    lo, hi = me.contents(me.cantor_graph_tube_exact, 1, 2)
    assert lo == pytest.approx(2, rel=5e-2) and hi == pytest.approx(2, rel=5e-2)


def test_average_content_examples():
    want = 2 ** (1 - D_CS) / (D_CS * (1 - D_CS)) / (2 * math.log(3))
    got = me.average_content(lambda e: st.tube_exact(CS, e), D_CS, 1, period=math.log(3))
    assert got == pytest.approx(want, rel=1e-3)
    got = me.average_content(lambda e: st.tube_exact(AS, e), 0.5, 1)
    assert got == pytest.approx(2 * math.sqrt(2), rel=1e-2)
    assert me.average_content(lambda e: e ** 0.7, 1.3, 2) == pytest.approx(1, abs=1e-12)


def test_average_content_not_converged():
    with pytest.raises(NotConverged):
        me.average_content(lambda e: e ** 0.5, 0.7, 1, eps_lo=1e-4)


def test_oscillation_cantor():
    o = me.oscillation_detect(lambda e: st.tube_exact(CS, e), D_CS, 1)
    assert o.period == pytest.approx(math.log(3), rel=2e-2)
    assert o.amplitude == pytest.approx(0.088, rel=0.1)
    assert o.semi_amplitude == pytest.approx(o.amplitude / 2)


def test_oscillation_astring_flat():
    o = me.oscillation_detect(lambda e: st.tube_exact(AS, e), 0.5, 1)
    assert o.amplitude <= 0.01 * 2 * math.sqrt(2)


def test_oscillation_profile_sine():
    u = np.linspace(0, 40, 4001)
    o = me.oscillation_from_profile(u, 3 + 0.5 * np.sin(2 * math.pi * u / 2.5))
    assert o.period == pytest.approx(2.5, rel=1e-3)
    assert o.amplitude == pytest.approx(1.0, rel=1e-3)
    assert o.mean == pytest.approx(3, abs=1e-2)
    assert me.oscillation_from_profile(u, np.full_like(u, 2.0)).period is None


def test_zeta_from_tube_power_law():
    # V = t**(2-D) has zeta = delta**(s-D) * (2-D)... checked against the closed form
    D, delta = 1.3, 0.2
    eps = np.geomspace(1e-6, delta, 4000)
    z = 2.5 + 0.4j
    got = me.zeta_from_tube(eps, eps ** (2 - D), z, 2, D, delta)
    want = delta ** (z - D) * (1 + (2 - z) / (z - D))
    assert abs(got - want) <= 1e-5 * abs(want)
