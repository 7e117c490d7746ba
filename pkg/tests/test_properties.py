import math
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as hs

from fractalzeta import expr as ex
from fractalzeta import moran as mo
from fractalzeta import spectral as spc
from fractalzeta import spray as sp
from fractalzeta import strings as st
from fractalzeta.expr import Const, Div, s
from fractalzeta.moran import Window

CLOSED = [n for n in sp.catalog_names() if sp.catalog_get(n).zeta is not None]
SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

points = hs.builds(complex, hs.floats(2.05, 3.5), hs.floats(-30, 30))
lams = hs.sampled_from([2.0, 1 / 3, 7 / 5])
lengths = hs.lists(hs.floats(1e-4, 1.0), min_size=1, max_size=12)


@SETTINGS
@given(name=hs.sampled_from(CLOSED), lam=lams, z=points)
def test_scaling_expr(name, lam, z):
    e = sp.catalog_get(name)
    z = z + (e.N - 2)
    want = lam ** z * ex.evaluate(e.zeta, z)
    assert abs(ex.evaluate(sp.scaled_zeta(e, lam), z) - want) <= 1e-12 * abs(want)


@SETTINGS
@given(lam=lams, z=points, kind=hs.sampled_from(["interval", "square", "triangle", "ball"]))
def test_scaling_generator(lam, z, kind):
    # independent route: rescale the tube data, not the expression
    g = sp.MonophaseGenerator.ball(2, 0.7) if kind == "ball" else getattr(sp.MonophaseGenerator, kind)(0.6)
    z = z - 2 + g.N
    a = ex.evaluate(sp.generator_zeta(g.scaled(lam)), z)
    b = lam ** z * ex.evaluate(sp.generator_zeta(g), z)
    assert abs(a - b) <= 1e-12 * abs(b)


@SETTINGS
@given(ls=lengths, lam=lams, z=points)
def test_scaling_string(ls, lam, z):
    a = st.zeta_partial(st.make_string("explicit", lengths=[lam * l for l in ls]), z - 1.5).value
    b = lam ** (z - 1.5) * st.zeta_partial(st.make_string("explicit", lengths=ls), z - 1.5).value
    assert abs(a - b) <= 1e-12 * max(abs(b), 1e-300)


@SETTINGS
@given(name=hs.sampled_from(CLOSED), z=points)
def test_conjugate_symmetry(name, z):
    e = sp.catalog_expr(name)
    a, b = ex.evaluate(e, z.conjugate()), ex.evaluate(e, z)
    assert abs(a - b.conjugate()) <= 1e-13 * abs(b)


@SETTINGS
@given(name=hs.sampled_from(CLOSED), x=hs.floats(2.05, 4.0))
def test_real_on_real_axis(name, x):
    v = ex.evaluate(sp.catalog_expr(name), x + sp.catalog_get(name).N - 2)
    assert abs(complex(v).imag) <= 1e-14 * abs(v)


@SETTINGS
@given(ls=lengths, e1=hs.floats(1e-5, 1.0), e2=hs.floats(1e-5, 1.0))
def test_tube_monotone_and_brute(ls, e1, e2):
    s_ = st.make_string("explicit", lengths=ls)
    lo, hi = sorted((e1, e2))
    assert st.tube_exact(s_, lo) <= st.tube_exact(s_, hi) + 1e-15
    assert st.tube_exact(s_, hi) <= s_.total_length * (1 + 1e-12)
    brute = math.fsum(min(l, 2 * hi) for l in ls)
    assert abs(st.tube_exact(s_, hi) - brute) <= 1e-12 * brute


@SETTINGS
@given(ls=lengths, x=hs.floats(1.0, 1e5))
def test_frequency_count_two_routes(ls, x):
    s_ = st.make_string("explicit", lengths=ls)
    assert spc.frequency_count(s_, x) == spc.frequency_count_dual(s_, x)


@settings(max_examples=25, deadline=None)
@given(cut=hs.floats(-20.0, 20.0), ratios=hs.sampled_from([(1 / 2, 1 / 3), (1 / 3, 1 / 3), (1 / 2, 1 / 4, 1 / 5)]))
def test_winding_additivity(cut, ratios):
    poly = mo.DirichletPolynomial.from_ratios(list(ratios))
    rs = mo.find_roots(poly, Window(-3.0, 1.6, -25.0, 25.0))
    # keep the cut away from roots so both halves have a regular boundary
    if any(abs(w.imag - cut) < 1e-3 for w in rs.locations):
        return
    whole = mo.winding_count(poly, Window(-3.0, 1.6, -25.0, 25.0))
    lo = mo.winding_count(poly, Window(-3.0, 1.6, -25.0, cut))
    hi = mo.winding_count(poly, Window(-3.0, 1.6, cut, 25.0))
    assert whole == lo + hi == len(rs.roots)


@settings(max_examples=20, deadline=None)
@given(a=hs.floats(-0.8, 0.8), b=hs.floats(-0.8, 0.8), m=hs.integers(1, 3), n=hs.integers(1, 3))
def test_order_additivity(a, b, m, n):
    if abs(a - b) < 0.05:
        return
    f = Const(1.0)
    for _ in range(m):
        f = f * (s - a)
    g = Const(1.0)
    for _ in range(n):
        g = g * (s - b)
    win = Window(-1.0, 1.0, -1.0, 1.0)
    df = sp.divisor_of(Div(Const(1.0), f), win)
    dg = sp.divisor_of(Div(s - 0.9, g), win)
    dfg = sp.divisor_of(Div(s - 0.9, f * g), win)
    assert dfg.same_as(sp.divisor_add(df, dg))


@settings(max_examples=20, deadline=None)
@given(name=hs.sampled_from(["gasket", "carpet", "carpet3d", "cantor_graph_rfd", "sphere_rfd"]),
       k=hs.integers(-4, 4))
def test_residue_vs_contour(name, k):
    e = sp.catalog_get(name)
    rows = e.residue_table(kmax=4)
    w, stored, _ = rows[k % len(rows)]
    c = ex.laurent_coeffs(e.zeta, ex.ContourSpec(complex(w), 1e-2), -1, -1)[0]
    assert abs(ex.residue(e.zeta, complex(w)) - c) <= 1e-8 * (1 + abs(c))


@settings(max_examples=15, deadline=None)
@given(name=hs.sampled_from(["gasket", "carpet", "half_square", "cantor_graph_rfd", "cantor_grill",
                             "cantor_dust", "n_gasket"]), periods=hs.floats(1.0, 6.0))
def test_divisors_conjugation_closed(name, periods):
    e = sp.catalog_get(name)
    assert e.divisor(e.default_window(periods)).conjugation_closed()


@settings(max_examples=15, deadline=None)
@given(p1=hs.floats(1.0, 4.0), p2=hs.floats(1.0, 4.0))
def test_minkowski_sum_commutes(p1, p2):
    C = sp.catalog_get("cantor_string_rfd")
    I = sp.catalog_get("unit_interval")
    d1, d2 = C.divisor(C.default_window(p1)), I.divisor(C.default_window(p2))
    win = Window(-2.0, 2.0, -10.0, 10.0)
    assert sp.minkowski_sum(d1, d2, win).same_as(sp.minkowski_sum(d2, d1, win))
