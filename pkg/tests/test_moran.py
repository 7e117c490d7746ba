import math
from fractions import Fraction

import numpy as np
import pytest

from fractalzeta import moran as mo
from fractalzeta.errors import NoRealRoot, NotLattice
from fractalzeta.moran import DirichletPolynomial, Window

LOG2, LOG3 = math.log(2), math.log(3)
P3 = 2 * math.pi / LOG3


def bisect(f, lo, hi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("method", ["bisection", "newton", "hybrid"])
def test_real_dimension_examples(method):
    cs = DirichletPolynomial.from_ratios([Fraction(1, 3)] * 2)
    assert mo.real_dimension(cs, method) == pytest.approx(LOG2 / LOG3, abs=1e-12)
    g = DirichletPolynomial.from_ratios([Fraction(1, 2)] * 3)
    assert mo.real_dimension(g, method) == pytest.approx(math.log(3) / LOG2, abs=1e-12)
    nl = DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)])
    oracle = bisect(lambda x: 1 - 2.0 ** -x - 3.0 ** -x, 0, 1)
    assert abs(mo.real_dimension(nl, method) - oracle) <= 1e-10
    assert oracle == pytest.approx(0.7878849, abs=1e-7)


def test_no_real_root():
    with pytest.raises(NoRealRoot):
        mo.real_dimension(DirichletPolynomial.from_ratios([0.5]))


def test_cantor_roots():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 3)] * 2)
    win = Window(0.0, 1.0, -20.5 * P3, 20.5 * P3)
    rs = mo.find_roots(poly, win)
    assert len(rs.roots) == 41 and rs.certified_count == 41
    want = [LOG2 / LOG3 + 1j * P3 * k for k in range(-20, 21)]
    got = sorted(rs.locations, key=lambda z: z.imag)
    assert all(abs(a - b) <= 1e-10 for a, b in zip(got, want))
    assert all(m == 1 for _, m in rs.roots)
    assert mo.residual_check(poly, rs) <= 1e-12


def test_gasket_principal_root():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 2)] * 3)
    rs = mo.find_roots(poly, Window(0.0, 2.0, -math.pi / LOG2 + 0.01, math.pi / LOG2 - 0.01))
    assert len(rs.roots) == 1
    assert rs.roots[0][0] == pytest.approx(math.log(3) / LOG2, abs=1e-12)


def test_nonlattice_real_root_cross_check():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)])
    s0 = mo.real_dimension(poly)
    rs = mo.find_roots(poly, Window(s0 - 0.2, s0 + 0.2, -0.5, 0.5))
    assert len(rs.roots) == 1 and abs(rs.roots[0][0] - s0) <= 1e-10


def test_nonlattice_roots_quasiperiodic():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)])
    rs = mo.find_roots(poly, Window(-1.5, 1.0, -60, 60))
    assert mo.residual_check(poly, rs) <= 1e-10
    # every root lies left of the real dimension and the set is conjugation closed
    s0 = mo.real_dimension(poly)
    assert all(w.real <= s0 + 1e-12 for w in rs.locations)
    for w in rs.locations:
        assert np.min(np.abs(rs.locations - w.conjugate())) <= 1e-9


def test_winding_count_matches_roots():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 3)] * 2)
    win = Window(0.0, 1.0, -3.5 * P3, 3.5 * P3)
    assert mo.winding_count(poly, win) == 7


def test_classify_examples():
    c = mo.classify([Fraction(1, 3), Fraction(1, 3)])
    assert c.is_lattice and c.r == pytest.approx(1 / 3) and c.p == pytest.approx(P3)
    c = mo.classify([Fraction(1, 4), Fraction(1, 2)])
    assert c.is_lattice and c.r == pytest.approx(0.5)
    assert c.exponents[Fraction(1, 4)] == 2 and c.exponents[Fraction(1, 2)] == 1
    c = mo.classify([Fraction(1, 2), Fraction(1, 3)])
    assert c.kind == "nonlattice" and c.generic and c.rank == 2
    c = mo.classify([1 / 2, 1 / 3, 1 / 6])
    assert c.kind == "nonlattice" and c.rank == 2 and not c.generic


def test_periodic_extend():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 3)] * 2)
    cl = mo.classify([Fraction(1, 3)] * 2)
    one = mo.find_roots(poly, Window(0.0, 1.0, -0.5 * P3, 0.5 * P3))
    ext = mo.periodic_extend(one, cl.p, range(-100, 101), cl)
    assert len(ext.roots) == 201
    assert mo.residual_check(poly, ext) <= 1e-10
    bad = mo.periodic_extend(one, cl.p * 1.01, range(-100, 101), cl)
    assert mo.residual_check(poly, bad) > 1e-3


def test_periodic_extend_needs_lattice():
    poly = DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)])
    rs = mo.find_roots(poly, Window(0.5, 1.0, -1, 1))
    with pytest.raises(NotLattice):
        mo.periodic_extend(rs, 1.0, range(3), mo.classify([Fraction(1, 2), Fraction(1, 3)]))
