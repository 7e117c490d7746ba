import math
from fractions import Fraction

import numpy as np
import pytest

from fractalzeta import expr as ex
from fractalzeta import moran as mo
from fractalzeta import strings as st
from fractalzeta.errors import BadParameter, Divergent


def brute_tube(lengths_mult, eps):
    """sum of min(l, 2 eps) over an explicit list: the oracle for tube_exact."""
    return math.fsum(m * min(l, 2 * eps) for l, m in lengths_mult)


def cantor_lengths(n):
    return [(3.0 ** -k, 2 ** (k - 1)) for k in range(1, n + 1)]


def test_cantor_lengths():
    cs = st.make_string("cantor")
    it = cs.lengths()
    got = [next(it) for _ in range(4)]
    assert got == [(pytest.approx(1 / 3), 1), (pytest.approx(1 / 9), 2), (pytest.approx(1 / 27), 4),
                   (pytest.approx(1 / 81), 8)]
    assert cs.total_length == 1


def test_a_string_lengths():
    a = st.make_string("a_string", a=1)
    it = a.lengths()
    for j in range(1, 50):
        assert next(it)[0] == pytest.approx(1 / (j * (j + 1)), rel=1e-14)
    assert a.total_length == 1


def test_lapma_inversion():
    L = st.make_string("lapma", D=0.5, tau=14.134725, beta=0.01)
    ls, _ = L.lengths_above(0.0 + 1e-9)
    for j in (1, 2, 10, 100, 1000, 10000):
        assert st.counting(L, 1 / ls[j - 1]) == j


def test_lapma_oscillation_band():
    L = st.make_string("lapma", D=0.5, tau=14.134725, beta=0.01)
    vals = []
    for n in range(30, 60):
        for phase in np.linspace(0, 2 * math.pi, 16, endpoint=False):
            x = math.exp((2 * math.pi * n + phase) / 14.134725)
            vals.append(st.counting(L, x) * x ** -0.5)
    vals = np.array(vals)
    assert vals.min() >= 1 - 0.02 - 0.02 and vals.max() <= 1 + 0.02 + 0.02
    assert abs(vals.min() - 0.98) <= 0.02 and abs(vals.max() - 1.02) <= 0.02


def test_bad_parameters():
    with pytest.raises(BadParameter):
        st.make_string("a_string", a=-1)
    with pytest.raises(BadParameter):
        st.make_string("lapma", D=0.5, tau=14.0, beta=0.2)
    with pytest.raises(BadParameter):
        st.make_string("self_similar", ratios=[0.5, 0.6], gaps=[0.1])


def test_counting_examples():
    cs = st.make_string("cantor")
    assert st.counting(cs, 3) == 1
    assert st.counting(cs, 9) == 3
    assert st.counting(cs, 2) == 0


def test_tube_exact_examples():
    cs = st.make_string("cantor")
    assert st.tube_exact(cs, 1 / 18) == pytest.approx(7 / 9, rel=1e-14)
    assert st.tube_exact(cs, 1 / 6) == pytest.approx(1)
    assert st.tube_exact(cs, 0.4) == pytest.approx(1)
    a = st.make_string("a_string", a=1)
    assert st.tube_exact(a, 0.25) == pytest.approx(1)


def test_tube_exact_vs_brute_force():
    cs = st.make_string("cantor")
    rng = np.random.default_rng(11)
    for e in 10 ** rng.uniform(-6, -0.5, 30):
        assert st.tube_exact(cs, e) == pytest.approx(brute_tube(cantor_lengths(60), e) +
                                                     (2 / 3) ** 60, rel=1e-12)
    a = st.make_string("a_string", a=1)
    J = 200000
    ls = [(1 / (j * (j + 1)), 1) for j in range(1, J + 1)]
    for e in (1e-3, 1e-4, 3e-5):
        assert st.tube_exact(a, e) == pytest.approx(brute_tube(ls, e) + 1 / (J + 1), rel=1e-12)


def test_tube_exact_explicit_and_self_similar():
    ex_ = st.make_string("explicit", lengths=[0.5, (0.1, 3), 0.05])
    assert st.tube_exact(ex_, 0.04) == pytest.approx(0.08 + 3 * 0.08 + 0.05)
    ss = st.make_string("self_similar", ratios=[Fraction(1, 3), Fraction(1, 3)], gaps=[Fraction(1, 3)])
    cs = st.make_string("cantor")
    for e in (1e-4, 0.003, 0.05):
        assert st.tube_exact(ss, e) == pytest.approx(st.tube_exact(cs, e), rel=1e-12)


def test_geometric_zeta_forms():
    cs = st.make_string("cantor")
    g = st.geometric_zeta(cs)
    assert g.is_closed
    assert ex.evaluate(g.closed, 2.0) == pytest.approx(1 / 7)
    ss = st.make_string("self_similar", ratios=[Fraction(1, 3), Fraction(1, 3)], gaps=[Fraction(1, 3)])
    for z in (1.5, 0.9 + 2j):
        want = 3.0 ** -z / (1 - 2 * 3.0 ** -z)
        assert ex.evaluate(st.geometric_zeta(ss).closed, z) == pytest.approx(want, rel=1e-13)
    a = st.make_string("a_string", a=1)
    assert not st.geometric_zeta(a).is_closed
    pv = st.zeta_partial(a, 2)
    assert abs(pv.value - (math.pi ** 2 / 3 - 3)) <= 1e-10
    assert pv.tail_bound <= 1e-12
    with pytest.raises(Divergent):
        st.zeta_partial(a, 0.4)


def test_string_rfd_zeta():
    cs = st.make_string("cantor")
    r = st.string_rfd_zeta(cs)
    for z in (1.5, 0.3 + 4j):
        assert r(z) == pytest.approx(2 ** (1 - z) / (z * (3 ** z - 2)), rel=1e-13)
    D = math.log(2) / math.log(3)
    w = complex(D, 2 * math.pi / math.log(3))
    got = ex.residue(r.expr, w)
    assert got == pytest.approx(st.rfd_residue(1 / (2 * math.log(3)), w), rel=1e-12)


def test_abscissa_estimates():
    cs = st.make_string("cantor")
    ab = st.abscissa_estimate(cs)
    assert ab.hi - ab.lo <= 1e-6 and ab.lo <= math.log(2) / math.log(3) <= ab.hi
    ab = st.abscissa_estimate(st.make_string("a_string", a=2))
    assert ab.lo <= 1 / 3 <= ab.hi
    assert st.abscissa_estimate(st.make_string("explicit", lengths=[0.5, 0.25])).entire


def test_abscissa_matches_moran():
    ss = st.make_string("self_similar", ratios=[Fraction(1, 2), Fraction(1, 3)], gaps=[Fraction(1, 6)])
    sig = mo.real_dimension(mo.DirichletPolynomial.from_ratios([Fraction(1, 2), Fraction(1, 3)]))
    ab = st.abscissa_estimate(ss)
    assert abs(ab.value - sig) <= 1e-6


def test_tube_monotone_concave_and_capped():
    rng = np.random.default_rng(5)
    for s_ in (st.make_string("cantor"), st.make_string("a_string", a=1),
               st.make_string("generalized_cantor", a=Fraction(1, 4))):
        eps = np.sort(rng.uniform(1e-5, 0.6, 100))
        v = np.array([st.tube_exact(s_, e) for e in eps])
        assert np.all(np.diff(v) >= -1e-15)
        first = next(iter(s_.lengths()))[0]
        assert np.allclose(v[eps >= first / 2], s_.total_length)


def test_json_roundtrip():
    for s_ in (st.make_string("cantor"), st.make_string("a_string", a=1.5),
               st.make_string("self_similar", ratios=[Fraction(1, 3), Fraction(1, 4)], gaps=[Fraction(1, 5)])):
        back = st.from_json(s_.to_json())
        assert st.tube_exact(back, 0.01) == st.tube_exact(s_, 0.01)
