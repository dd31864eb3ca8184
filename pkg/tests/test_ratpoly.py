import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kstab.errors import BadBracket, DomainMismatch, IntervalOutOfDomain, NoConvergence, Overflow
from kstab.ratpoly import (Interval, PiecewisePoly, Poly, as_rational, bracket_root, count_roots, exp_moment,
                           format_rational, nonnegative_on, poly_gcd, positive_on_open, pw_integrate, pw_moment,
                           squarefree_part)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)
polys = st.lists(rationals, min_size=0, max_size=5).map(lambda cs: Poly(tuple(cs)))


def rand_pw(rng, pieces=3, deg=3):
    cuts = sorted(rng.sample(range(-30, 30), pieces + 1))
    return PiecewisePoly(tuple(Fraction(c, 10) for c in cuts),
                         tuple(Poly(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(deg + 1)))
                               for _ in range(pieces)))


def quad_pw(f, weight=lambda x: 1.0):
    return sum(quad(lambda x, p=p: float(p(x)) * weight(x), float(lo), float(hi), epsabs=1e-15, epsrel=1e-13)[0]
               for lo, hi, p in f.intervals())


def test_as_rational_inputs():
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(0.5) == Fraction(1, 2)
    assert as_rational(2) == 2
    assert format_rational(Fraction(-7, 3)) == "-7/3"
    assert format_rational(Fraction(4)) == "4"


def test_interval():
    iv = Interval(-1, 3)
    assert iv.width == 4 and 0 in iv and 5 not in iv
    with pytest.raises(ValueError):
        Interval(2, 1)


@given(polys, polys, rationals)
def test_ring_ops_match_evaluation(p, q, x):
    assert (p + q)(x) == p(x) + q(x)
    assert (p - q)(x) == p(x) - q(x)
    assert (p * q)(x) == p(x) * q(x)


@given(polys, polys)
def test_divmod_identity(p, q):
    if q.is_zero():
        return
    quo, rem = p.divmod(q)
    assert quo * q + rem == p
    assert rem.degree < q.degree


@given(polys, rationals, rationals)
def test_antideriv_and_integrate(p, a, b):
    assert p.antideriv().deriv() == p
    assert p.integrate(a, b) == p.antideriv()(b) - p.antideriv()(a)


@given(polys, rationals, rationals, rationals)
def test_compose_linear(p, a, b, x):
    assert p.compose_linear(a, b)(x) == p(a + b * x)
    assert p.shift(a)(x) == p(x + a)


def test_degree_and_printing():
    assert Poly().degree == -1
    assert Poly((1, 0, 0)).degree == 0
    assert Poly((Fraction(1, 2), -1, 3)).to_str() == "1/2 - α + 3*α^2"


def test_gcd_and_squarefree():
    x = Poly.x()
    p = (x - 1) ** 2 * (x + 2)
    q = (x - 1) * (x - 3)
    assert poly_gcd(p, q) == (x - 1).monic()
    assert squarefree_part(p) == ((x - 1) * (x + 2)).monic()


def test_count_roots():
    x = Poly.x()
    p = (x - Fraction(1, 3)) * (x - 2) * (x + 5)
    assert count_roots(p, 0, 1) == 1
    assert count_roots(p, -10, 10) == 3
    assert count_roots(p, 2, 3) == 0  # half-open (lo, hi]


@pytest.mark.parametrize("p, lo, hi, nonneg, pos", [
    (Poly.x() ** 2, -1, 1, True, False),          # double root inside
    (Poly((1, 0, 1)), -3, 3, True, True),
    (Poly.x(), 0, 1, True, True),                 # zero only at the endpoint
    (Poly.x(), -1, 1, False, False),
    ((Poly.x() - 2) ** 4 * (Poly.x() + 1), -1, 3, True, False),  # degree 5
    (Poly((1, -3, 0, 4)), -Fraction(1, 2), 2, True, False),      # 1 - 3x + 4x^3 touches 0 at x = 1/2
])
def test_sign_checks(p, lo, hi, nonneg, pos):
    assert nonnegative_on(p, lo, hi) is nonneg
    assert positive_on_open(p, lo, hi) is pos


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=6), min_size=1, max_size=4),
       st.fractions(min_value=Fraction(1, 100), max_value=2, max_denominator=100))
@settings(max_examples=60)
def test_nonnegative_agrees_with_sampling(roots, lift):
    x = Poly.x()
    p = Poly.const(1)
    for r in roots:
        p = p * (x - r) ** 2
    assert nonnegative_on(p, -4, 4)
    assert not nonnegative_on(p - lift * max(abs(p(Fraction(k, 8))) for k in range(-32, 33)), -4, 4)


def test_piecewise_basics():
    f = PiecewisePoly.from_pieces([(0, 1, Poly.x()), (1, 3, Poly((2, -1)))])
    assert f(Fraction(1, 2)) == Fraction(1, 2)
    assert f(1) == 1  # right piece at the breakpoint
    assert f.is_continuous()
    assert f.domain == Interval(0, 3)
    with pytest.raises(IntervalOutOfDomain):
        f(4)
    g = PiecewisePoly.constant(1, 0, 2)
    with pytest.raises(DomainMismatch):
        f + g


def test_restrict_and_refine():
    f = PiecewisePoly.from_pieces([(0, 1, Poly.x()), (1, 3, Poly((2, -1)))])
    r = f.restrict(Interval(Fraction(1, 2), 2))
    assert r.domain == Interval(Fraction(1, 2), 2)
    assert pw_integrate(r) == pw_integrate(f, Interval(Fraction(1, 2), 2))
    assert pw_integrate(f.refine([Fraction(1, 3), 2])) == pw_integrate(f)
    assert pw_integrate(f, Interval(1, 1)) == 0
    with pytest.raises(IntervalOutOfDomain):
        pw_integrate(f, Interval(-1, 1))


def test_piecewise_products_merge_breakpoints():
    f = PiecewisePoly.from_pieces([(0, 1, Poly.x()), (1, 2, Poly.const(1))])
    g = PiecewisePoly.from_pieces([(0, Fraction(3, 2), Poly.const(2)), (Fraction(3, 2), 2, Poly.x())])
    h = f * g
    assert h.breakpoints == (0, 1, Fraction(3, 2), 2)
    for x in [Fraction(1, 4), Fraction(5, 4), Fraction(7, 4)]:
        assert h(x) == f(x) * g(x)


def test_random_pw_integrals_against_quad():
    rng = random.Random(3)
    for _ in range(30):
        f = rand_pw(rng)
        k = rng.randint(0, 3)
        scale = sum(quad(lambda x, p=p: abs(float(p(x))) * (1.0 + abs(x) ** k), float(lo), float(hi))[0]
                    for lo, hi, p in f.intervals())
        assert abs(float(pw_integrate(f)) - quad_pw(f)) <= 1e-12 * scale
        assert abs(float(pw_moment(f, k)) - quad_pw(f, lambda x: x ** k)) <= 1e-12 * scale


@pytest.mark.parametrize("eta", [-40.0, -3.0, -1e-7, 1e-9, 0.5, 7.0, 60.0])
def test_exp_moment_against_quad(eta):
    rng = random.Random(int(abs(eta) * 100) + 1)
    f = rand_pw(rng, pieces=2, deg=4)
    w = lambda x: math.exp(-eta * x)
    want = quad_pw(f, w)
    scale = sum(quad(lambda x, p=p: abs(float(p(x))) * w(x), float(lo), float(hi))[0] for lo, hi, p in f.intervals())
    assert abs(exp_moment(f, eta) - want) <= 1e-11 * scale


def test_exp_moment_eta_zero_is_exact_integral():
    f = PiecewisePoly.from_pieces([(-1, 2, Poly((1, 2, 3)))])
    assert exp_moment(f, 0.0) == float(pw_integrate(f))


def test_exp_moment_overflow_guard():
    f = PiecewisePoly.constant(1, -2, 2)
    with pytest.raises(Overflow):
        exp_moment(f, 400.0)


def test_bracket_root_finds_root():
    res = bracket_root(lambda x: 2.0 - x ** 3, (0.0, 5.0), 1e-14)
    assert abs(res.root - 2 ** (1 / 3)) < 1e-12
    assert res.iterations < 200


def test_bracket_root_errors():
    with pytest.raises(BadBracket):
        bracket_root(lambda x: -x, (1.0, 2.0), 1e-12)
    with pytest.raises(BadBracket):
        bracket_root(lambda x: -x, (1.0, 1.0), 1e-12)
    with pytest.raises(NoConvergence):
        bracket_root(lambda x: 2.0 - x ** 3, (0.0, 10.0), 0.0, max_iter=5)
