import math
import random
from fractions import Fraction

import pytest
import sympy as sp
from scipy.integrate import quad

from kstab.errors import PreconditionFailed, UnknownPoint
from kstab.invariants import (GENERIC, delta_p1, dh, dh_average, fl, lambda_fixed, lambda_identity_gap,
                              s_from_zariski, s_point_p1, weighted_volume)
from kstab.ratpoly import Poly
from kstab.series import SERIES_NAMES, builtin, load_series
from kstab.weights import Constant, Exponential, PolyExp, WeightSum, futaki_g, is_weight, solve_soliton, weight_family

from conftest import FIXTURES

a = sp.symbols("a")

# hand-written (lo, hi, vol) in the moment coordinate
SYMPY_VOL = {
    "MM2.28": [(-1, 0, (3 + 2 * a) ** 2), (0, 3, (3 - a) ** 2)],
    "MM3.14": [(-1, 0, (3 + 2 * a) ** 2), (0, 1, (3 - a) ** 2)],
    "MM2.23a0": [(-1, 0, 2 * (2 + a) ** 2), (0, 2, 2 * (2 - a) ** 2)],
    "MM2.23b": [(-3, -2, (3 + a) ** 2), (-2, 1, ((5 + a) / 3) ** 2), (1, 3, (3 - a) ** 2)],
    "conic-P2": [(-1, 0, (1 + a) / 2), (0, 1, (1 - a) / 2)],
}

# committed exact values (V, Fut) for g = 1
FIXTURE_MOMENTS = {
    "MM2.28": (Fraction(40, 3), Fraction(-63, 160)),
    "MM3.14": (Fraction(32, 3), Fraction(-15, 128)),
    "MM2.23a0": (Fraction(10), Fraction(-1, 12)),
    "MM2.23b": (Fraction(10), Fraction(-1, 5)),
    "conic-P2": (Fraction(1, 2), Fraction(0)),
}


def sympy_moment(name, k):
    val = sum(sp.integrate(a ** k * v, (a, lo, hi)) for lo, hi, v in SYMPY_VOL[name])
    return Fraction(int(sp.numer(val)), int(sp.denom(val)))


@pytest.mark.parametrize("name", list(SYMPY_VOL))
def test_unweighted_moments_exact(name):
    s = builtin(name)
    v, m1 = sympy_moment(name, 0), sympy_moment(name, 1)
    assert weighted_volume(s, Constant(1)) == v
    assert futaki_g(s, Constant(1)) == -m1 / v
    assert (v, -m1 / v) == FIXTURE_MOMENTS[name]


def test_profile_s_invariant():
    assert s_from_zariski(builtin("p2-wt21-profile")) == 1


def test_conic_point_s_values():
    s = builtin("conic-P2")
    assert s_point_p1(s, Constant(1)) == Fraction(1, 6)
    assert s_point_p1(s, Constant(1), GENERIC) == Fraction(1, 6)
    assert s_point_p1(s, Constant(1), "p1") == Fraction(1, 3)
    assert s_point_p1(s, Constant(1), "p0") == Fraction(1, 6)


@pytest.mark.parametrize("c", [Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)])
def test_conic_delta_formula(c):
    rep = delta_p1(builtin("conic-P2", c=c), Constant(1))
    assert rep.delta == min(3 / (3 - 2 * c), (6 - 6 * c) / (3 - 2 * c))
    assert (rep.delta > 1) == (c < Fraction(3, 4))
    for label, aa, sv, ratio in rep.per_point:
        assert ratio == aa / sv


def test_conic_delta_at_threshold():
    rep = delta_p1(builtin("conic-P2", c=Fraction(3, 4)), Constant(1))
    assert rep.delta == 1 and rep.argmin == "p2"


def test_point_errors():
    with pytest.raises(UnknownPoint):
        s_point_p1(builtin("conic-P2"), Constant(1), "nowhere")
    with pytest.raises(PreconditionFailed):
        s_point_p1(builtin("MM2.28"), Constant(1))
    with pytest.raises(PreconditionFailed):
        delta_p1(builtin("MM2.28"), Constant(1))


def test_fl():
    assert fl(Fraction(1), Fraction(2, 3)) == Fraction(1, 3)


def test_2_23b_mu_against_quad():
    s = builtin("MM2.23b")
    eta = solve_soliton(s).eta0
    mu = lambda_fixed(s, Exponential(eta)).mu("C2")
    vol = lambda x: (3 + x) ** 2 if x < -2 else (((5 + x) / 3) ** 2 if x < 1 else (3 - x) ** 2)
    k = lambda x: 0.0 if x < -2 else ((2 + x) / 3 if x < 1 else x)
    cuts = [-3, -2, 1, 3]
    num = sum(quad(lambda x: k(x) * math.exp(-eta * x) * vol(x), lo, hi, epsrel=1e-13)[0] for lo, hi in zip(cuts, cuts[1:]))
    den = sum(quad(lambda x: math.exp(-eta * x) * vol(x), lo, hi, epsrel=1e-13)[0] for lo, hi in zip(cuts, cuts[1:]))
    assert abs(mu - num / den) < 1e-11
    assert mu < 0.739237 < 0.75
    assert abs(mu - 0.7392364661101019) < 1e-10


def test_mm2_28_soliton_mu():
    s = builtin("MM2.28")
    mu = lambda_fixed(s, Exponential(solve_soliton(s).eta0)).mu("C")
    assert abs(mu - 0.22609771403686077) < 1e-10


@pytest.mark.parametrize("name", SERIES_NAMES)
@pytest.mark.parametrize("c", [0, Fraction(1, 2), 4])
def test_lambda_identity_for_weights(name, c):
    s = builtin(name)
    g = weight_family(s, c)
    assert is_weight(s, g, 1e-9)
    assert abs(lambda_identity_gap(s, lambda_fixed(s, g))) < 1e-9


@pytest.mark.parametrize("c", [Fraction(1, 10), Fraction(1, 2), Fraction(3, 4)])
def test_lambda_identity_exact_on_symmetric(c):
    s = builtin("conic-P2", c=c)
    lf = lambda_fixed(s, Constant(1))
    assert lambda_identity_gap(s, lf) == 0
    assert lf.lambda_ == Fraction(3 - 2 * c, 3)


def test_lambda_identity_fails_for_non_weight():
    s = builtin("MM2.28")
    assert lambda_identity_gap(s, lambda_fixed(s, Constant(1))) != 0


@pytest.mark.parametrize("seed", range(5))
def test_dh_normalization_random(seed):
    rng = random.Random(seed)
    s = builtin(rng.choice(SERIES_NAMES))
    g = rng.choice([Exponential(rng.uniform(-2, 2)), Constant(Fraction(rng.randint(1, 9), 4)),
                    WeightSum((Constant(1), Exponential(rng.uniform(-1, 1)))),
                    PolyExp(Poly((3, Fraction(1, 2))), rng.uniform(-1, 1))])
    d = dh(s, g)
    iv = s.alpha_interval
    cuts = sorted(set(float(x) for x in s.alpha_vol().breakpoints))
    total = sum(quad(d.density, lo, hi, epsabs=1e-15, epsrel=1e-13)[0] for lo, hi in zip(cuts, cuts[1:]))
    bary = sum(quad(lambda x: x * d.density(x), lo, hi, epsabs=1e-15, epsrel=1e-13)[0] for lo, hi in zip(cuts, cuts[1:]))
    assert abs(d.total - 1) < 1e-12 and abs(total - 1) < 1e-11
    assert abs(bary + float(futaki_g(s, g))) < 1e-11
    assert d.density(float(iv.lo)) >= 0


def test_dh_average_constant_is_one():
    s = builtin("MM2.28")
    one = s.alpha_vol().map(lambda p: Poly.const(1))
    assert dh_average(s, Constant(1), one) == 1


def test_symmetric_fixture_invariants():
    s = load_series(FIXTURES / "symmetric.toml")
    assert futaki_g(s, Constant(1)) == 0
    # tent f = 1 - |a|: lambda = int f^2 / int f = 2/3
    assert lambda_fixed(s, Constant(1)).lambda_ == Fraction(2, 3)
