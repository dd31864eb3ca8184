"""Reproduction checks shared by ``kstab reproduce`` and the test suite.

Every check returns ``(ok, detail)``.  Numeric cross-checks use Gauss-Legendre
quadrature (adaptive Simpson for the soliton mu) on float evaluations, which
shares no code with the exact and closed-form kernels.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Callable

import numpy as np

from . import series as catalog
from .errors import NotAWeight
from .invariants import delta_p1, dh, lambda_fixed, lambda_identity_gap, s_from_zariski, s_point_p1
from .ratpoly import PiecewisePoly, Poly, exp_moment, pw_integrate, pw_moment
from .series import GitClass
from .verdict import Level, li_p1, weighted_verdict
from .weights import (Constant, Exponential, PolyExp, Tabulated, WeightSum, adaptive_simpson, futaki_g, is_weight,
                      solve_soliton, weight_family, weighted_moment)

CONIC_CS = (Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))
FAMILY = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4))
MU_BOUND_2_23B = 0.739237


@dataclass(frozen=True)
class Check:
    number: int
    group: str
    name: str
    run: Callable[..., tuple[bool, str]]
    seeded: bool = False

    def matches(self, only: str | None) -> bool:
        if not only:
            return True
        for tok in (t.strip() for t in only.split(",")):
            if tok.isdigit():
                if int(tok) == self.number:
                    return True
            elif tok == self.group or tok in self.name:
                return True
        return False


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    ok: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


@lru_cache(maxsize=None)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _quad(fn, a, b, n: int = 40) -> float:
    """Gauss-Legendre on [a, b]; exact for polynomials to degree 2n-1 and fast on smooth integrands."""
    a, b = float(a), float(b)
    nodes, weights = _gauss(n)
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    return half * math.fsum(w * fn(mid + half * x) for x, w in zip(nodes.tolist(), weights.tolist()))


def _simpson(fn, a, b) -> float:
    return adaptive_simpson(fn, float(a), float(b), rel_tol=1e-12)


def _quad_pw(f: PiecewisePoly, weight=lambda a: 1.0) -> float:
    return math.fsum(_quad(lambda x, p=p: float(p(x)) * weight(x), lo, hi) for lo, hi, p in f.intervals())


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# -- 1-3: conic on P^2 ------------------------------------------------------------

def check_profile_s():
    s = s_from_zariski(catalog.builtin("p2-wt21-profile"))
    return s == 1, f"S = {s}"


def check_conic_points():
    s = catalog.builtin("conic-P2")
    gen, p1 = s_point_p1(s, Constant(1)), s_point_p1(s, Constant(1), "p1")
    return (gen, p1) == (Fraction(1, 6), Fraction(1, 3)), f"S(generic) = {gen}, S(p1) = {p1}"


def conic_delta_formula(c: Fraction) -> Fraction:
    return min(3 / (3 - 2 * c), (6 - 6 * c) / (3 - 2 * c))


def check_conic_delta():
    bad, parts = [], []
    for c in CONIC_CS:
        rep = delta_p1(catalog.builtin("conic-P2", c=c), Constant(1))
        want = conic_delta_formula(c)
        ok = rep.delta == want and (rep.delta > 1) == (c < Fraction(3, 4))
        if c == Fraction(3, 4):
            ok = ok and rep.delta == 1 and rep.argmin == "p2"
        parts.append(f"c={c}: {rep.delta}")
        if not ok:
            bad.append(str(c))
    return not bad, "; ".join(parts) + (f" (mismatch at {', '.join(bad)})" if bad else "")


# -- 4-7: weighted examples ---------------------------------------------------------

def quadrature_mu(s, g, label: str) -> float:
    """``int k g vol / int g vol`` by adaptive Simpson on float evaluations."""
    vol, k = s.alpha_vol(), s.alpha_k(label)
    fine = vol.refine(k.breakpoints)
    num = math.fsum(_simpson(lambda x: float(k(x)) * g(x) * float(vol(x)), lo, hi) for lo, hi, _ in fine.intervals())
    den = math.fsum(_simpson(lambda x: g(x) * float(vol(x)), lo, hi) for lo, hi, _ in fine.intervals())
    return float(s.scale) * num / den


def check_soliton_2_23b():
    s = catalog.builtin("MM2.23b")
    sol = solve_soliton(s)
    g = Exponential(sol.eta0)
    (label, mu), = lambda_fixed(s, g).mus
    mu_q = quadrature_mu(s, g, label)
    level = weighted_verdict(s, g).level
    ok = (abs(sol.residual) < 1e-12 * sol.scale and _rel(mu, mu_q) < 1e-9
          and mu < MU_BOUND_2_23B and mu < 0.75 and level is Level.K_POLYSTABLE)
    return ok, (f"eta0 = {sol.eta0:.13g}, residual/scale = {abs(sol.residual) / sol.scale:.2e}, "
                f"mu = {mu:.12g} (quadrature {mu_q:.12g}), verdict {level.value}")


def check_unweighted_2_28():
    s = catalog.builtin("MM2.28")
    v, fut = weighted_moment(s, Constant(1), 0), futaki_g(s, Constant(1))
    try:
        weighted_verdict(s, Constant(1))
        refused = False
    except NotAWeight:
        refused = True
    ok = v == Fraction(40, 3) and fut == Fraction(-63, 160) and refused
    return ok, f"V = {v}, Fut = {fut}, NotAWeight raised: {refused}"


def check_sweep():
    bad, mus = [], []
    for name in ("MM2.28", "MM3.14"):
        base = catalog.builtin(name)
        for c in FAMILY:
            g = weight_family(base, c)
            (_, mu), = lambda_fixed(base, g).mus
            mus.append(mu)
            stable = weighted_verdict(base.with_git(GitClass.STABLE), g).level
            unstable = weighted_verdict(base.with_git(GitClass.UNSTABLE), g).level
            if not (is_weight(base, g, 1e-9) and 0 < mu < 1
                    and stable is Level.K_POLYSTABLE and unstable is Level.K_UNSTABLE):
                bad.append(f"{name} c={c}")
    detail = f"{len(mus)} weights, mu in [{min(mus):.6g}, {max(mus):.6g}]"
    return not bad, detail + (f"; failed: {', '.join(bad)}" if bad else "")


def catalog_series():
    out = [catalog.builtin(n) for n in catalog.SERIES_NAMES if n != "conic-P2"]
    out += [catalog.builtin("conic-P2", c=c) for c in CONIC_CS]
    return out


def check_lambda_identity():
    worst, n, exact_ok = 0.0, 0, True
    for s in catalog_series():
        weights = [weight_family(s, c) for c in FAMILY] + [Constant(1)]
        for g in weights:
            if not is_weight(s, g, 1e-9):
                continue
            gap = lambda_identity_gap(s, lambda_fixed(s, g))
            if isinstance(g, Constant) and gap != 0:
                exact_ok = False
            worst = max(worst, abs(float(gap)))
            n += 1
    return worst < 1e-9 and exact_ok and n > 0, f"{n} (series, weight) pairs, max |gap| = {worst:.2e}"


# -- 8-11: numerics -----------------------------------------------------------------

def random_weight(rng: random.Random, s):
    iv = s.alpha_interval
    kind = rng.choice(("constant", "exp", "polyexp", "sum", "tabulated"))
    if kind == "constant":
        return Constant(Fraction(rng.randint(1, 20), rng.randint(1, 9)))
    if kind == "exp":
        return Exponential(rng.uniform(-2, 2))
    if kind == "polyexp":
        return PolyExp(Poly((Fraction(rng.randint(2, 6)), Fraction(rng.randint(-1, 1), 2))), rng.uniform(-1, 1))
    if kind == "sum":
        return WeightSum((Constant(Fraction(rng.randint(1, 5))), Exponential(rng.uniform(-1, 1))))
    lo, hi = iv.lo, iv.hi
    nodes = [lo + (hi - lo) * Fraction(i, 10) for i in range(11)]
    return Tabulated(tuple((a, 1.0 + 0.5 * math.sin(float(a)) ** 2 + rng.random()) for a in nodes))


def dh_by_quadrature(s, g) -> tuple[float, float]:
    d = dh(s, g)
    vol = s.alpha_vol()
    # tabulated weights have kinks at their nodes; split there too
    pieces = list(vol.refine(g.nodes if isinstance(g, Tabulated) else ()).intervals())
    total = math.fsum(_quad(d.density, lo, hi) for lo, hi, _ in pieces)
    bary = math.fsum(_quad(lambda x: x * d.density(x), lo, hi) for lo, hi, _ in pieces)
    return total, bary


def check_dh(seed: int = 0):
    rng = random.Random(seed)
    pool = catalog_series()
    worst = 0.0
    for _ in range(20):
        s = rng.choice(pool)
        g = random_weight(rng, s)
        total, bary = dh_by_quadrature(s, g)
        worst = max(worst, abs(total - 1), abs(bary + float(futaki_g(s, g))))
    return worst < 1e-12, f"20 random pairs, max deviation = {worst:.2e}"


def random_pw(rng: random.Random, max_pieces: int = 4, max_deg: int = 4) -> PiecewisePoly:
    n = rng.randint(1, max_pieces)
    cuts = sorted({Fraction(rng.randint(-40, 40), 10) for _ in range(n + 1)})
    while len(cuts) < 2:
        cuts.append(cuts[-1] + 1)
    pieces = tuple(Poly(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(rng.randint(1, max_deg + 1))))
                   for _ in range(len(cuts) - 1))
    return PiecewisePoly(tuple(cuts), pieces)


def _scale_of(f: PiecewisePoly, weight=lambda a: 1.0) -> float:
    return math.fsum(_quad(lambda x, p=p: abs(float(p(x))) * weight(x), lo, hi) for lo, hi, p in f.intervals())


def check_kernel(seed: int = 0):
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(100):
        f = random_pw(rng)
        k = rng.randint(0, 3)
        eta = rng.uniform(-3, 3)
        ew = lambda x, eta=eta: math.exp(-eta * x)
        # relative to int |f| so cancellation does not inflate the error
        pairs = [
            (float(pw_integrate(f)), _quad_pw(f), _scale_of(f)),
            (float(pw_moment(f, k)), _quad_pw(f, lambda x: x ** k), _scale_of(f, lambda x: abs(x) ** k)),
            (exp_moment(f, eta), _quad_pw(f, ew), _scale_of(f, ew)),
        ]
        for exact, quad, scale in pairs:
            if scale > 0:
                worst = max(worst, abs(exact - quad) / scale)
    return worst < 1e-10, f"100 random piecewise polynomials, max relative error = {worst:.2e}"


def li_delta(coeffs) -> Fraction:
    coeffs = [a for a in coeffs if a != 0]
    return 2 * min([1 - a for a in coeffs] + [Fraction(1)]) / (2 - sum(coeffs, Fraction(0)))


def random_boundary(rng: random.Random, max_points: int = 5):
    while True:
        pts = [(f"q{i}", Fraction(rng.randint(0, 11), 12)) for i in range(rng.randint(0, max_points))]
        if sum((a for _, a in pts), Fraction(0)) < 2:
            return pts


def check_li(seed: int = 0):
    rng = random.Random(seed)
    fails = []
    for _ in range(200):
        pts = random_boundary(rng)
        level = li_p1(pts).level
        d = li_delta([a for _, a in pts])
        if (level is Level.K_STABLE) != (d > 1 and any(a for _, a in pts)) or level.semistable != (d >= 1):
            fails.append(pts)
        for perm in list(permutations(pts))[:6]:
            if li_p1(list(perm)).level is not level:
                fails.append(perm)
    half = Fraction(1, 2)
    fixed = [
        li_p1([("a", half), ("b", half), ("c", half)]).level is Level.K_STABLE,
        li_p1([("a", Fraction(1, 3))]).level is Level.K_UNSTABLE,
        li_p1([]).level is Level.K_POLYSTABLE,
    ]
    return not fails and all(fixed), f"200 random boundaries, {len(fails)} disagreements, named cases {fixed}"


def check_solver(seed: int = 0):
    rng = random.Random(seed)
    worst = 0.0
    for s in catalog_series():
        h1 = s.alpha_vol() * Poly.x()
        h2 = s.alpha_vol() * Poly((0, 0, 1))
        for _ in range(3):
            eta = rng.uniform(-2, 2)
            step = 1e-4
            fd = (exp_moment(h1, eta + step) - exp_moment(h1, eta - step)) / (2 * step)
            exact = -exp_moment(h2, eta)
            if not exact < 0:
                return False, f"{s.name}: derivative not negative at eta = {eta}"
            worst = max(worst, _rel(fd, exact))
    eta0 = solve_soliton(catalog.builtin("conic-P2")).eta0
    ok = worst < 1e-6 and abs(eta0) < 1e-12
    return ok, f"max finite-difference error = {worst:.2e}, symmetric eta0 = {eta0:.1e}"


CHECKS = (
    Check(1, "conic", "profile S-invariant", check_profile_s),
    Check(2, "conic", "conic point S-values", check_conic_points),
    Check(3, "conic", "conic delta formula", check_conic_delta),
    Check(4, "soliton", "2.23b soliton and mu bound", check_soliton_2_23b),
    Check(5, "cubic", "2.28 unweighted moments", check_unweighted_2_28),
    Check(6, "cubic", "2.28/3.14 weight sweep", check_sweep),
    Check(7, "identity", "lambda identity", check_lambda_identity),
    Check(8, "numerics", "DH normalization", check_dh, seeded=True),
    Check(9, "numerics", "kernel oracle equivalence", check_kernel, seeded=True),
    Check(10, "li", "Li criterion properties", check_li, seeded=True),
    Check(11, "numerics", "solver properties", check_solver, seeded=True),
)


def run(only: str | None = None, seed: int = 0) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        if not check.matches(only):
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = check.run(seed) if check.seeded else check.run()
        except Exception as exc:  # a crash is a failure, reported like one
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(check.number, check.name, ok, detail, time.perf_counter() - t0))
    return results
