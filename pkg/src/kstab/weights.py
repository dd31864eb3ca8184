"""Weight functions on the moment interval and the modified Futaki functional.

All integrals are taken in the normalized moment coordinate ``a`` (see
:class:`~kstab.series.RefinedSeries`).  Constant weights keep everything exact;
exponential and poly-exponential weights go through the closed forms of
:func:`~kstab.ratpoly.exp_moment`; tabulated weights use adaptive Simpson.
"""
from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BadBracket, DegenerateVolume, NoRoot, Overflow
from .ratpoly import (EXP_BOUND, Interval, PiecewisePoly, Poly, as_rational, bracket_root, exp_moment,
                      nonnegative_on, positive_on_open, pw_integrate)
from .series import RefinedSeries


@dataclass(frozen=True)
class Constant:
    c: Fraction

    def __post_init__(self):
        c = as_rational(self.c)
        if c <= 0:
            raise ValueError("constant weight must be positive")
        object.__setattr__(self, "c", c)

    def __call__(self, a):
        return float(self.c) if isinstance(a, float) else self.c


@dataclass(frozen=True)
class Exponential:
    """``g(a) = exp(-eta * a)``."""

    eta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))

    def __call__(self, a):
        return math.exp(-self.eta * float(a))


@dataclass(frozen=True)
class PolyExp:
    """``g(a) = p(a) * exp(-eta * a)`` with ``p > 0`` on the moment interval."""

    p: Poly
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))

    def __call__(self, a):
        return float(self.p(as_rational(a))) * math.exp(-self.eta * float(a))


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation of positive samples ``(a, value)``."""

    samples: tuple

    def __post_init__(self):
        pts = tuple((as_rational(a), float(v)) for a, v in self.samples)
        if len(pts) < 8:
            raise ValueError("tabulated weight needs at least 8 samples")
        if any(u[0] >= w[0] for u, w in zip(pts, pts[1:])):
            raise ValueError("sample abscissae must be strictly increasing")
        if any(v <= 0 for _, v in pts):
            raise ValueError("sample values must be positive")
        object.__setattr__(self, "samples", pts)

    @property
    def nodes(self) -> list[Fraction]:
        return [a for a, _ in self.samples]

    def __call__(self, a):
        if isinstance(a, float):
            xs = [float(x) for x, _ in self.samples]
            if not xs[0] <= a <= xs[-1]:
                raise ValueError(f"{a} outside tabulated range [{xs[0]}, {xs[-1]}]")
            i = min(bisect.bisect_right(xs, a) - 1, len(xs) - 2)
            v0, v1 = self.samples[i][1], self.samples[i + 1][1]
            return v0 + (a - xs[i]) / (xs[i + 1] - xs[i]) * (v1 - v0)
        a = as_rational(a)
        xs = self.nodes
        if not xs[0] <= a <= xs[-1]:
            raise ValueError(f"{a} outside tabulated range [{xs[0]}, {xs[-1]}]")
        i = min(bisect.bisect_right(xs, a) - 1, len(xs) - 2)
        (a0, v0), (a1, v1) = self.samples[i], self.samples[i + 1]
        t = float((a - a0) / (a1 - a0))
        return v0 + t * (v1 - v0)


@dataclass(frozen=True)
class WeightSum:
    """Formal sum of weights; integrals are linear over the terms."""

    terms: tuple

    def __call__(self, a):
        return sum(float(term(a)) for term in self.terms)


WeightSpec = Constant | Exponential | PolyExp | Tabulated | WeightSum


def scaled(g, c):
    """The weight ``c * g``."""
    c = as_rational(c)
    if isinstance(g, Constant):
        return Constant(g.c * c)
    if isinstance(g, Exponential):
        return PolyExp(Poly.const(c), g.eta)
    if isinstance(g, PolyExp):
        return PolyExp(g.p * c, g.eta)
    if isinstance(g, Tabulated):
        return Tabulated(tuple((a, v * float(c)) for a, v in g.samples))
    return WeightSum(tuple(scaled(t, c) for t in g.terms))


def check_weight(g, interval: Interval) -> list[str]:
    """Positivity of ``g`` on ``interval`` (empty list when fine)."""
    if isinstance(g, PolyExp):
        if not (nonnegative_on(g.p, interval.lo, interval.hi) and positive_on_open(g.p, interval.lo, interval.hi)
                and g.p(interval.lo) > 0 and g.p(interval.hi) > 0):
            return ["poly factor must be > 0 on the moment interval"]
    if isinstance(g, Tabulated):
        if g.nodes[0] > interval.lo or g.nodes[-1] < interval.hi:
            return [f"samples must span {interval}"]
    if isinstance(g, WeightSum):
        return [p for t in g.terms for p in check_weight(t, interval)]
    return []


# -- integration against a weight -----------------------------------------------

def adaptive_simpson(fn, a: float, b: float, rel_tol: float = 1e-12, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = simpson(fa, fm, fb, b - a)
    scale = abs(whole) + (b - a) * (abs(fa) + abs(fm) + abs(fb)) / 3.0
    tol = max(rel_tol * scale, 1e-300)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    return rec(a, b, fa, fm, fb, whole, tol, max_depth)


@functools.singledispatch
def integrate_against(g, h: PiecewisePoly):
    """``int g(a) h(a) da`` over the domain of ``h`` (in moment coordinates)."""
    raise TypeError(f"unsupported weight {g!r}")


@integrate_against.register
def _(g: Constant, h):
    return g.c * pw_integrate(h)


@integrate_against.register
def _(g: Exponential, h):
    return exp_moment(h, g.eta)


@integrate_against.register
def _(g: PolyExp, h):
    return exp_moment(h * g.p, g.eta)


@integrate_against.register
def _(g: WeightSum, h):
    parts = [integrate_against(t, h) for t in g.terms]
    if all(isinstance(p, Fraction) for p in parts):
        return sum(parts, Fraction(0))
    return math.fsum(float(p) for p in parts)


@integrate_against.register
def _(g: Tabulated, h):
    lo, hi = h.breakpoints[0], h.breakpoints[-1]
    if g.nodes[0] > lo or g.nodes[-1] < hi:
        raise ValueError(f"tabulated weight does not span [{lo}, {hi}]")
    fine = h.refine(g.nodes)
    total = []
    for a, b, p in fine.intervals():
        if p.is_zero():
            continue
        total.append(adaptive_simpson(lambda x, p=p: p(x) * g(x), float(a), float(b)))
    return math.fsum(total)


def abs_alpha(h: PiecewisePoly) -> PiecewisePoly:
    """``|a| * h(a)``."""
    fine = h.refine([0])
    x = Poly.x()
    return PiecewisePoly(fine.breakpoints,
                         tuple(p * x if lo >= 0 else p * (-x) for lo, _, p in fine.intervals()))


def _alpha_pow(s: RefinedSeries, k: int) -> PiecewisePoly:
    return s.alpha_vol() * (Poly.x() ** k)


def weighted_moment(s: RefinedSeries, g, k: int):
    """``int a^k g(a) vol(a) da`` over the moment interval (exact for Constant g)."""
    return integrate_against(g, _alpha_pow(s, k))


def moment_scale(s: RefinedSeries, g) -> float:
    """``int |a| g(a) vol(a) da``: the natural size of the first moment."""
    return float(integrate_against(g, abs_alpha(s.alpha_vol())))


def futaki_g(s: RefinedSeries, g):
    v = weighted_moment(s, g, 0)
    if v == 0:
        raise DegenerateVolume(f"{s.name}: weighted volume vanishes")
    return -weighted_moment(s, g, 1) / v


def is_weight(s: RefinedSeries, g, tol: float = 1e-9) -> bool:
    """Whether ``g`` kills the first moment, relative to ``int |a| g vol``."""
    m1 = weighted_moment(s, g, 1)
    if m1 == 0:
        return True
    return abs(float(m1)) <= tol * moment_scale(s, g)


# -- soliton candidate ---------------------------------------------------------

@dataclass(frozen=True)
class SolitonSolve:
    eta0: float
    residual: float
    iterations: int
    scale: float


def _solve_exponent(s: RefinedSeries, tol: float, m1_offset=0, abs_offset=0,
                    bound: float = EXP_BOUND) -> tuple[float, int]:
    """Root in ``eta`` of ``m1_offset + int a exp(-eta a) vol``.

    The function is strictly decreasing in ``eta``.  It is divided by
    ``abs_offset + int |a| exp(-eta a) vol`` (positive, same zero) so that
    ``tol`` is scale-relative.  The bracket doubles outward from [-1, 1].
    """
    h1 = _alpha_pow(s, 1)
    habs = abs_alpha(s.alpha_vol())
    m1_offset, abs_offset = float(m1_offset), float(abs_offset)

    def normalized(eta):
        num = m1_offset + exp_moment(h1, eta, bound=bound)
        return num / (abs_offset + exp_moment(habs, eta, bound=bound))

    def expand(x, want_positive):
        while True:
            v = normalized(x)
            if v == 0 or (v > 0) == want_positive:
                return x, v
            x *= 2

    try:
        lo, vlo = expand(-1.0, True)
        hi, vhi = expand(1.0, False)
    except Overflow:
        raise NoRoot(f"{s.name}: the first moment keeps one sign for every exponential weight") from None
    if vlo == 0:
        return lo, 0
    if vhi == 0:
        return hi, 0
    try:
        res = bracket_root(normalized, (lo, hi), tol)
    except BadBracket as exc:  # pragma: no cover - excluded by the expansion above
        raise NoRoot(str(exc)) from None
    return res.root, res.iterations


def solve_soliton(s: RefinedSeries, tol: float = 1e-12) -> SolitonSolve:
    """Exponent ``eta0`` with ``int a exp(-eta0 a) vol(a) da = 0``."""
    eta0, iterations = _solve_exponent(s, tol)
    g = Exponential(eta0)
    return SolitonSolve(eta0, float(weighted_moment(s, g, 1)), iterations, moment_scale(s, g))


def weight_family(s: RefinedSeries, c=0, tol: float = 1e-12):
    """Weight ``c + exp(-eta(c) a)`` with ``eta(c)`` chosen so that Fut_g = 0."""
    c = as_rational(c)
    if c < 0:
        raise ValueError("family parameter must be nonnegative")
    if c == 0:
        return Exponential(solve_soliton(s, tol).eta0)
    m1 = pw_integrate(_alpha_pow(s, 1))
    a1 = pw_integrate(abs_alpha(s.alpha_vol()))
    eta, _ = _solve_exponent(s, tol, c * m1, c * a1)
    return WeightSum((Constant(c), Exponential(eta)))


def weight_label(g) -> str:
    if isinstance(g, Constant):
        return f"constant:{g.c}"
    if isinstance(g, Exponential):
        return f"exp:{g.eta!r}"
    if isinstance(g, PolyExp):
        return f"polyexp:[{g.p}]*exp(-{g.eta!r}a)"
    if isinstance(g, Tabulated):
        return f"tabulated:{len(g.samples)} samples"
    return " + ".join(weight_label(t) for t in g.terms)


def weight_from_doc(doc: dict):
    """Weight from a ``[weight]`` table: ``kind`` plus ``c`` / ``eta`` / ``p`` / ``samples``."""
    w = doc.get("weight", doc)
    kind = w.get("kind")
    try:
        if kind == "constant":
            return Constant(as_rational(w["c"]))
        if kind == "exp":
            return Exponential(float(w["eta"]))
        if kind == "polyexp":
            return PolyExp(Poly(tuple(as_rational(x) for x in w["p"])), float(w.get("eta", 0.0)))
        if kind == "tabulated":
            return Tabulated(tuple((as_rational(a), float(v)) for a, v in w["samples"]))
    except KeyError as exc:
        raise ValueError(f"[weight] of kind {kind!r} needs key {exc}") from None
    raise ValueError(f"[weight].kind must be constant, exp, polyexp or tabulated, got {kind!r}")
