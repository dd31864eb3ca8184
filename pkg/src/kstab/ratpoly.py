"""Exact rational polynomials and piecewise polynomials on the line.

Rationals are plain :class:`fractions.Fraction` values (arbitrary precision,
always reduced).  Every integral of a piecewise polynomial is exact; the only
floating point entry is :func:`exp_moment`, which evaluates closed forms of
``int p(a) exp(-eta a) da`` piece by piece.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .errors import BadBracket, DomainMismatch, IntervalOutOfDomain, NoConvergence, Overflow

Rational = Fraction

EXP_BOUND = 700.0


def as_rational(x) -> Fraction:
    """Coerce ints, floats (exactly), Fractions and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {x!r}") from exc
    raise TypeError(f"cannot interpret {x!r} as a rational")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __str__(self):
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


@dataclass(frozen=True)
class Poly:
    """Polynomial with rational coefficients in ascending degree.

    The zero polynomial has an empty coefficient tuple; otherwise the
    leading coefficient is nonzero.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        c = [as_rational(a) for a in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        if isinstance(x, float):
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
            return acc
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def _coerce(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = as_rational(other)
            return Poly(tuple(c * a for a in self.coeffs))
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def deriv(self) -> "Poly":
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def antideriv(self) -> "Poly":
        return Poly((Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(self.coeffs)))

    def integrate(self, lo, hi) -> Fraction:
        F = self.antideriv()
        return F(as_rational(hi)) - F(as_rational(lo))

    def compose_linear(self, a, b) -> "Poly":
        """Return ``x -> p(a + b*x)``."""
        lin = Poly((a, b))
        out = Poly()
        for c in reversed(self.coeffs):
            out = out * lin + c
        return out

    def shift(self, a) -> "Poly":
        """Return ``x -> p(x + a)``."""
        return self.compose_linear(a, 1)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.lead()
        for shift in range(len(quot) - 1, -1, -1):
            c = rem[shift + other.degree] / lead
            quot[shift] = c
            if c:
                for i, b in enumerate(other.coeffs):
                    rem[shift + i] -= c * b
        return Poly(tuple(quot)), Poly(tuple(rem[: other.degree] if other.degree > 0 else ()))

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        return self * (1 / self.lead()) if self.coeffs else self

    def to_str(self, var: str = "α") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mag = format_rational(abs(c))
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if mono and mag == "1":
                mag = ""
            elif mono:
                mag += "*"
            parts.append(("-" if c < 0 else "+", mag + mono))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, term in parts[1:]:
            out += f" {sign} {term}"
        return out

    def __str__(self):
        return self.to_str()


def poly_eval(p: Poly, x) -> Fraction:
    return p(as_rational(x))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


# -- exact sign checks -------------------------------------------------------

def _sturm_sequence(q: Poly) -> list[Poly]:
    seq = [q, q.deriv()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def _sign_changes(seq: Sequence[Poly], x: Fraction) -> int:
    signs = [v > 0 for v in (s(x) for s in seq) if v != 0]
    return sum(1 for u, w in zip(signs, signs[1:]) if u != w)


def squarefree_part(p: Poly) -> Poly:
    if p.degree <= 0:
        return p
    return p // poly_gcd(p, p.deriv())


def count_roots(p: Poly, lo, hi) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval (lo, hi]."""
    q = squarefree_part(p)
    if q.degree <= 0:
        return 0
    seq = _sturm_sequence(q)
    return _sign_changes(seq, as_rational(lo)) - _sign_changes(seq, as_rational(hi))


def _open_sign_ok(p, q, seq, a, b, strict) -> bool:
    n = _sign_changes(seq, a) - _sign_changes(seq, b) - (q(b) == 0)
    if n == 0:
        v = p((a + b) / 2)
        return v > 0 if strict else v >= 0
    if strict:
        return False
    pa, pb = p(a), p(b)
    if n == 1 and pa != 0 and pb != 0:
        # single root strictly inside; sign on either side is read at the ends
        return pa > 0 and pb > 0
    m = (a + b) / 2
    return p(m) >= 0 and _open_sign_ok(p, q, seq, a, m, False) and _open_sign_ok(p, q, seq, m, b, False)


def _sign_setup(p: Poly):
    q = squarefree_part(p)
    seq = _sturm_sequence(q) if q.degree > 0 else [q]
    return q, seq


def nonnegative_on(p: Poly, lo, hi) -> bool:
    """Exact test of ``p >= 0`` on the closed interval [lo, hi] (any degree)."""
    lo, hi = as_rational(lo), as_rational(hi)
    if p.is_zero():
        return True
    if p(lo) < 0 or p(hi) < 0:
        return False
    if lo == hi:
        return True
    q, seq = _sign_setup(p)
    return _open_sign_ok(p, q, seq, lo, hi, strict=False)


def positive_on_open(p: Poly, lo, hi) -> bool:
    """Exact test of ``p > 0`` on the open interval (lo, hi)."""
    lo, hi = as_rational(lo), as_rational(hi)
    if p.is_zero():
        return False
    if lo == hi:
        return True
    q, seq = _sign_setup(p)
    return _open_sign_ok(p, q, seq, lo, hi, strict=True)


# -- piecewise polynomials -----------------------------------------------------

@dataclass(frozen=True)
class PiecewisePoly:
    """Polynomial pieces on consecutive intervals.

    Piece ``i`` governs ``[breakpoints[i], breakpoints[i+1]]``; at an interior
    breakpoint evaluation uses the right-hand piece.  Continuity is not
    required (see :meth:`is_continuous`).
    """

    breakpoints: tuple
    pieces: tuple

    def __post_init__(self):
        bps = tuple(as_rational(b) for b in self.breakpoints)
        pcs = tuple(p if isinstance(p, Poly) else Poly(tuple(p)) for p in self.pieces)
        if len(bps) != len(pcs) + 1 or not pcs:
            raise ValueError("need k >= 1 pieces and k + 1 breakpoints")
        if any(u >= v for u, v in zip(bps, bps[1:])):
            raise ValueError(f"breakpoints not strictly increasing: {[str(b) for b in bps]}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pcs)

    @classmethod
    def from_pieces(cls, items: Iterable[tuple]) -> "PiecewisePoly":
        """Build from ``(lo, hi, poly_or_coeffs)`` triples on contiguous intervals."""
        items = list(items)
        bps = [as_rational(items[0][0])]
        pieces = []
        for lo, hi, p in items:
            if as_rational(lo) != bps[-1]:
                raise ValueError(f"pieces not contiguous at {lo}")
            bps.append(as_rational(hi))
            pieces.append(p if isinstance(p, Poly) else Poly(tuple(p)))
        return cls(tuple(bps), tuple(pieces))

    @classmethod
    def constant(cls, c, lo, hi) -> "PiecewisePoly":
        return cls((lo, hi), (Poly.const(c),))

    @classmethod
    def monomial(cls, k: int, lo, hi) -> "PiecewisePoly":
        return cls((lo, hi), (Poly.x() ** k,))

    @property
    def domain(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    def intervals(self) -> Iterator[tuple[Fraction, Fraction, Poly]]:
        for i, p in enumerate(self.pieces):
            yield self.breakpoints[i], self.breakpoints[i + 1], p

    def piece_index(self, x) -> int:
        if not self.breakpoints[0] <= x <= self.breakpoints[-1]:
            raise IntervalOutOfDomain(f"{x} outside {self.domain}")
        i = bisect.bisect_right(self.breakpoints, x) - 1
        return min(i, len(self.pieces) - 1)

    def __call__(self, x):
        return self.pieces[self.piece_index(x)](x)

    def max_degree(self) -> int:
        return max(p.degree for p in self.pieces)

    def is_continuous(self) -> bool:
        return all(
            self.pieces[i - 1](b) == self.pieces[i](b)
            for i, b in enumerate(self.breakpoints[1:-1], start=1)
        )

    def refine(self, points: Iterable) -> "PiecewisePoly":
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        extra = {as_rational(p) for p in points}
        bps = sorted(set(self.breakpoints) | {p for p in extra if lo < p < hi})
        return PiecewisePoly(tuple(bps), tuple(self.pieces[self.piece_index(b)] for b in bps[:-1]))

    def restrict(self, interval: Interval) -> "PiecewisePoly":
        if not self.domain.contains(interval):
            raise IntervalOutOfDomain(f"{interval} exceeds domain {self.domain}")
        if interval.lo == interval.hi:
            raise ValueError(f"cannot restrict to the degenerate interval {interval}")
        fine = self.refine([interval.lo, interval.hi])
        i0 = fine.breakpoints.index(interval.lo)
        i1 = fine.breakpoints.index(interval.hi)
        return PiecewisePoly(fine.breakpoints[i0:i1 + 1], fine.pieces[i0:i1])

    def shift(self, c) -> "PiecewisePoly":
        """Return ``x -> f(x + c)`` on the domain translated by ``-c``."""
        c = as_rational(c)
        return PiecewisePoly(tuple(b - c for b in self.breakpoints), tuple(p.shift(c) for p in self.pieces))

    def map(self, fn: Callable[[Poly], Poly]) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, tuple(fn(p) for p in self.pieces))

    def _binary(self, other: "PiecewisePoly", op) -> "PiecewisePoly":
        if self.domain != other.domain:
            raise DomainMismatch(f"{self.domain} vs {other.domain}")
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        pieces = tuple(
            op(self.pieces[self.piece_index(b)], other.pieces[other.piece_index(b)]) for b in bps[:-1]
        )
        return PiecewisePoly(tuple(bps), pieces)

    def __add__(self, other):
        if isinstance(other, PiecewisePoly):
            return self._binary(other, lambda p, q: p + q)
        return self.map(lambda p: p + other)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda p: -p)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PiecewisePoly):
            return self._binary(other, lambda p, q: p * q)
        if isinstance(other, Poly):
            return self.map(lambda p: p * other)
        c = as_rational(other)
        return self.map(lambda p: p * c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return self.map(lambda p: p ** n)

    def to_str(self, var: str = "α") -> str:
        return "; ".join(
            f"[{format_rational(lo)}, {format_rational(hi)}]: {p.to_str(var)}" for lo, hi, p in self.intervals()
        )

    def __str__(self):
        return self.to_str()


def pw_add(f: PiecewisePoly, g: PiecewisePoly) -> PiecewisePoly:
    return f + g


def pw_mul(f: PiecewisePoly, g: PiecewisePoly) -> PiecewisePoly:
    return f * g


def pw_scale(f: PiecewisePoly, c) -> PiecewisePoly:
    return f * as_rational(c)


def pw_integrate(f: PiecewisePoly, interval: Interval | None = None) -> Fraction:
    """Exact integral of ``f`` over ``interval`` (default: its whole domain)."""
    if interval is not None and interval.lo == interval.hi:
        f.piece_index(interval.lo)
        return Fraction(0)
    g = f if interval is None else f.restrict(interval)
    return sum((p.integrate(lo, hi) for lo, hi, p in g.intervals()), Fraction(0))


def pw_moment(f: PiecewisePoly, k: int, interval: Interval | None = None) -> Fraction:
    """Exact ``int a^k f(a) da``."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    return pw_integrate(f * (Poly.x() ** k), interval)


# -- exponential weights -------------------------------------------------------

def _monomial_exp_integral(j: int, h: float, rate: float) -> float:
    """``int_0^h u^j exp(-rate*u) du`` for ``rate >= 0``.

    Both branches are the by-parts closed form
    ``j!/rate^(j+1) * (1 - exp(-x) * sum_{i<=j} x^i/i!)`` with ``x = rate*h``;
    for ``x < j + 1`` the bracket is summed as its positive tail series to
    avoid cancellation.
    """
    x = rate * h
    if x < j + 1:
        term = 1.0 / (j + 1)
        total = term
        n = 0
        while True:
            n += 1
            term *= x / (j + 1 + n)
            total += term
            if term <= 1e-18 * total:
                break
        return h ** (j + 1) * math.exp(-x) * total
    partial = term = 1.0
    for i in range(1, j + 1):
        term *= x / i
        partial += term
    return math.factorial(j) / rate ** (j + 1) * (1.0 - math.exp(-x) * partial)


def _exp_piece(p: Poly, a: Fraction, b: Fraction, eta: float) -> float:
    if p.is_zero():
        return 0.0
    h = float(b - a)
    if eta >= 0:
        q, anchor, rate = p.shift(a), a, eta
    else:
        q, anchor, rate = p.compose_linear(b, -1), b, -eta
    terms = [float(c) * _monomial_exp_integral(j, h, rate) for j, c in enumerate(q.coeffs)]
    return math.exp(-eta * float(anchor)) * math.fsum(terms)


def exp_moment(f: PiecewisePoly, eta: float, interval: Interval | None = None, bound: float = EXP_BOUND) -> float:
    """``int f(a) exp(-eta*a) da`` over ``interval`` by per-piece closed forms."""
    if interval is not None and interval.lo == interval.hi:
        f.piece_index(interval.lo)
        return 0.0
    g = f if interval is None else f.restrict(interval)
    eta = float(eta)
    if eta == 0.0:
        return float(pw_integrate(g))
    reach = max(abs(float(g.breakpoints[0])), abs(float(g.breakpoints[-1])))
    if abs(eta) * reach > bound:
        raise Overflow(f"|eta|*max|breakpoint| = {abs(eta) * reach:.6g} exceeds {bound}")
    return math.fsum(_exp_piece(p, lo, hi, eta) for lo, hi, p in g.intervals())


# -- root finding ---------------------------------------------------------------

@dataclass(frozen=True)
class RootResult:
    root: float
    value: float
    iterations: int


def bracket_root(
    phi: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float,
    max_iter: int = 200,
    secant: bool = True,
) -> RootResult:
    """Root of a decreasing function with ``phi(lo) > 0 > phi(hi)``.

    Odd iterations bisect; even iterations take a false-position step when it
    falls strictly inside the bracket.  Stops once ``|phi(x)| <= tol`` or the
    bracket is narrower than ``tol``.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BadBracket(f"bracket ({lo}, {hi}) is empty")
    flo, fhi = phi(lo), phi(hi)
    if flo == 0:
        return RootResult(lo, flo, 0)
    if fhi == 0:
        return RootResult(hi, fhi, 0)
    if not (flo > 0 > fhi):
        raise BadBracket(f"need phi(lo) > 0 > phi(hi), got {flo:.6g}, {fhi:.6g}")
    best = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    for it in range(1, max_iter + 1):
        x = 0.5 * (lo + hi)
        if secant and it % 2 == 0:
            xs = lo - flo * (hi - lo) / (fhi - flo)
            if lo < xs < hi:
                x = xs
        if not lo < x < hi:
            return RootResult(best[0], best[1], it)
        fx = phi(x)
        if abs(fx) < abs(best[1]):
            best = (x, fx)
        if abs(fx) <= tol:
            return RootResult(x, fx, it)
        if fx > 0:
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        if hi - lo <= tol:
            return RootResult(best[0], best[1], it)
    raise NoConvergence(f"no convergence after {max_iter} iterations (bracket [{lo}, {hi}])")


def find_root_decreasing(phi: Callable[[float], float], bracket: tuple[float, float], tol: float,
                         max_iter: int = 200) -> float:
    return bracket_root(phi, bracket, tol, max_iter).root
