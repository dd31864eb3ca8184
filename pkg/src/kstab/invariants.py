"""Weighted volume, DH density, S-invariants, lambda / fixed-part coefficients and delta on P^1."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import PreconditionFailed, UnknownPoint
from .ratpoly import pw_integrate
from .series import ModelKind, RefinedSeries, ZariskiVolProfile
from .weights import futaki_g, integrate_against, scaled, weighted_moment

GENERIC = "generic"


@dataclass(frozen=True)
class DHDensity:
    density: Callable[[float], float]
    total: float
    barycenter: float


@dataclass(frozen=True)
class LambdaFixed:
    lambda_: Fraction | float
    mus: tuple  # (label, mu)

    def mu(self, label: str):
        return dict(self.mus)[label]


@dataclass(frozen=True)
class DeltaReport:
    delta: Fraction | float
    argmin: str
    per_point: tuple  # (label, A, S, ratio)


def weighted_volume(s: RefinedSeries, g):
    return weighted_moment(s, g, 0)


def dh(s: RefinedSeries, g) -> DHDensity:
    """The probability measure ``g vol da / V^g`` on the moment interval."""
    volume = weighted_volume(s, g)
    vol = s.alpha_vol()
    inv = 1 / volume
    normalized = scaled(g, inv) if isinstance(volume, Fraction) else scaled(g, Fraction(inv))

    def density(a):
        return float(normalized(a)) * float(vol(a))

    total = integrate_against(normalized, vol)
    return DHDensity(density, float(total), -float(futaki_g(s, g)))


def dh_average(s: RefinedSeries, g, h_alpha):
    """``int h dDH^g`` for a piecewise polynomial ``h`` in moment coordinates."""
    return integrate_against(g, h_alpha * s.alpha_vol()) / weighted_volume(s, g)


def s_from_zariski(z: ZariskiVolProfile) -> Fraction:
    """``S(L; E) = (1/vol L) int_0^tau vol(L - tE) dt``, exact."""
    return pw_integrate(z.profile) / z.vol_of_L


def fl(a_log_discrepancy, s_value):
    """Fujita-Li difference ``A - S``."""
    return a_log_discrepancy - s_value


def lambda_fixed(s: RefinedSeries, g) -> LambdaFixed:
    """Coefficients of ``lambda L = -(K + Delta + F)`` for the refined class.

    ``lambda = int f dDH^g`` and ``mu_j = int k_j dDH^g``, multiplied by the
    series scale so they refer to the refinement of ``-(K + Delta)``.
    """
    lam = s.scale * dh_average(s, g, s.alpha_f())
    mus = tuple((fp.label, s.scale * dh_average(s, g, s.alpha_k(fp.label))) for fp in s.fixed_parts)
    return LambdaFixed(lam, mus)


def lambda_identity_gap(s: RefinedSeries, lf: LambdaFixed):
    """``lambda deg L - (deg(-K) - deg Delta - sum mu_j deg F_j)``; zero for genuine weights."""
    t = s.target
    rhs = t.anticanonical_degree - t.boundary_degree - sum(mu * s.fixed(label).degree for label, mu in lf.mus)
    return lf.lambda_ * t.l_degree - rhs


def _require_line(s: RefinedSeries):
    if s.target.kind != ModelKind.PROJ_LINE:
        raise PreconditionFailed(f"{s.name}: point S-invariants need a proj-line target")


def s_point_p1(s: RefinedSeries, g, point: str = GENERIC):
    """``S^g(W; p) = int (f/2 + k_p) dDH^g`` for the stored series on P^1."""
    _require_line(s)
    labels = {fp.label for fp in s.fixed_parts} | set(s.target.boundary.labels)
    if point != GENERIC and point not in labels:
        raise UnknownPoint(f"{point!r} is neither a fixed-part label, a boundary point nor {GENERIC!r}")
    h = s.alpha_f() * Fraction(1, 2)
    if s.fixed(point) is not None:
        h = h + s.alpha_k(point)
    return dh_average(s, g, h)


def delta_p1(s: RefinedSeries, g) -> DeltaReport:
    """Delta invariant of ``(P^1, Delta; W)`` over the refined class.

    S is constant off the fixed-part support and A off the boundary, so the
    minimum is taken over the boundary points, fixed-part points and one
    generic point.  Ties go to the earliest row.
    """
    _require_line(s)
    boundary = s.target.boundary
    candidates = boundary.labels + [fp.label for fp in s.fixed_parts if fp.label not in boundary.labels] + [GENERIC]
    rows = []
    for label in candidates:
        a = 1 - boundary.coeff(label)
        sv = s.scale * s_point_p1(s, g, label)
        rows.append((label, a, sv, a / sv))
    best = min(rows, key=lambda r: r[3])
    return DeltaReport(best[3], best[0], tuple(rows))
