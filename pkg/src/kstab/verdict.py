"""Stability decisions: Li's criterion on P^1, the surface bridges and the weighted verdict."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InternalInconsistency, MuOutOfRange, NotAWeight, NotLogFano, PreconditionFailed
from .invariants import delta_p1, lambda_fixed
from .ratpoly import format_rational
from .series import BoundaryDivisor, CurveKind, GitClass, ModelKind, RefinedSeries
from .weights import futaki_g, is_weight

CONIC_THRESHOLD = Fraction(3, 4)


class Level(enum.Enum):
    K_STABLE = "KStable"
    K_POLYSTABLE = "KPolystable"
    K_SEMISTABLE = "KSemistableNotPolystable"
    K_UNSTABLE = "KUnstable"

    @property
    def semistable(self) -> bool:
        return self is not Level.K_UNSTABLE

    @property
    def polystable(self) -> bool:
        return self in (Level.K_STABLE, Level.K_POLYSTABLE)


def jsonable(x):
    if isinstance(x, Fraction):
        return {"exact": format_rational(x), "value": float(x)}
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class Verdict:
    level: Level
    certificate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"level": self.level.value, "certificate": jsonable(self.certificate)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def li_p1(boundary: BoundaryDivisor | list | tuple) -> Verdict:
    """K-stability of ``(P^1, sum a_i p_i)``.

    K-stable iff ``a_i < sum_{j != i} a_j`` for every i, K-semistable with
    ``<=``.  Points with coefficient 0 are dropped.  The semistable boundary is
    polystable when it is empty or two points with equal coefficients.
    """
    points = boundary.points if isinstance(boundary, BoundaryDivisor) else tuple(boundary)
    coeffs = [a for _, a in points if a != 0]
    total = sum(coeffs, Fraction(0)) if all(isinstance(a, Fraction) for a in coeffs) else sum(coeffs)
    if total >= 2:
        raise NotLogFano(f"boundary degree {total} >= 2")
    if any(a < 0 or a >= 1 for a in coeffs):
        raise NotLogFano("boundary coefficients must lie in [0, 1)")
    slack = total - 2 * max(coeffs) if coeffs else Fraction(0)
    delta = 2 * min([1 - a for a in coeffs] + [1]) / (2 - total)
    if slack < 0:
        level = Level.K_UNSTABLE
    elif coeffs and slack > 0:
        level = Level.K_STABLE
    elif not coeffs or (len(coeffs) == 2 and coeffs[0] == coeffs[1]):
        level = Level.K_POLYSTABLE
    else:
        level = Level.K_SEMISTABLE
    return Verdict(level, {"criterion": "li-p1", "slack": slack, "delta": delta,
                           "boundary": [[label, a] for label, a in points]})


def _lift(model_level: Level) -> Level:
    # X carries a torus action, so a stable model only gives polystability
    return Level.K_POLYSTABLE if model_level.polystable else model_level


def weighted_verdict(s: RefinedSeries, g, tol: float = 1e-6) -> Verdict:
    """g-weighted K-stability of the variety behind ``s`` via its refinement model."""
    if not is_weight(s, g, tol):
        raise NotAWeight(f"{s.name}: Fut_g = {futaki_g(s, g)} is not zero, so g is not a weight function")
    lf = lambda_fixed(s, g)
    if lf.lambda_ <= 0:
        raise NotLogFano(f"{s.name}: lambda = {lf.lambda_} <= 0")
    cert = {"lambda": lf.lambda_, "mus": [[label, mu] for label, mu in lf.mus]}
    t = s.target

    if t.kind == ModelKind.PROJ_LINE:
        combined = dict(t.boundary.points)
        for label, mu in lf.mus:
            combined[label] = combined.get(label, Fraction(0)) + mu
        bad = {label: a for label, a in combined.items() if a >= 1}
        if bad:
            raise NotLogFano(f"{s.name}: combined coefficients {bad} reach 1")
        model = li_p1(list(combined.items()))
        cert.update(bridge="proj-line", model_level=model.level, combined=[[l, a] for l, a in combined.items()],
                    slack=model.certificate["slack"], delta_model=model.certificate["delta"],
                    delta_series=delta_p1(s, g).delta)
        return Verdict(_lift(model.level), cert)

    (label, mu), = lf.mus
    curve = t.curve
    cert["mu"] = mu
    if curve.kind == CurveKind.CONIC:
        cert.update(bridge="plane-conic", threshold=CONIC_THRESHOLD)
        if mu < CONIC_THRESHOLD:
            return Verdict(Level.K_POLYSTABLE, cert)
        if mu == CONIC_THRESHOLD:
            return Verdict(Level.K_SEMISTABLE, cert)
        return Verdict(Level.K_UNSTABLE, cert)

    if not 0 < mu < 1:
        raise MuOutOfRange(f"{s.name}: mu = {mu} outside (0, 1)")
    git = curve.git_class
    cert.update(bridge="curve-git", curve=curve.kind, git_class=git)
    level = {
        GitClass.STABLE: Level.K_POLYSTABLE,
        GitClass.POLYSTABLE: Level.K_POLYSTABLE,
        GitClass.STRICTLY_SEMISTABLE: Level.K_SEMISTABLE,
        GitClass.UNSTABLE: Level.K_UNSTABLE,
    }[git]
    return Verdict(level, cert)


def orbifold_order(a: Fraction) -> int | None:
    """``m`` with ``a = 1 - 1/m`` and ``m >= 2``, else None."""
    if not 0 < a < 1:
        return None
    m = 1 / (1 - Fraction(a))
    return int(m) if m.denominator == 1 and m >= 2 else None


def complexity_one_three_points(s: RefinedSeries, g) -> Verdict:
    """Complexity-one case with three orbifold points: always g-weighted K-polystable.

    The conclusion is re-derived through :func:`weighted_verdict` and any
    disagreement raises ``InternalInconsistency``.
    """
    if s.target.kind != ModelKind.PROJ_LINE:
        raise PreconditionFailed(f"{s.name}: target must be P^1")
    pts = [(label, a) for label, a in s.target.boundary.points if a != 0]
    if len(pts) != 3:
        raise PreconditionFailed(f"{s.name}: boundary must have exactly three points, has {len(pts)}")
    orders = [orbifold_order(a) for _, a in pts]
    if None in orders:
        raise PreconditionFailed(f"{s.name}: boundary coefficients must be 1 - 1/m with m >= 2")
    if lambda_fixed(s, g).lambda_ <= 0:
        raise PreconditionFailed(f"{s.name}: lambda <= 0, not log Fano")
    derived = weighted_verdict(s, g)
    if derived.level is not Level.K_POLYSTABLE:
        raise InternalInconsistency(f"{s.name}: three orbifold points force KPolystable, computed {derived.level.value}")
    return Verdict(Level.K_POLYSTABLE, {"criterion": "complexity-one-three-points", "orders": orders,
                                        "derived": derived.to_dict()})
