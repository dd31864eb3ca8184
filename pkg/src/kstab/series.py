"""Normalized rank-1 refined linear series, Zariski volume profiles and the built-in catalog.

A :class:`RefinedSeries` encodes an almost complete refinement over a moment
interval: on each slice the series is the complete series of ``f(a) L`` plus a
fixed divisor ``sum_j k_j(a) F_j``, so ``vol(a) = vol(L) * f(a)^dim``.
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ParseError, UnknownName, ValidationError
from .ratpoly import (Interval, PiecewisePoly, Poly, as_rational, format_rational, nonnegative_on,
                      positive_on_open)

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

DATA_DIR = Path(__file__).parent / "data"


class GitClass(enum.Enum):
    STABLE = "stable"
    POLYSTABLE = "polystable"
    STRICTLY_SEMISTABLE = "strictly-semistable"
    UNSTABLE = "unstable"


class CurveKind(enum.Enum):
    CONIC = "conic"
    PLANE_CUBIC = "plane-cubic"
    BICONIC = "biconic"


class ModelKind(enum.Enum):
    PROJ_LINE = "proj-line"
    PROJ_PLANE = "proj-plane"
    QUADRIC = "quadric"


# (dimension, -K.L^(dim-1)) for the standard generator L of each model
_MODEL_DATA = {
    ModelKind.PROJ_LINE: (1, Fraction(2)),
    ModelKind.PROJ_PLANE: (2, Fraction(3)),
    ModelKind.QUADRIC: (2, Fraction(4)),
}


@dataclass(frozen=True)
class BoundaryDivisor:
    points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((str(l), as_rational(c)) for l, c in self.points))

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.points]

    @property
    def total(self) -> Fraction:
        return sum((c for _, c in self.points), Fraction(0))

    def coeff(self, label: str) -> Fraction:
        return dict(self.points).get(label, Fraction(0))

    def problems(self) -> list[str]:
        out = []
        if len(set(self.labels)) != len(self.labels):
            out.append("boundary labels distinct")
        if any(not 0 <= c < 1 for _, c in self.points):
            out.append("0 ≤ boundary coeff < 1")
        if self.total >= 2:
            out.append("Σ boundary coeff < 2")
        return out


@dataclass(frozen=True)
class FixedCurve:
    kind: CurveKind
    git_class: GitClass | None = None


@dataclass(frozen=True)
class TargetModel:
    """The model the series lives on, with the polarization ``L`` it is written against.

    ``l_degree`` is ``L^dim`` (the volume of ``L``) and ``anticanonical_degree``
    is ``(-K).L^(dim-1)``; both default to the values for the standard generator.
    """

    kind: ModelKind
    l_degree: Fraction = Fraction(1)
    boundary: BoundaryDivisor = field(default_factory=BoundaryDivisor)
    curve: FixedCurve | None = None
    anticanonical_degree: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "l_degree", as_rational(self.l_degree))
        if self.anticanonical_degree is None:
            object.__setattr__(self, "anticanonical_degree", _MODEL_DATA[self.kind][1])
        else:
            object.__setattr__(self, "anticanonical_degree", as_rational(self.anticanonical_degree))

    @property
    def dim(self) -> int:
        return _MODEL_DATA[self.kind][0]

    @property
    def boundary_degree(self) -> Fraction:
        # boundary points on P^1 have degree one; surface models carry no boundary here
        return self.boundary.total


@dataclass(frozen=True)
class FixedPart:
    label: str
    k: PiecewisePoly
    degree: Fraction

    def __post_init__(self):
        object.__setattr__(self, "degree", as_rational(self.degree))


@dataclass(frozen=True)
class RefinedSeries:
    """Normalized almost complete rank-1 refinement.

    Pieces are stored in the parameter ``t``; the normalized moment
    coordinate is ``a = t - origin`` (``origin = 0`` for catalog data that is
    already normalized).  ``scale`` records that the refined class is
    ``scale`` times the class the stored pieces describe.
    """

    name: str
    moment: Interval
    vol: PiecewisePoly
    mobile_f: PiecewisePoly
    fixed_parts: tuple
    target: TargetModel
    normalization_shifts: tuple = ()
    origin: Fraction = Fraction(0)
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "fixed_parts", tuple(self.fixed_parts))
        object.__setattr__(self, "normalization_shifts", tuple(as_rational(a) for a in self.normalization_shifts))
        object.__setattr__(self, "origin", as_rational(self.origin))
        object.__setattr__(self, "scale", as_rational(self.scale))

    @classmethod
    def from_mobile(cls, name, moment, mobile_f, fixed_parts, target, **kw) -> "RefinedSeries":
        vol = (mobile_f ** target.dim) * target.l_degree
        return cls(name=name, moment=moment, vol=vol, mobile_f=mobile_f, fixed_parts=fixed_parts,
                   target=target, **kw)

    def fixed(self, label: str) -> FixedPart | None:
        return next((fp for fp in self.fixed_parts if fp.label == label), None)

    # normalized (moment-coordinate) views
    @property
    def alpha_interval(self) -> Interval:
        return Interval(self.moment.lo - self.origin, self.moment.hi - self.origin)

    def alpha_vol(self) -> PiecewisePoly:
        return self.vol.shift(self.origin)

    def alpha_f(self) -> PiecewisePoly:
        return self.mobile_f.shift(self.origin)

    def alpha_k(self, label: str) -> PiecewisePoly:
        return self.fixed(label).k.shift(self.origin)

    def with_git(self, git: GitClass) -> "RefinedSeries":
        curve = self.target.curve
        if curve is None or curve.kind == CurveKind.CONIC:
            raise ValueError(f"{self.name}: no cubic or biconic fixed curve to classify")
        target = dataclasses.replace(self.target, curve=FixedCurve(curve.kind, git))
        return dataclasses.replace(self, target=target)


@dataclass(frozen=True)
class ZariskiVolProfile:
    """``t -> vol(L - tE)`` on ``[0, tau]``."""

    vol_of_L: Fraction
    profile: PiecewisePoly
    tau: Fraction

    def __post_init__(self):
        object.__setattr__(self, "vol_of_L", as_rational(self.vol_of_L))
        object.__setattr__(self, "tau", as_rational(self.tau))


@dataclass(frozen=True)
class Violation:
    clause: str
    detail: str = ""

    def __str__(self):
        return f"{self.clause}: {self.detail}" if self.detail else self.clause


# -- validation -----------------------------------------------------------------

def _pw_nonneg(f: PiecewisePoly) -> list[str]:
    return [f"[{lo}, {hi}]: {p}" for lo, hi, p in f.intervals() if not nonnegative_on(p, lo, hi)]


def validate(s: RefinedSeries) -> list[Violation]:
    """Check every invariant of ``s``; returns the violations (empty when valid).

    Sign conditions are decided exactly with Sturm sequences for every degree;
    polynomial identities are compared coefficientwise after merging
    breakpoints.
    """
    out: list[Violation] = []
    dom = s.moment
    for what, f in [("vol", s.vol), ("f", s.mobile_f)] + [(f"k[{fp.label}]", fp.k) for fp in s.fixed_parts]:
        if f.domain != dom:
            out.append(Violation("domain", f"{what} is defined on {f.domain}, moment is {dom}"))
    if out:
        return out

    bad = _pw_nonneg(s.vol)
    if bad:
        out.append(Violation("vol ≥ 0", "; ".join(bad)))
    if not bad:
        interior = [f"[{lo}, {hi}]" for lo, hi, p in s.vol.intervals() if not positive_on_open(p, lo, hi)]
        if interior:
            out.append(Violation("vol > 0 on interior", "; ".join(interior)))
    bad = _pw_nonneg(s.mobile_f)
    if bad:
        out.append(Violation("f ≥ 0", "; ".join(bad)))
    if s.mobile_f.max_degree() > 1:
        out.append(Violation("f piecewise linear"))
    for fp in s.fixed_parts:
        bad = _pw_nonneg(fp.k)
        if bad:
            out.append(Violation("k ≥ 0", f"{fp.label}: " + "; ".join(bad)))
        if fp.degree <= 0:
            out.append(Violation("fixed degree > 0", fp.label))
    labels = [fp.label for fp in s.fixed_parts]
    if len(set(labels)) != len(labels):
        out.append(Violation("fixed labels distinct"))

    expected = (s.mobile_f ** s.target.dim) * s.target.l_degree
    diff = s.vol - expected
    if any(not p.is_zero() for p in diff.pieces):
        out.append(Violation("vol = vol(L)·f^{n−r}", f"vol = {s.vol}, vol(L)·f^dim = {expected}"))

    if s.scale <= 0:
        out.append(Violation("scale > 0"))
    if s.target.l_degree <= 0:
        out.append(Violation("vol(L) > 0"))
    out.extend(_target_problems(s))
    return out


def _target_problems(s: RefinedSeries) -> list[Violation]:
    out = []
    t = s.target
    curve = t.curve
    if t.kind == ModelKind.PROJ_LINE:
        out.extend(Violation(p) for p in t.boundary.problems())
        if curve is not None:
            out.append(Violation("curve kind matches target", "proj-line carries no fixed curve"))
        return out
    if t.boundary.points:
        out.append(Violation("boundary only on proj-line"))
    if curve is None:
        out.append(Violation("curve kind matches target", "surface model needs a fixed curve"))
        return out
    allowed = {ModelKind.PROJ_PLANE: {CurveKind.CONIC, CurveKind.PLANE_CUBIC},
               ModelKind.QUADRIC: {CurveKind.BICONIC}}[t.kind]
    if curve.kind not in allowed:
        out.append(Violation("curve kind matches target", f"{curve.kind.value} on {t.kind.value}"))
    needs_git = curve.kind in (CurveKind.PLANE_CUBIC, CurveKind.BICONIC)
    if needs_git != (curve.git_class is not None):
        out.append(Violation("git class present exactly for cubic/biconic"))
    if len(s.fixed_parts) != 1:
        out.append(Violation("surface model has one fixed curve", f"{len(s.fixed_parts)} fixed parts"))
    return out


def validate_profile(z: ZariskiVolProfile) -> list[Violation]:
    out = []
    if z.profile.domain != Interval(0, z.tau):
        out.append(Violation("domain", f"profile on {z.profile.domain}, expected [0, {z.tau}]"))
        return out
    if z.profile(Fraction(0)) != z.vol_of_L:
        out.append(Violation("profile(0) = vol(L)"))
    bad = _pw_nonneg(z.profile)
    if bad:
        out.append(Violation("profile ≥ 0", "; ".join(bad)))
    slope = [f"[{lo}, {hi}]" for lo, hi, p in z.profile.intervals() if not nonnegative_on(-p.deriv(), lo, hi)]
    if slope:
        out.append(Violation("profile non-increasing", "; ".join(slope)))
    if z.vol_of_L <= 0:
        out.append(Violation("vol(L) > 0"))
    return out


def _checked(s):
    problems = validate(s) if isinstance(s, RefinedSeries) else validate_profile(s)
    if problems:
        raise ValidationError(problems)
    return s


# -- built-in catalog -----------------------------------------------------------

def _lin(c0, c1=0) -> Poly:
    return Poly((as_rational(c0), as_rational(c1)))


def _pw(*items) -> PiecewisePoly:
    return PiecewisePoly.from_pieces(items)


def conic_p2(c=Fraction(1, 2)) -> RefinedSeries:
    """Refinement of O(1) on P^2 by the (2,1)-weighted blowup, pair (P^2, cQ).

    Stored over ``t in [0, 2]`` with ``a = t - 1``; ``scale = 3 - 2c`` turns it
    into the refinement of ``-(K + cQ)``.
    """
    c = as_rational(c)
    f = _pw((0, 1, _lin(0, Fraction(1, 2))), (1, 2, _lin(1, Fraction(-1, 2))))
    k = _pw((0, 1, Poly()), (1, 2, _lin(-1, 1)))
    target = TargetModel(ModelKind.PROJ_LINE, 1, BoundaryDivisor((("p0", Fraction(1, 2)), ("p2", c))))
    return RefinedSeries.from_mobile(
        "conic-P2", Interval(0, 2), f, (FixedPart("p1", k, 1),), target,
        origin=1, scale=3 - 2 * c,
    )


def _mm2_28(name, alpha0, git) -> RefinedSeries:
    f = _pw((-1, 0, _lin(3, 2)), (0, alpha0, _lin(3, -1)))
    k = _pw((-1, 0, Poly()), (0, alpha0, _lin(0, 1)))
    target = TargetModel(ModelKind.PROJ_PLANE, 1, curve=FixedCurve(CurveKind.PLANE_CUBIC, git))
    return RefinedSeries.from_mobile(name, Interval(-1, alpha0), f, (FixedPart("C", k, 3),), target,
                                     normalization_shifts=(1,))


def _mm2_23a0(git) -> RefinedSeries:
    f = _pw((-1, 0, _lin(2, 1)), (0, 2, _lin(2, -1)))
    k = _pw((-1, 0, Poly()), (0, 2, _lin(0, 1)))
    target = TargetModel(ModelKind.QUADRIC, 2, curve=FixedCurve(CurveKind.BICONIC, git))
    return RefinedSeries.from_mobile("MM2.23a0", Interval(-1, 2), f, (FixedPart("C", k, 4),), target,
                                     normalization_shifts=(1,))


def _mm2_23b() -> RefinedSeries:
    third = Fraction(1, 3)
    f = _pw((-3, -2, _lin(3, 1)), (-2, 1, _lin(5 * third, third)), (1, 3, _lin(3, -1)))
    k = _pw((-3, -2, Poly()), (-2, 1, _lin(2 * third, third)), (1, 3, _lin(0, 1)))
    target = TargetModel(ModelKind.PROJ_PLANE, 1, curve=FixedCurve(CurveKind.CONIC))
    return RefinedSeries.from_mobile("MM2.23b", Interval(-3, 3), f, (FixedPart("C2", k, 2),), target)


def p2_wt21_profile() -> ZariskiVolProfile:
    half = Fraction(1, 2)
    profile = _pw((0, 1, Poly((1, 0, -half))), (1, 2, Poly((2, -2, half))))
    return ZariskiVolProfile(1, profile, 2)


BUILTIN_NAMES = ("conic-P2", "MM2.28", "MM3.14", "MM2.23a0", "MM2.23b", "p2-wt21-profile")
SERIES_NAMES = BUILTIN_NAMES[:-1]


def builtin(name: str, *, c=Fraction(1, 2), git: GitClass = GitClass.STABLE):
    """Catalog entry by name.

    ``c`` parameterizes the boundary of ``conic-P2``; ``git`` is the declared
    GIT class of the cubic / biconic curve (``MM2.28``, ``MM3.14``, ``MM2.23a0``).
    """
    if name == "conic-P2":
        return _checked(conic_p2(c))
    if name == "MM2.28":
        return _checked(_mm2_28("MM2.28", 3, git))
    if name == "MM3.14":
        return _checked(_mm2_28("MM3.14", 1, git))
    if name == "MM2.23a0":
        return _checked(_mm2_23a0(git))
    if name == "MM2.23b":
        return _checked(_mm2_23b())
    if name == "p2-wt21-profile":
        return _checked(p2_wt21_profile())
    raise UnknownName(f"unknown builtin {name!r}; known: {', '.join(BUILTIN_NAMES)}")


# -- TOML documents -------------------------------------------------------------

def _rat(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError(f"{where}: missing key {key!r}")
    try:
        return as_rational(doc[key])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}.{key}: {exc}") from None


def _rat_list(values, where: str) -> list[Fraction]:
    if not isinstance(values, list):
        raise ParseError(f"{where}: expected a list")
    try:
        return [as_rational(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def _pieces(items, key: str, where: str) -> PiecewisePoly:
    if not isinstance(items, list) or not items:
        raise ParseError(f"{where}: expected a non-empty list of pieces")
    triples = []
    for i, piece in enumerate(items):
        w = f"{where}[{i}]"
        triples.append((_rat(piece, "from", w), _rat(piece, "to", w), Poly(tuple(_rat_list(piece.get(key), f"{w}.{key}")))))
    try:
        return PiecewisePoly.from_pieces(triples)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def parse_series(doc: dict) -> RefinedSeries:
    """Build a series from a parsed document (see ``load_series``); no validation."""
    head = doc.get("series")
    if not isinstance(head, dict):
        raise ParseError("missing [series] table")
    try:
        kind = ModelKind(head.get("target"))
    except ValueError:
        raise ParseError(f"[series].target must be one of {[m.value for m in ModelKind]}") from None
    moment = _rat_list(head.get("moment"), "[series].moment")
    if len(moment) != 2 or moment[0] > moment[1]:
        raise ParseError("[series].moment must be [lo, hi] with lo <= hi")
    f = _pieces(doc.get("piece"), "f", "[[piece]]")
    fixed = []
    for i, fx in enumerate(doc.get("fixed", [])):
        w = f"[[fixed]][{i}]"
        if "label" not in fx:
            raise ParseError(f"{w}: missing key 'label'")
        fixed.append(FixedPart(str(fx["label"]), _pieces(fx.get("pieces"), "k", f"{w}.pieces"), _rat(fx, "degree", w)))
    boundary = BoundaryDivisor()
    if "boundary" in doc:
        pts = doc["boundary"].get("points", [])
        boundary = BoundaryDivisor(tuple((str(p["label"]), _rat(p, "coeff", "[boundary]")) for p in pts))
    curve = None
    if "curve" in doc:
        try:
            ck = CurveKind(doc["curve"].get("kind"))
            git = doc["curve"].get("git")
            curve = FixedCurve(ck, GitClass(git) if git is not None else None)
        except ValueError as exc:
            raise ParseError(f"[curve]: {exc}") from None
    target = TargetModel(kind, _rat(head, "vol_of_L", "[series]"), boundary, curve,
                         _rat(head, "anticanonical_degree", "[series]") if "anticanonical_degree" in head else None)
    extra = dict(
        normalization_shifts=tuple(_rat_list(head.get("shifts", []), "[series].shifts")),
        origin=_rat(head, "origin", "[series]") if "origin" in head else Fraction(0),
        scale=_rat(head, "scale", "[series]") if "scale" in head else Fraction(1),
    )
    name = str(head.get("name", "unnamed"))
    interval = Interval(*moment)
    if "vol" in doc:
        vol = _pieces(doc["vol"], "v", "[[vol]]")
        return RefinedSeries(name, interval, vol, f, tuple(fixed), target, **extra)
    return RefinedSeries.from_mobile(name, interval, f, tuple(fixed), target, **extra)


def load_series(path) -> RefinedSeries:
    """Read and validate a series document.

    Raises ``ParseError`` for malformed documents and ``ValidationError``
    (listing the violated clauses) for invariant violations.
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return _checked(parse_series(doc))


def _fmt_pieces(f: PiecewisePoly, key: str) -> list[dict]:
    return [{"from": format_rational(lo), "to": format_rational(hi), key: [format_rational(c) for c in p.coeffs] or ["0"]}
            for lo, hi, p in f.intervals()]


def series_to_doc(s: RefinedSeries) -> dict:
    t = s.target
    head = {"name": s.name, "target": t.kind.value, "vol_of_L": format_rational(t.l_degree),
            "moment": [format_rational(s.moment.lo), format_rational(s.moment.hi)]}
    if t.anticanonical_degree != _MODEL_DATA[t.kind][1]:
        head["anticanonical_degree"] = format_rational(t.anticanonical_degree)
    if s.normalization_shifts:
        head["shifts"] = [format_rational(a) for a in s.normalization_shifts]
    if s.origin:
        head["origin"] = format_rational(s.origin)
    if s.scale != 1:
        head["scale"] = format_rational(s.scale)
    doc = {"series": head, "piece": _fmt_pieces(s.mobile_f, "f")}
    if s.fixed_parts:
        doc["fixed"] = [{"label": fp.label, "degree": format_rational(fp.degree), "pieces": _fmt_pieces(fp.k, "k")}
                        for fp in s.fixed_parts]
    if t.boundary.points:
        doc["boundary"] = {"points": [{"label": l, "coeff": format_rational(c)} for l, c in t.boundary.points]}
    if t.curve is not None:
        doc["curve"] = {"kind": t.curve.kind.value}
        if t.curve.git_class is not None:
            doc["curve"]["git"] = t.curve.git_class.value
    expected = (s.mobile_f ** t.dim) * t.l_degree
    if s.vol != expected:
        doc["vol"] = _fmt_pieces(s.vol, "v")
    return doc


def dump_series(s: RefinedSeries) -> str:
    import tomli_w

    return tomli_w.dumps(series_to_doc(s))


def shipped_example(name: str) -> Path:
    """Path of a TOML dataset shipped with the package (e.g. ``mm2_28``)."""
    path = DATA_DIR / f"{name}.toml"
    if not path.exists():
        raise UnknownName(f"no shipped dataset {name!r}")
    return path
