"""``kstab`` command line.

Exit codes: 0 success (and K-stable / K-polystable verdicts), 1 failed
reproduction or internal error, 2 unknown name / unreadable input,
3 precondition not met, 4 K-semistable but not polystable, 5 K-unstable.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import acceptance
from .errors import (DegenerateVolume, KStabError, NoRoot, ParseError, PreconditionFailed, UnknownName,
                     UnknownPoint, ValidationError)
from .invariants import delta_p1, dh, lambda_fixed, lambda_identity_gap, s_from_zariski, weighted_volume
from .ratpoly import as_rational, format_rational
from .series import BUILTIN_NAMES, CurveKind, GitClass, ModelKind, RefinedSeries, ZariskiVolProfile, builtin, \
    load_series, tomllib
from .verdict import Level, Verdict, jsonable, weighted_verdict
from .weights import (Constant, Exponential, futaki_g, is_weight, solve_soliton, weight_family, weight_from_doc,
                      weight_label)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECONDITION, EXIT_SEMISTABLE, EXIT_UNSTABLE = 0, 1, 2, 3, 4, 5
LEVEL_EXIT = {
    Level.K_STABLE: EXIT_OK,
    Level.K_POLYSTABLE: EXIT_OK,
    Level.K_SEMISTABLE: EXIT_SEMISTABLE,
    Level.K_UNSTABLE: EXIT_UNSTABLE,
}
DEFAULT_TOL = 1e-12
NO_EXP_WEIGHT = "no-exp-weight"


class InputError(KStabError):
    """Input file missing or unreadable."""


@dataclass
class RunConfig:
    input: str
    weight: str = "constant:1"
    tol: float = DEFAULT_TOL
    output_format: str = "table"
    seed: int = 0
    c: Fraction = Fraction(1, 2)
    git: GitClass | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


# -- rendering ------------------------------------------------------------------

def show(x) -> str:
    if isinstance(x, Fraction):
        return format_rational(x) if x.denominator == 1 else f"{format_rational(x)} ({float(x):.12g})"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def emit(rows: list[tuple[str, object]], fmt: str, out) -> None:
    """Key/value output in table, json or csv form."""
    if fmt == "json":
        out.write(json.dumps({k: jsonable(v) for k, v in rows}, indent=2) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in rows:
            w.writerow([k, format_rational(v) if isinstance(v, Fraction) else v])
    else:
        width = max((len(k) for k, _ in rows), default=0)
        for k, v in rows:
            out.write(f"{k.ljust(width)}  {show(v)}\n")


def emit_table(header: list[str], rows: list[list], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps([dict(zip(header, map(jsonable, r))) for r in rows], indent=2) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format_rational(v) if isinstance(v, Fraction) else (repr(v) if isinstance(v, float) else v)
                        for v in r])
    else:
        cells = [header] + [[show(v) for v in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for r in cells:
            out.write("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")


# -- inputs ---------------------------------------------------------------------

def load_input(cfg: RunConfig):
    """Builtin name or series file; ``--c`` and ``--git`` applied where they make sense."""
    if cfg.input in BUILTIN_NAMES:
        obj = builtin(cfg.input, c=cfg.c, git=cfg.git or GitClass.STABLE)
    elif Path(cfg.input).is_file():
        try:
            obj = load_series(cfg.input)
        except OSError as exc:
            raise InputError(str(exc)) from None
        curve = obj.target.curve
        if cfg.git is not None and curve is not None and curve.kind != CurveKind.CONIC:
            obj = obj.with_git(cfg.git)
    else:
        raise UnknownName(f"{cfg.input!r} is neither a builtin ({', '.join(BUILTIN_NAMES)}) nor a file")
    return obj


def require_series(obj, what: str) -> RefinedSeries:
    if not isinstance(obj, RefinedSeries):
        raise PreconditionFailed(f"{what} needs a refined series, got a volume profile")
    return obj


def parse_weight(spec: str, s: RefinedSeries, tol: float):
    """``constant:RAT``, ``exp:ETA``, ``soliton``, ``family:C`` or a TOML file with a [weight] table."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "constant":
            return Constant(as_rational(arg or 1))
        if kind == "exp":
            return Exponential(float(arg))
        if kind == "soliton" and not arg:
            return Exponential(solve_soliton(s, tol).eta0)
        if kind == "family":
            return weight_family(s, as_rational(arg), tol)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad weight {spec!r}: {exc}") from None
    path = Path(spec)
    if path.is_file():
        try:
            with open(path, "rb") as fh:
                return weight_from_doc(tomllib.load(fh))
        except (tomllib.TOMLDecodeError, ValueError) as exc:
            raise ParseError(f"{path}: {exc}") from None
    raise ParseError(f"unknown weight {spec!r}; use constant:C, exp:ETA, soliton, family:C or a TOML file")


def parse_family(text: str) -> list[Fraction]:
    try:
        return [as_rational(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad --family {text!r}: {exc}") from None


# -- commands -------------------------------------------------------------------

def cmd_info(cfg: RunConfig, out) -> int:
    obj = load_input(cfg)
    if isinstance(obj, ZariskiVolProfile):
        emit([("kind", "volume profile"), ("vol(L)", obj.vol_of_L), ("tau", obj.tau),
              ("vol(L - tE)", obj.profile.to_str("t")), ("S", s_from_zariski(obj))], cfg.output_format, out)
        return EXIT_OK
    s, t = obj, obj.target
    rows = [
        ("name", s.name),
        ("target", t.kind.value),
        ("vol(L)", t.l_degree),
        ("deg(-K)", t.anticanonical_degree),
        ("moment interval", str(s.alpha_interval)),
    ]
    if s.origin != 0 or s.scale != 1:
        rows += [("stored interval", str(s.moment)), ("origin", s.origin), ("scale", s.scale)]
    if s.normalization_shifts:
        rows.append(("normalization shifts", ", ".join(format_rational(a) for a in s.normalization_shifts)))
    if t.boundary.points:
        rows.append(("boundary", " + ".join(f"{format_rational(a)}*{label}" for label, a in t.boundary.points)))
    if t.curve is not None:
        git = f" ({t.curve.git_class.value})" if t.curve.git_class else ""
        rows.append(("curve", t.curve.kind.value + git))
    var = "t" if s.origin != 0 else "α"
    rows += [("vol", s.vol.to_str(var)), ("f", s.mobile_f.to_str(var))]
    for fp in s.fixed_parts:
        rows.append((f"fixed {fp.label} (degree {format_rational(fp.degree)})", fp.k.to_str(var)))
    emit(rows, cfg.output_format, out)
    return EXIT_OK


def cmd_soliton(cfg: RunConfig, out) -> int:
    s = require_series(load_input(cfg), "soliton")
    sol = solve_soliton(s, cfg.tol)
    emit([("eta0", sol.eta0), ("residual", sol.residual), ("iterations", sol.iterations), ("scale", sol.scale)],
         cfg.output_format, out)
    return EXIT_OK


def invariant_rows(s: RefinedSeries, g, tol: float) -> list[tuple[str, object]]:
    fut = futaki_g(s, g)
    ok = is_weight(s, g, 1e-6)
    lf = lambda_fixed(s, g)
    rows = [
        ("weight", weight_label(g)),
        ("V^g", weighted_volume(s, g)),
        ("Fut_g", fut),
        ("weight check", "pass" if ok else "not a weight (Fut_g != 0)"),
        ("lambda", lf.lambda_),
    ]
    rows += [(f"mu[{label}]", mu) for label, mu in lf.mus]
    if ok:
        rows.append(("lambda identity gap", lambda_identity_gap(s, lf)))
    if s.target.kind == ModelKind.PROJ_LINE:
        rep = delta_p1(s, g)
        for label, a, sv, ratio in rep.per_point:
            rows += [(f"A[{label}]", a), (f"S[{label}]", sv), (f"A/S[{label}]", ratio)]
        rows += [("delta", rep.delta), ("delta argmin", rep.argmin)]
    return rows


def cmd_invariants(cfg: RunConfig, out) -> int:
    obj = load_input(cfg)
    if isinstance(obj, ZariskiVolProfile):
        emit([("S", s_from_zariski(obj))], cfg.output_format, out)
        return EXIT_OK
    g = parse_weight(cfg.weight, obj, cfg.tol)
    emit(invariant_rows(obj, g, cfg.tol), cfg.output_format, out)
    return EXIT_OK


def render_verdict(v: Verdict, fmt: str, out) -> None:
    if fmt == "table":
        out.write(f"level  {v.level.value}\n")
        for k, val in v.certificate.items():
            if isinstance(val, list):
                val = ", ".join(f"{a}={show(b)}" for a, b in val)
            elif isinstance(val, Level | GitClass | CurveKind):
                val = val.value
            out.write(f"  {k}: {show(val)}\n")
    else:
        out.write(v.to_json(indent=2 if fmt == "json" else None) + "\n")


def cmd_verdict(cfg: RunConfig, out) -> int:
    s = require_series(load_input(cfg), "verdict")
    v = weighted_verdict(s, parse_weight(cfg.weight, s, cfg.tol))
    render_verdict(v, cfg.output_format, out)
    return LEVEL_EXIT[v.level]


def sweep_row(s: RefinedSeries, c: Fraction, tol: float) -> list:
    try:
        g = weight_family(s, c, tol)
    except NoRoot:
        return [c, "", "", NO_EXP_WEIGHT]
    eta = g.eta if isinstance(g, Exponential) else g.terms[1].eta
    mus = lambda_fixed(s, g).mus
    mu = mus[0][1] if len(mus) == 1 else ";".join(f"{label}={float(m)!r}" for label, m in mus)
    try:
        level = weighted_verdict(s, g).level.value
    except PreconditionFailed as exc:
        level = type(exc).__name__
    return [c, eta, float(mu) if len(mus) == 1 else mu, level]


def cmd_sweep(cfg: RunConfig, out, family: list[Fraction]) -> int:
    s = require_series(load_input(cfg), "sweep")
    rows = [sweep_row(s, c, cfg.tol) for c in family]
    emit_table(["c", "eta", "mu", "verdict"], rows, "csv" if cfg.output_format == "table" else cfg.output_format, out)
    return EXIT_OK


def cmd_export_dh(cfg: RunConfig, out, samples: int) -> int:
    s = require_series(load_input(cfg), "export-dh")
    if samples < 2:
        raise ParseError("--samples must be at least 2")
    d = dh(s, parse_weight(cfg.weight, s, cfg.tol))
    lo, hi = float(s.alpha_interval.lo), float(s.alpha_interval.hi)
    xs = [lo + (hi - lo) * i / (samples - 1) for i in range(samples)]
    rows = [[x, d.density(x)] for x in xs]
    emit_table(["alpha", "density"], rows, "csv" if cfg.output_format == "table" else cfg.output_format, out)
    return EXIT_OK


def cmd_reproduce(only: str | None, seed: int, out) -> int:
    t0 = time.perf_counter()
    results = acceptance.run(only, seed)
    for r in results:
        out.write(r.line() + "\n")
    passed = sum(r.ok for r in results)
    out.write(f"{passed}/{len(results)} passed in {time.perf_counter() - t0:.2f}s\n")
    return EXIT_OK if results and passed == len(results) else EXIT_FAIL


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kstab", description="Weighted K-stability via rank-1 refinements.")
    p.add_argument("command", choices=["info", "soliton", "invariants", "verdict", "reproduce", "sweep", "export-dh"])
    p.add_argument("input", nargs="?", help="builtin name or series TOML file")
    p.add_argument("--weight", default="constant:1", help="constant:C, exp:ETA, soliton, family:C or a TOML file")
    p.add_argument("--c", default="1/2", help="boundary coefficient for conic-P2")
    p.add_argument("--git", choices=[g.value for g in GitClass], help="GIT class of the cubic / biconic curve")
    p.add_argument("--tol", type=float, default=None, help="solver tolerance (env KSTAB_TOL)")
    p.add_argument("--format", dest="output_format", choices=["table", "json", "csv"], default="table")
    p.add_argument("--only", help="reproduce: comma-separated check numbers or groups")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--family", default="0,1/2,1,2,4", help="sweep: comma-separated family parameters")
    p.add_argument("--seed", type=int, default=0)
    return p


def default_tol() -> float:
    env = os.environ.get("KSTAB_TOL")
    return float(env) if env else DEFAULT_TOL


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return cmd_reproduce(args.only, args.seed, out)
        if not args.input:
            raise ParseError(f"{args.command} needs an input")
        try:
            cfg = RunConfig(
                input=args.input,
                weight=args.weight,
                tol=args.tol if args.tol is not None else default_tol(),
                output_format=args.output_format,
                seed=args.seed,
                c=as_rational(args.c),
                git=GitClass(args.git) if args.git else None,
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc)) from None
        if args.command == "sweep":
            return cmd_sweep(cfg, out, parse_family(args.family))
        if args.command == "export-dh":
            return cmd_export_dh(cfg, out, args.samples)
        return {"info": cmd_info, "soliton": cmd_soliton, "invariants": cmd_invariants,
                "verdict": cmd_verdict}[args.command](cfg, out)
    except (UnknownName, ParseError, ValidationError, InputError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PreconditionFailed, NoRoot, DegenerateVolume, UnknownPoint) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (KStabError, ValueError, ZeroDivisionError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
