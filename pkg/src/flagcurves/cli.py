"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical rank ambiguity.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import rational as rl
from .algebra import GradedAlgebra, GradedSubspace, build_g2, build_sl_flag, build_slb
from .duality import (G2_CASES, RankAmbiguity, find_compatible_bilinear, find_compatible_three_form,
                      g2_case_report)
from .frames import DegenerateFrame, OrientationError, ProjectiveCurve, TypeViolation, projective_invariants
from .normalization import (DegenerateKillingError, NotComplementary, generic_complement,
                            invariant_complement_certificate)
from .octonions import derivation_algebra
from .ode.expr import DomainError, ExprSyntaxError
from .ode.solve import (CROSS_TOL, THETA_TOL, OdeProblem, default_initial_conditions,
                        structure_verdict)
from .structure import PARAMETRIZED, UNPARAMETRIZED, TripleError, h1_plus, symmetry_algebra

EXIT_OK, EXIT_INPUT, EXIT_RANK = 0, 2, 3
MIN_NODES = 16

EXPR_HELP = """expression grammar for --f (whitespace ignored):
  expr  := term (('+'|'-') term)*
  term  := unary (('*'|'/') unary)*
  unary := '-' unary | power
  power := atom ('^' unary)?         right associative, binds tighter than unary minus
  atom  := number | variable | func '(' expr ')' | '(' expr ')'
  func  := sin | cos | exp | log | sqrt
  variables: x, y, y', y'', ... or y0, y1, ..., yk with k = order - 1
"""


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    out_dir: Path | None = None
    fmt: str = "json"

    def validate(self) -> None:
        for name, v in self.tolerances.items():
            if not v > 0:
                raise InputError(f"tolerance {name} must be positive")
        n = self.grid.get("n")
        if n is not None and n < MIN_NODES:
            raise InputError(f"grids need at least {MIN_NODES} nodes")


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _ints(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()] if text else []


def load_algebra(spec: str) -> GradedAlgebra:
    """A JSON file path, or one of sl:2,2,1 / slb:4:skew:2 / g2:B / der."""
    path = Path(spec)
    if path.is_file():
        return GradedAlgebra.from_json(json.loads(path.read_text()))
    kind, _, rest = spec.partition(":")
    if kind == "sl":
        return build_sl_flag(_ints(rest))
    if kind == "slb":
        parts = rest.split(":")
        if len(parts) not in (2, 3):
            raise InputError("slb spec is slb:<n>:<symmetric|skew>[:<flag dims>]")
        return build_slb(int(parts[0]), parts[1], _ints(parts[2]) if len(parts) == 3 else [])
    if kind == "g2":
        return build_g2(rest or "B")
    if kind == "der":
        return derivation_algebra()
    raise InputError(f"cannot read algebra {spec!r}")


def parse_element(A: GradedAlgebra, text: str) -> tuple:
    """Comma-separated coefficients, or label=coeff pairs separated by ';'."""
    text = text.strip()
    if "=" in text:
        spec = {}
        for item in text.split(";"):
            label, _, coeff = item.partition("=")
            spec[label.strip()] = Fraction(coeff.strip())
        return A.element(spec).coefficients
    coeffs = [Fraction(c.strip()) for c in text.split(",")]
    if len(coeffs) != A.dim:
        raise InputError(f"expected {A.dim} coefficients, got {len(coeffs)}")
    return tuple(coeffs)


def load_curve(path: str) -> ProjectiveCurve:
    data = json.loads(Path(path).read_text())
    try:
        k, t0, dt, n = int(data["k"]), float(data["t0"]), float(data["dt"]), int(data["n"])
        values = np.asarray(data["values"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise InputError(f"curve file needs k, t0, dt, n and values: {exc}") from exc
    if n < MIN_NODES:
        raise InputError(f"grids need at least {MIN_NODES} nodes")
    if values.shape != (n, k + 1):
        raise InputError(f"values must have shape ({n}, {k + 1})")
    t = t0 + dt * np.arange(n)
    ders = [np.asarray(d, dtype=float) for d in data.get("derivatives", [])]
    return ProjectiveCurve(k, t, values, ders)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return rl.fmt(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable) + "\n"


def traces_csv(t: np.ndarray, names: list, values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *names])
    for j, tj in enumerate(t):
        w.writerow([repr(float(tj)), *(repr(float(v)) for v in values[j])])
    return buf.getvalue()


def emit(cfg: RunConfig, files: dict[str, str], primary: str) -> None:
    """Write ``files`` into the output directory, or print the primary one."""
    if cfg.out_dir is None:
        sys.stdout.write(files[primary])
        return
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in sorted(files.items()):
        (cfg.out_dir / name).write_text(text)


def _dims(d: dict) -> dict:
    return {str(k): v for k, v in sorted(d.items())}


def _subspace_json(S: GradedSubspace) -> dict:
    data = S.to_json()
    try:
        data["labels"] = S.labels()
    except (ValueError, KeyError):
        pass
    return data


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_algebra(args, cfg):
    A = load_algebra(args.spec)
    report = {"name": A.name, "dimension": A.dim, "graded_dims": _dims(A.graded_dims()),
              "algebra": A.to_json()}
    emit(cfg, {"algebra.json": dump_json(report)}, "algebra.json")


def _symmetry(args):
    A = load_algebra(args.algebra)
    xs = [parse_element(A, x) for x in args.x]
    mode = PARAMETRIZED if getattr(args, "parametrized", False) else UNPARAMETRIZED
    return A, xs, symmetry_algebra(A, xs if len(xs) > 1 else xs[0], mode)


def cmd_symmetry(args, cfg):
    A, xs, sg = _symmetry(args)
    report = {"algebra": A.name, "mode": sg.mode, "dim": sg.dim, "graded_dims": _dims(sg.graded_dims()),
              "reductive": sg.reductive_flag, "subspace": _subspace_json(sg.subspace)}
    emit(cfg, {"symmetry.json": dump_json(report)}, "symmetry.json")


def cmd_complement(args, cfg):
    A, xs, sg = _symmetry(args)
    if len(xs) != 1:
        raise InputError("complement needs a single x")
    x = xs[0]
    report = {"algebra": A.name, "sg_graded_dims": _dims(sg.graded_dims())}
    if args.mode == "generic":
        space = generic_complement(A, x, sg)
        report["W"] = _subspace_json(space.W)
        report["invariant"] = space.invariant_flag
        report["construction"] = space.construction
    else:
        cert = invariant_complement_certificate(A, x, sg)
        report["outcome"] = cert.outcome
        report["reason"] = cert.reason
        report["witness"] = {str(k): v for k, v in cert.witness.items()}
        if cert.space is not None:
            report["W"] = _subspace_json(cert.space.W)
            report["invariant"] = cert.space.invariant_flag
            report["construction"] = cert.space.construction
    emit(cfg, {"complement.json": dump_json(report)}, "complement.json")


def cmd_cohom(args, cfg):
    A, xs, sg = _symmetry(args)
    res = h1_plus(A, xs, sg)
    report = {"algebra": A.name, "h1_plus": res.dimension, "by_degree": _dims(res.by_degree),
              "complex_ok": res.complex_ok, "sg_graded_dims": _dims(sg.graded_dims())}
    emit(cfg, {"cohom.json": dump_json(report)}, "cohom.json")


def cmd_invariants(args, cfg):
    c = load_curve(args.curve)
    mode = PARAMETRIZED if args.parametrized else UNPARAMETRIZED
    tr = projective_invariants(c, mode)
    csv_text = traces_csv(tr.t, tr.names, tr.values)
    summary = {"k": c.k, "mode": mode, "names": tr.names, "nodes": len(tr.t),
               "max_abs": {n: float(np.max(np.abs(col))) if col.size else 0.0
                           for n, col in zip(tr.names, tr.values.T)},
               "residual_max": float(np.max(np.abs(tr.result.residual)))}
    files = {"invariants.csv": csv_text, "invariants.json": dump_json(summary)}
    emit(cfg, files, "invariants.csv" if cfg.fmt == "csv" else "invariants.json")


def cmd_duality(args, cfg):
    c = load_curve(args.curve)
    if args.which == "bilinear":
        form = find_compatible_bilinear(c)
    else:
        form = find_compatible_three_form(c)
    report = {"kind": args.which, "found": form is not None,
              "form": None if form is None else form.to_json()}
    emit(cfg, {"duality.json": dump_json(report)}, "duality.json")


def cmd_g2(args, cfg):
    report = g2_case_report(args.case).to_json()
    emit(cfg, {"g2.json": dump_json(report)}, "g2.json")


def cmd_ode(args, cfg):
    p = OdeProblem.parse(args.order, args.f)
    n = int(round((args.t1 - args.t0) / args.dt)) + 1
    cfg.grid["n"] = n
    cfg.validate()
    t = args.t0 + args.dt * np.arange(n)
    inits = default_initial_conditions(p.order, args.solutions, args.seed)
    v = structure_verdict(p, t, inits, tol=args.tol, cross_tol=args.cross_tol)
    report = v.to_json()
    report["order"] = p.order
    report["grid"] = {"t0": args.t0, "t1": float(t[-1]), "dt": args.dt, "n": n}
    files = {"verdict.json": dump_json(report),
             "theta.csv": traces_csv(v.traces.t, v.traces.names, v.traces.values)}
    emit(cfg, files, "theta.csv" if cfg.fmt == "csv" else "verdict.json")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flagcurves", description="Moving frames of curves in flag varieties.")
    ap.add_argument("--out-dir", type=Path, help="write report files here instead of printing")
    ap.add_argument("--format", choices=("json", "csv"),
                    help="what to print when a command has both kinds of output "
                         "(default csv for invariants, json otherwise)")
    ap.set_defaults(fmt_default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    alg_help = "algebra JSON file or one of sl:<blocks>, slb:<n>:<parity>[:<flag>], g2:<B|P1|P2>, der"
    p = sub.add_parser("algebra", help="build a graded algebra and print it")
    p.add_argument("spec", help=alg_help)
    p.set_defaults(func=cmd_algebra)

    def with_x(p):
        p.add_argument("--algebra", required=True, help=alg_help)
        p.add_argument("--x", required=True, action="append",
                       help="degree -1 element: comma-separated coefficients or 'label=c;label=c' (repeatable)")

    p = sub.add_parser("symmetry", help="symmetry algebra of the flat curve of type x")
    with_x(p)
    p.add_argument("--parametrized", action="store_true")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("complement", help="normalization space W")
    with_x(p)
    p.add_argument("--mode", choices=("generic", "invariant"), default="invariant")
    p.set_defaults(func=cmd_complement)

    p = sub.add_parser("cohom", help="dimension of H^1_+")
    with_x(p)
    p.set_defaults(func=cmd_cohom)

    p = sub.add_parser("invariants", help="Wilczynski invariants of a sampled curve")
    p.add_argument("--curve", required=True, help="curve JSON {k, t0, dt, n, values[, derivatives]}")
    p.add_argument("--parametrized", action="store_true")
    p.set_defaults(func=cmd_invariants, fmt_default="csv")

    p = sub.add_parser("duality", help="compatible bilinear form or G2 three-form")
    p.add_argument("which", choices=("bilinear", "g2form"))
    p.add_argument("--curve", required=True)
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("g2", help="G2 case reports")
    p.add_argument("action", choices=("report",))
    p.add_argument("--case", required=True, choices=sorted(G2_CASES))
    p.set_defaults(func=cmd_g2)

    p = sub.add_parser("ode", help="structure analysis of y^(order) = f",
                       epilog=EXPR_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("action", choices=("analyze",))
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--f", required=True, help="right-hand side, see grammar below")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--solutions", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=THETA_TOL)
    p.add_argument("--cross-tol", type=float, default=CROSS_TOL)
    p.set_defaults(func=cmd_ode)
    return ap


INPUT_ERRORS = (InputError, ValueError, KeyError, ExprSyntaxError, DomainError, OSError,
                json.JSONDecodeError, DegenerateFrame, OrientationError, TypeViolation, TripleError,
                DegenerateKillingError, NotComplementary, FloatingPointError, ZeroDivisionError)


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    cfg = RunConfig(args.command, out_dir=args.out_dir, fmt=args.format or args.fmt_default)
    for name in ("tol", "cross_tol"):
        if hasattr(args, name):
            cfg.tolerances[name] = getattr(args, name)
    try:
        cfg.validate()
        if getattr(args, "solutions", 3) < 3:
            raise InputError("need at least 3 base solutions")
        args.func(args, cfg)
    except RankAmbiguity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
