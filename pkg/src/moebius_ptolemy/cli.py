"""Command line entry point.

Exit codes: 0 pass, 1 a property was violated (including an input table that
fails the metric axioms), 2 unreadable input or bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import coordinatization as co
from . import model_space as ms
from .core_metric import metric_inversion, validate
from .cross_ratio import crt, is_ptolemy, moebius_equivalent, ptolemy_defect
from .errors import InputError, ValidationError
from .io import dumps, jsonable, load_map_word, load_space, space_to_csv, space_to_dict
from .suites import SUITES, Check, Config, SuiteReport, _rng, coordinatization_checks, parse_mode, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None, help="relative tolerance (default 1e-9)")
    common.add_argument("--mode", default=None, help="exhaustive | sample:N")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--output", choices=("json", "text"), default="json")
    common.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--exact", action="store_true", help="read distances as exact rationals")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="input format (default: by suffix)")

    p = _Parser(prog="moebius-ptolemy", description="Moebius structure and Ptolemy property checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check the extended metric axioms")
    s.add_argument("file")

    s = sub.add_parser("crt", parents=[common], help="cross-ratio triple of four points")
    s.add_argument("file")
    s.add_argument("ids", nargs=4)

    s = sub.add_parser("invert", parents=[common], help="metric inversion at a point")
    s.add_argument("file")
    s.add_argument("--at", required=True)
    s.add_argument("--radius", default="1")
    s.add_argument("--out", help="write the inverted space (.json or .csv)")

    s = sub.add_parser("check-ptolemy", parents=[common], help="certify the Ptolemy property")
    s.add_argument("file")

    s = sub.add_parser("equivalence", parents=[common], help="compare the Moebius structures of two spaces")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--map", help="JSON object mapping ids of A to ids of B")

    s = sub.add_parser("model-verify", parents=[common], help="run verification suites on the model space")
    s.add_argument("--suite", default="all", help="suite name or 'all'")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1, help="worker processes for --suite all")
    s.add_argument("--space", help="input space for the metric-axioms and ptolemy suites")
    s.add_argument("--map", help="map word JSON to check as a strong inversion")
    s.add_argument("--omega", help="first pole, comma separated or 'inf'")
    s.add_argument("--omega-prime", help="second pole")
    s.add_argument("--radius", type=float)
    s.add_argument("--witness", help="a point of the inversion sphere")
    s.add_argument("--emit-map", metavar="PATH", help="write the constructed inversion word")

    s = sub.add_parser("coordinatize", parents=[common], help="build and check coordinates on the model space")
    s.add_argument("--dim", type=int, default=None)
    return p


def _config(args) -> Config:
    return Config.from_env(
        tolerance_rel=args.tolerance,
        seed=args.seed,
        mode=parse_mode(args.mode) if args.mode else None,
        dim=getattr(args, "dim", None),
        arithmetic="exact" if args.exact else None,
    )


def _load(args, path, cfg: Config, check: bool = True):
    return load_space(path, args.format, exact=cfg.arithmetic == "exact", check=check,
                      rel_tol=cfg.tolerance_rel, abs_tol=cfg.tolerance_abs)


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {json.dumps(jsonable(v))}")
    return "\n".join(lines)


def emit(obj, args, out=None) -> None:
    """Write a report as JSON or text to --report or stdout."""
    if isinstance(obj, list) and obj and isinstance(obj[0], SuiteReport):
        text = dumps([r.to_dict() for r in obj]) if args.output == "json" else "".join(r.to_text() for r in obj)
    elif isinstance(obj, SuiteReport):
        text = dumps(obj.to_dict()) if args.output == "json" else obj.to_text()
    else:
        text = dumps(obj) if args.output == "json" else _text(jsonable(obj)) + "\n"
    if args.report:
        try:
            Path(args.report).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write report: {exc}") from None
    else:
        (out or sys.stdout).write(text)


def _find_id(space, token: str):
    for p in space.point_ids:
        if str(p) == token:
            return p
    raise InputError(f"unknown point id {token!r}")


def _parse_point(text: str | None, dim: int | None = None):
    if text is None:
        raise InputError("missing pole coordinates")
    if text.strip().lower() in ("inf", "infinity"):
        return ms.INFINITY
    try:
        p = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"bad point {text!r}") from None
    if dim is not None and len(p) != dim:
        raise InputError(f"point {text!r} is not in dimension {dim}")
    return p


def _radius(text: str, exact: bool):
    from fractions import Fraction

    try:
        r = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad radius {text!r}") from None
    return r if exact else float(r)


def cmd_validate(args, cfg):
    space = _load(args, args.file, cfg, check=False)
    rep = validate(space, cfg.tolerance_rel, cfg.tolerance_abs)
    d = rep.to_dict()
    emit({"suite": "validate", "status": "pass" if rep.ok else "fail", "points": len(space), **d}, args)
    return EXIT_PASS if rep.ok else EXIT_FAIL


def cmd_crt(args, cfg):
    space = _load(args, args.file, cfg)
    q = tuple(_find_id(space, t) for t in args.ids)
    t = crt(space, q)
    exact = [str(v) for v in t.entries] if space.is_exact else None
    emit({"quadruple": [str(p) for p in q], "crt": list(t.entries), "crt_exact": exact,
          "ptolemy_defect": ptolemy_defect(t)}, args)
    return EXIT_PASS


def cmd_invert(args, cfg):
    space = _load(args, args.file, cfg)
    z = _find_id(space, args.at)
    inv = metric_inversion(space, z, _radius(args.radius, cfg.arithmetic == "exact"))
    if args.out:
        out = Path(args.out)
        text = space_to_csv(inv) if out.suffix.lower() == ".csv" else dumps(space_to_dict(inv))
        try:
            out.write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc}") from None
    emit(space_to_dict(inv), args)
    return EXIT_PASS


def cmd_check_ptolemy(args, cfg):
    space = _load(args, args.file, cfg)
    rep = is_ptolemy(space, cfg.mode, cfg.tolerance_rel)
    emit(rep.to_dict(), args)
    return rep.exit_code


def cmd_equivalence(args, cfg):
    a, b = _load(args, args.a, cfg), _load(args, args.b, cfg)
    corr = None
    if args.map:
        try:
            raw = json.loads(Path(args.map).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read correspondence: {exc}") from None
        if not isinstance(raw, dict):
            raise InputError("correspondence must be a JSON object")
        corr = {_find_id(a, str(k)): _find_id(b, str(v)) for k, v in raw.items()}
    res = moebius_equivalent(a, b, corr, cfg.mode, cfg.tolerance_rel)
    emit(res.to_dict(), args)
    return EXIT_PASS if res.equivalent else EXIT_FAIL


def _map_report(args, cfg) -> SuiteReport:
    """Axiom check of a given (or constructed) strong inversion."""
    om = _parse_point(args.omega, cfg.dim)
    om2 = _parse_point(args.omega_prime, cfg.dim)
    if args.map:
        word = load_map_word(args.map)
        if word.dim != cfg.dim:
            raise InputError(f"map word has dimension {word.dim}, expected {cfg.dim}")
        if args.radius is None and args.witness is None:
            raise InputError("--radius or --witness is needed to locate the sphere")
    else:
        word = ms.strong_inversion(om, om2, radius=args.radius,
                                   witness=None if args.witness is None else _parse_point(args.witness, cfg.dim))
    if args.radius is not None:
        radius = args.radius
    else:
        # radius of the sphere through the witness, measured in the metric with omega' at infinity
        radius = ms.pole_distance(om, _parse_point(args.witness, cfg.dim), om2)
    rng = _rng(cfg, "map")
    sphere = ms.sphere_points(om, om2, radius, 100, seed=int(rng.integers(1 << 31)))
    circles = ms.circles_through_poles(om, om2, 20, seed=int(rng.integers(1 << 31)))
    rep = ms.verify_s_inversion(word, om, om2, sphere, circles, tol=1e-10)
    anchors = {
        "involution": "s-inversion axiom: phi^2 = id",
        "pole_swap": "s-inversion axiom: phi swaps the poles",
        "sphere_fixed": "s-inversion axiom: S fixed pointwise",
        "circles_preserved": "s-inversion axiom: circles through the poles preserved",
    }
    checks = [Check(k, anchors[k], v, rep.tol) for k, v in rep.results.items()]
    if args.emit_map:
        try:
            Path(args.emit_map).write_text(dumps(word.to_list()))
        except OSError as exc:
            raise InputError(f"cannot write map: {exc}") from None
    return SuiteReport("s-inversion-map", checks, cfg.to_dict())


def _run_named(item):
    name, cfg = item
    return run_suite(name, cfg)


def cmd_model_verify(args, cfg):
    if args.map or args.omega or args.omega_prime or args.emit_map:
        rep = _map_report(args, cfg)
        emit(rep, args)
        return rep.exit_code
    space = _load(args, args.space, cfg) if args.space else None
    if args.suite == "all":
        names = list(SUITES)
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                reports = list(pool.map(_run_named, [(n, cfg) for n in names]))
        else:
            reports = [run_suite(n, cfg) for n in names]
        emit(reports, args)
        codes = [r.exit_code for r in reports]
        return EXIT_INPUT if EXIT_INPUT in codes else max(codes)
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}")
    if space is not None and args.suite not in ("metric-axioms", "ptolemy"):
        raise InputError("--space applies only to the metric-axioms and ptolemy suites")
    rep = run_suite(args.suite, cfg, space)
    emit(rep, args)
    return rep.exit_code


def cmd_coordinatize(args, cfg):
    chart, steps = co.build_chart(cfg.dim)
    checks = coordinatization_checks(cfg.dim, _rng(cfg, "coordinatize"))
    rep = SuiteReport("coordinatize", checks, cfg.to_dict())
    if args.output == "text":
        emit(rep, args)
    else:
        d = rep.to_dict()
        d["chart"] = chart.to_dict()
        d["unit_points"] = [s.unit_point.tolist() for s in steps]
        emit(d, args)
    return rep.exit_code


COMMANDS = {
    "validate": cmd_validate,
    "crt": cmd_crt,
    "invert": cmd_invert,
    "check-ptolemy": cmd_check_ptolemy,
    "equivalence": cmd_equivalence,
    "model-verify": cmd_model_verify,
    "coordinatize": cmd_coordinatize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"invalid space: {len(exc.report.violations)} violation(s)", file=sys.stderr)
        print(dumps(exc.report.to_dict()), file=sys.stderr, end="")
        return EXIT_FAIL
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
