"""Command-line entry point: ``flatcycles {algebra,units,config,certify}``.

Every command prints one JSON run report on stdout.  Wall-clock time lives in
the separate ``timing`` field so that everything else is byte-reproducible.
Exit codes: 0 success or certified, 2 parse/usage error, 3 inconclusive,
4 search window exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .certify import VERDICT_CERTIFIED, certify
from .errors import NotFound, NotNormalizable, ParseError
from .exactreal import QuadField, quad_sign
from .flats import anchor_configuration, build_configuration, perturbation_radius
from .quaternion import (
    AlgebraDesc,
    GroupSpec,
    OrderSpec,
    enumerate_norm_one,
    in_congruence_subgroup,
    is_polar_regular,
    normalize_positive_a,
)
from .render import render_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
EXIT_NOT_FOUND = 4

REPORT_VERSION = 1


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _algebra(args) -> AlgebraDesc:
    try:
        field = QuadField(args.d)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return AlgebraDesc.parse(field.d, args.a, args.b)


def _normalized(alg: AlgebraDesc, warnings: list[str]) -> AlgebraDesc:
    if alg.is_normalized():
        return alg
    try:
        target, iso = normalize_positive_a(alg)
    except NotNormalizable as exc:
        raise UsageError(f"{exc}; supply a presentation with a > 0 at every split place") from exc
    warnings.append(f"presentation rewritten as ({target.a}, {target.b}) so that a > 0 at split places")
    return target


def _write(path: str | None, text: str, outputs: list[str]) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
        outputs.append(path)


# ---------------------------------------------------------------------------
# commands


def cmd_algebra(args, report: dict) -> int:
    alg = _algebra(args)
    embeddings = []
    for e in alg.field.embeddings():
        embeddings.append({
            "index": e.index,
            "sign_a": quad_sign(alg.a, e),
            "sign_b": quad_sign(alg.b, e),
            "split": e in alg.split_embeddings,
        })
    result = {
        "algebra": alg.to_json(),
        "integral": alg.is_integral(),
        "embeddings": embeddings,
        "r": alg.r,
        "normalized": alg.is_normalized(),
        "normalized_presentation": None,
    }
    if alg.r == 0:
        report["warnings"].append("no split real place: the algebra is ramified everywhere at infinity and has no flats")
    try:
        target, iso = normalize_positive_a(alg)
        result["normalized_presentation"] = {"algebra": target.to_json(), "map": iso.to_json()}
    except NotNormalizable as exc:
        report["warnings"].append(str(exc))
    report["result"] = result
    _write(args.out, _dumps(result), report["outputs"])
    return EXIT_OK


def cmd_units(args, report: dict) -> int:
    alg = _algebra(args)
    if not alg.is_integral():
        raise UsageError("a and b must be integral to define the order")
    if alg.r == 0:
        report["warnings"].append("no split real place: polar regularity is vacuous")
    g = GroupSpec(OrderSpec(alg), args.level, args.height)
    units = []
    for x in enumerate_norm_one(g):
        units.append({
            "coords": x.to_json(),
            "polar_regular": is_polar_regular(x),
            "in_congruence": in_congruence_subgroup(x, g),
        })
    result = {"group": g.to_json(), "count": len(units), "units": units}
    report["result"] = {"group": g.to_json(), "count": len(units),
                        "in_congruence": sum(u["in_congruence"] for u in units)}
    text = _dumps(result)
    if args.out:
        _write(args.out, text, report["outputs"])
    else:
        report["result"]["units"] = units
    return EXIT_OK


def cmd_config(args, report: dict) -> int:
    if args.n < 1 or args.r < 1:
        raise UsageError("--n and --r must be positive")
    cfg = build_configuration(args.n, args.r)
    data = cfg.to_json()
    report["result"] = {
        "n": cfg.n,
        "r": cfg.r,
        "pattern_holds": cfg.pattern_holds(),
        "perturbation_radius": str(perturbation_radius(cfg)),
    }
    if args.out:
        _write(args.out, _dumps(data), report["outputs"])
    else:
        report["result"]["config"] = data
    if args.svg:
        _write(args.svg, render_config(cfg, f"configuration n={cfg.n}"), report["outputs"])
    return EXIT_OK


def cmd_certify(args, report: dict) -> int:
    alg = _normalized(_algebra(args), report["warnings"])
    if alg.r < 1:
        raise UsageError("the algebra has no split real place, so there are no flats")
    if not alg.is_integral():
        raise UsageError("a and b must be integral to define the order")
    if args.n < 1:
        raise UsageError("--n must be positive")
    g = GroupSpec(OrderSpec(alg), args.level, args.height)
    canonical = build_configuration(args.n, alg.r)
    try:
        anchoring = anchor_configuration(canonical, g)
    except NotFound as exc:
        report["result"] = {"verdict": "NotFound", "reason": str(exc),
                            "hint": "raise --height to widen the search window"}
        return EXIT_NOT_FOUND
    cert = certify(anchoring.config, g, {"algebra": alg.to_json(), "anchoring": anchoring.to_json()})
    for lvl, per in zip(anchoring.anchor_levels, anchoring.periods):
        if lvl != g.level:
            cert.caveats.append(
                f"an A-flat is stabilized by a unit α outside level {g.level}; α^{per} lies in the "
                "congruence subgroup and stabilizes the same flat"
            )
            break
    data = cert.to_json()
    report["result"] = {"verdict": cert.verdict, "n": cert.n, "matrix": cert.matrix.entries}
    _write(args.out, _dumps(data), report["outputs"])
    if not args.out:
        report["result"]["certificate"] = data
    _write(args.csv, cert.matrix.to_csv(), report["outputs"])
    if args.svg:
        _write(args.svg, render_config(anchoring.config, f"anchored configuration n={args.n}"), report["outputs"])
    return EXIT_OK if cert.verdict == VERDICT_CERTIFIED else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flatcycles", description="Flat cycles in arithmetic quotients of (H²)^r.")
    sub = p.add_subparsers(dest="command", required=True)

    def algebra_flags(sp):
        sp.add_argument("--d", type=int, default=1, help="square-free d > 1 for Q(√d); 1 means Q")
        sp.add_argument("--a", required=True, help='first structure constant, e.g. "0+1√d"')
        sp.add_argument("--b", required=True, help="second structure constant")

    sp = sub.add_parser("algebra", help="splitting data of (a,b)_F")
    algebra_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_algebra)

    sp = sub.add_parser("units", help="norm-one units in a height window")
    algebra_flags(sp)
    sp.add_argument("--height", type=int, default=1)
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_units)

    sp = sub.add_parser("config", help="canonical configuration of flats")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_config)

    sp = sub.add_parser("certify", help="intersection-matrix certificate")
    algebra_flags(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--height", type=int, default=5)
    sp.add_argument("--level", type=int, default=2)
    sp.add_argument("--out")
    sp.add_argument("--csv")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_certify)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    report = {"version": REPORT_VERSION, "command": args.command, "argv": argv, "parameters": params,
              "outputs": [], "warnings": [], "result": None}
    start = time.perf_counter()
    try:
        code = args.func(args, report)
    except (ParseError, UsageError) as exc:
        report["error"] = str(exc)
        code = EXIT_USAGE
    except OSError as exc:
        report["error"] = f"I/O error: {exc}"
        code = EXIT_USAGE
    report["exit_code"] = code
    report["timing"] = {"seconds": round(time.perf_counter() - start, 3)}
    sys.stdout.write(_dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
