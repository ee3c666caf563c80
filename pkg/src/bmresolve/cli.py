"""Command line: ``bmresolve inv | resolve | check``.

Exit codes: 0 success, 1 validation failure or year limit reached,
2 unsupported or malformed input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .atlas import HypersurfaceState, root_chart
from .invariant import InvariantError, compute_inv
from .poly import ParseError, format_rat, infer_varnames, parse_point, parse_poly
from .resolve import (
    MAX_YEARS_EXCEEDED,
    UNSUPPORTED_INPUT,
    RunConfig,
    run_resolution,
)
from .trace import emit_document, emit_trace, parse_trace, render_text, replay

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNSUPPORTED = 2


def _vars(args) -> List[str]:
    if args.vars:
        return [v.strip() for v in args.vars.split(",") if v.strip()]
    return infer_varnames(args.poly)


def _read_poly(args):
    names = _vars(args)
    if not names:
        raise ParseError("no variables: pass --vars for a constant polynomial", 0)
    return parse_poly(args.poly, names)


def cmd_inv(args, out) -> int:
    f = _read_poly(args)
    point = parse_point(args.point) if args.point else tuple(0 for _ in f.varnames)
    if len(point) != f.nvars:
        print(f"error: point has {len(point)} coordinates, expected {f.nvars}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    try:
        res = compute_inv(HypersurfaceState(root_chart(f.nvars, f.varnames), f), point)
    except InvariantError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    names = f.varnames
    print(str(res.inv), file=out)
    if res.inv.mu_x is not None:
        print(f"mu_X = {format_rat(res.inv.mu_x)}", file=out)
    for lev in res.levels:
        r = lev.level
        H = ", ".join(f"({h}, {format_rat(m)})" for h, m in lev.H) or "empty"
        N = ", ".join(f"{names[k]}=0" for k in sorted(lev.N_vars))
        print(f"level {r}: s_{r} = {lev.s}, N_{r} = {{{N}}}, H_{r} = {{{H}}}, "
              f"mu_{r + 1} = {format_rat(lev.mu)}, nu_{r + 1} = {format_rat(lev.nu)}", file=out)
    comp = res.selected()
    eqs = ", ".join(f"{e} = 0" for e in comp.equations)
    print(f"center (local coordinates at the point): {{{eqs}}}", file=out)
    return EXIT_OK


def cmd_resolve(args, out) -> int:
    f = _read_poly(args)
    points = tuple(parse_point(p) for p in (args.point or ()))
    policy = "explicit" if points else args.follow
    cfg = RunConfig(max_years=args.max_years, follow_policy=policy, points=points,
                    validate_admissibility=not args.no_admissibility, emit_probe_checks=args.probe)
    outcome = run_resolution(f, cfg)
    if args.trace:
        Path(args.trace).write_bytes(emit_trace(outcome))
    if args.text:
        out.write(render_text(emit_document(outcome)))
    else:
        print(f"{outcome.status}: {outcome.years} year(s), {len(outcome.nodes)} followed point(s)", file=out)
        if outcome.message:
            print(outcome.message, file=out)
    if outcome.status == UNSUPPORTED_INPUT:
        return EXIT_UNSUPPORTED
    if outcome.status == MAX_YEARS_EXCEEDED:
        return EXIT_FAIL
    return EXIT_OK


def cmd_check(args, out) -> int:
    try:
        doc = parse_trace(Path(args.trace).read_bytes())
        problems, report = replay(doc)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"unreadable trace: {exc}", file=out)
        return EXIT_FAIL
    for p in problems:
        print(f"MISMATCH {p}", file=out)
    for name, ok, detail in report:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" [{detail}]" if detail else ""), file=out)
    return EXIT_OK if not problems and all(ok for _, ok, _ in report) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bmresolve", description="Canonical resolution of hypersurface singularities.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log warnings from the driver")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inv", help="invariant at a point")
    p.add_argument("--poly", required=True)
    p.add_argument("--vars", help="comma-separated variable names (default: names in the polynomial, natural order)")
    p.add_argument("--point", help="comma-separated rationals (default: origin)")
    p.set_defaults(func=cmd_inv)

    p = sub.add_parser("resolve", help="run the resolution algorithm")
    p.add_argument("--poly", required=True)
    p.add_argument("--vars")
    p.add_argument("--max-years", type=int, default=32)
    p.add_argument("--follow", choices=("origins", "rich"), default="rich")
    p.add_argument("--point", action="append", help="follow this year-0 point (repeatable)")
    p.add_argument("--trace", help="write the JSON trace here")
    p.add_argument("--text", action="store_true", help="print the year-by-year report")
    p.add_argument("--no-admissibility", action="store_true", help="skip sampled admissibility checks")
    p.add_argument("--probe", action="store_true", help="record test blow-up probe checks in the trace")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("check", help="replay and validate a trace")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_check)
    return ap


def cli_main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_UNSUPPORTED if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(message)s")
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
