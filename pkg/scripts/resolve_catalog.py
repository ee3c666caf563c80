"""Resolve every catalog example and print one summary row each."""

import argparse
import time

from bmresolve.catalog import EXAMPLES
from bmresolve.poly import parse_poly
from bmresolve.resolve import RunConfig, run_resolution, verify_theorem_b


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-years", type=int, default=40)
    ap.add_argument("--follow", choices=("origins", "rich"), default="origins")
    args = ap.parse_args()
    cfg = RunConfig(max_years=args.max_years, follow_policy=args.follow)
    print(f"{'example':<18} {'status':<28} {'years':>5} {'nodes':>6} {'checks':>7} {'time':>7}")
    for name, (text, names) in EXAMPLES.items():
        t0 = time.perf_counter()
        out = run_resolution(parse_poly(text, names), cfg)
        elapsed = time.perf_counter() - t0
        checks = "ok" if all(ok for _, ok, _ in verify_theorem_b(out)) else "FAIL"
        print(f"{name:<18} {out.status:<28} {out.years:>5} {len(out.nodes):>6} {checks:>7} {elapsed:>6.2f}s")


if __name__ == "__main__":
    main()
