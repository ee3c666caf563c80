"""Regenerate tests/golden/*.json and *.txt from the catalog.

The checked-in files were audited by hand; rerun this only on purpose and
review the diff.
"""

import argparse
from pathlib import Path

from bmresolve.catalog import EXAMPLES
from bmresolve.poly import parse_poly
from bmresolve.resolve import RunConfig, run_resolution
from bmresolve.trace import emit_document, emit_trace, render_text

GOLDEN = {
    "cusp_product": "origins",
    "cone": "origins",
    "smooth": "origins",
    "umbrella": "origins",
}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "golden"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, policy in GOLDEN.items():
        text, names = EXAMPLES[name]
        outcome = run_resolution(parse_poly(text, names), RunConfig(follow_policy=policy, emit_probe_checks=True))
        (out / f"{name}.json").write_bytes(emit_trace(outcome))
        (out / f"{name}.txt").write_text(render_text(emit_document(outcome)))
        print(f"{name}: {outcome.status}, {outcome.years} year(s), {len(outcome.nodes)} node(s)")


if __name__ == "__main__":
    main()
