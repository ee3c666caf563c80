import json
import time
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from bmresolve.catalog import EXAMPLES
from bmresolve.poly import Poly, parse_poly
from bmresolve.resolve import RunConfig, run_resolution

GOLDEN = Path(__file__).parent / "golden"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def P(text, names=("x1", "x2", "x3")):
    return parse_poly(text, names)


@lru_cache(maxsize=None)
def run_example(name, policy="origins", probes=False):
    text, names = EXAMPLES[name]
    return run_resolution(parse_poly(text, names), RunConfig(follow_policy=policy, emit_probe_checks=probes))


def load_golden(name):
    return json.loads((GOLDEN / f"{name}.json").read_text())


@pytest.fixture(scope="session")
def cusp_run():
    return run_example("cusp_product")


rats = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def polys(draw, nvars=None, max_degree=6, max_terms=6, coeffs=None):
    n = draw(st.integers(1, 4)) if nvars is None else nvars
    names = tuple(f"x{i + 1}" for i in range(n))
    k = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(k):
        total = draw(st.integers(0, max_degree))
        exps = [0] * n
        for _ in range(total):
            exps[draw(st.integers(0, n - 1))] += 1
        c = draw(coeffs if coeffs is not None else st.integers(-5, 5).filter(bool).map(Fraction))
        terms[tuple(exps)] = terms.get(tuple(exps), 0) + c
    return Poly(n, {m: c for m, c in terms.items() if c}, names)


@st.composite
def poly_and_point(draw, max_degree=6):
    f = draw(polys(max_degree=max_degree))
    a = tuple(draw(st.lists(rats, min_size=f.nvars, max_size=f.nvars)))
    return f, a


# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE = []
SUITE_LIMIT = 60.0
_started = []


def pytest_sessionstart(session):
    _started.append(time.perf_counter())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _started:
        return
    elapsed = time.perf_counter() - _started[0]
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE:
        tr.write_line(line)
    ok = elapsed < SUITE_LIMIT
    tr.write_line(f"criterion 9: {'PASS' if ok else 'FAIL'} full suite in {elapsed:.1f} s (limit {SUITE_LIMIT:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    if _started and time.perf_counter() - _started[0] >= SUITE_LIMIT:
        session.exitstatus = 1
