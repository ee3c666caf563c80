"""The resolution driver.

Each followed point is processed in its own translated chart, so it sits at
the origin.  Its invariant picks a center, the chart is adapted so the
center is a coordinate subspace, and the blow-up charts become the homes of
the next year's followed points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .atlas import (
    AtlasError,
    CenterSpec,
    Chart,
    HypersurfaceState,
    apply_automorphism,
    blow_up,
    localize,
    normal_crossings_at,
    pullback,
    root_chart,
    strict_transform,
)
from .groebner import (
    PositiveDimensionalError,
    buchberger,
    leading_monomial,
    lex,
    rational_points_zero_dim,
    smooth_certificate,
)
from .invariant import (
    INFINITY,
    NU_INFINITY,
    NU_ZERO,
    HistoryChain,
    InvariantError,
    InvResult,
    InvValue,
    Presentation,
    UnsupportedMaxContact,
    check_integrality,
    compare_inv,
    compute_inv,
    delta_sequence,
    test_blowup_mu_probe,
)
from .poly import Point, Poly, as_rat, derivative, evaluate, format_rat, taylor_shift

__all__ = [
    "RESOLVED_CERTIFIED",
    "RESOLVED_AT_FOLLOWED_POINTS",
    "MAX_YEARS_EXCEEDED",
    "UNSUPPORTED_INPUT",
    "RunConfig",
    "ResolutionNode",
    "ChartRecord",
    "RunOutcome",
    "select_center",
    "verify_admissibility",
    "step_year",
    "run_resolution",
    "verify_theorem_b",
    "mu_probe_checks",
]

log = logging.getLogger(__name__)

RESOLVED_CERTIFIED = "RESOLVED_CERTIFIED"
RESOLVED_AT_FOLLOWED_POINTS = "RESOLVED_AT_FOLLOWED_POINTS"
MAX_YEARS_EXCEEDED = "MAX_YEARS_EXCEEDED"
UNSUPPORTED_INPUT = "UNSUPPORTED_INPUT"

FOLLOW_POLICIES = ("origins", "rich", "explicit")


@dataclass(frozen=True)
class RunConfig:
    max_years: int = 32
    follow_policy: str = "rich"
    points: Tuple[Tuple[Fraction, ...], ...] = ()  # year-0 points for the explicit policy
    validate_admissibility: bool = True
    admissibility_samples: int = 3
    emit_probe_checks: bool = False

    def __post_init__(self):
        if self.max_years < 1:
            raise ValueError("max_years must be at least 1")
        if self.follow_policy not in FOLLOW_POLICIES:
            raise ValueError(f"follow policy must be one of {FOLLOW_POLICIES}")
        if self.follow_policy == "explicit" and not self.points:
            raise ValueError("the explicit policy needs at least one point")
        object.__setattr__(self, "points", tuple(tuple(as_rat(v) for v in p) for p in self.points))


@dataclass(frozen=True)
class ChartRecord:
    chart: Chart
    f: Poly  # strict transform read in this chart
    exc_var: Optional[int] = None  # for blow-up charts: the new divisor's coordinate


@dataclass
class ResolutionNode:
    id: str
    year: int
    chart: Chart
    point: Point
    f: Poly
    history: HistoryChain
    parent: Optional[str] = None
    result: Optional[InvResult] = None
    done: bool = False
    normal_crossings: Optional[bool] = None
    center: Optional[CenterSpec] = None
    adapted: Optional[Chart] = None
    admissible: Optional[bool] = None
    children_charts: Tuple[str, ...] = ()

    @property
    def inv(self) -> InvValue:
        return self.result.inv

    @property
    def state(self) -> HypersurfaceState:
        return HypersurfaceState(self.chart, self.f)


@dataclass
class RunOutcome:
    status: str
    f: Poly
    config: RunConfig
    charts: Dict[str, ChartRecord]
    nodes: List[ResolutionNode]
    years: int
    certificates: Dict[str, bool] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    message: str = ""
    probes: List[dict] = field(default_factory=list)

    def node(self, node_id: str) -> ResolutionNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def followed_chain(self, node_id: str) -> List[ResolutionNode]:
        chain = [self.node(node_id)]
        while chain[-1].parent is not None:
            chain.append(self.node(chain[-1].parent))
        return chain[::-1]


def _node_id(chart: Chart, point: Point) -> str:
    if not any(point):
        return chart.id
    return f"{chart.id}@{','.join(format_rat(v) for v in point)}"


def _make_node(chart: Chart, point: Point, f: Poly, year: int, history: HistoryChain,
               parent: Optional[str]) -> ResolutionNode:
    node = ResolutionNode(_node_id(chart, point), year, chart, point, f, history, parent)
    node.result = compute_inv(node.state, point, history)
    if node.result.inv.order <= 1:
        node.normal_crossings = normal_crossings_at(node.state, point)
        node.done = node.result.inv.s1 == 0 and node.normal_crossings
    return node


def _adapt(node: ResolutionNode) -> Tuple[Chart, Poly, CenterSpec]:
    """The chart in which the node's center is a coordinate subspace, ``f`` read there, and the center."""
    chart = localize(node.chart, node.point)
    f = pullback(node.f, chart) if chart is not node.chart else node.f
    autos: List[Chart] = []
    for var, p in node.result.changes:
        new = apply_automorphism(chart, var, p)
        if new is not chart:
            f = pullback(f, new)
            autos.append(new)
        chart = new
    comp = node.result.selected()
    if node.result.straight:
        return chart, f, comp.center(chart.id)
    eqs = list(comp.equations)
    for ch in autos:
        eqs = [pullback(e, ch) for e in eqs]
    n = f.nvars
    first = sorted(comp.vanishing)
    gb = buchberger(eqs, lex(n, first + [i for i in range(n) if i not in comp.vanishing]))
    graph = []
    for g in gb:
        lm = leading_monomial(g, gb.order)
        if sum(lm) != 1:
            raise UnsupportedMaxContact(f"chart {chart.id}: center is not a graph over coordinate directions")
        k = lm.index(1)
        graph.append((k, g - Poly.var(n, k, f.varnames)))
    if len(graph) != len(comp.vanishing) or any(r.constant_term() != 0 for _, r in graph):
        raise UnsupportedMaxContact(f"chart {chart.id}: center does not have the expected codimension")
    for k, rest in graph:
        new = apply_automorphism(chart, k, rest)
        if new is not chart:
            f = pullback(f, new)
        chart = new
    return chart, f, CenterSpec(chart.id, frozenset(k for k, _ in graph), comp.divisors)


def select_center(node: ResolutionNode) -> CenterSpec:
    """The component of the maximum locus picked by the extended invariant, in the adapted chart."""
    if node.result is None or node.result.inv.terminal not in (NU_ZERO, NU_INFINITY):
        raise InvariantError("center selection needs a completed invariant")
    return _adapt(node)[2]


def verify_admissibility(node: ResolutionNode, center: CenterSpec, samples: int = 3) -> bool:
    """Sample the center and compare the invariant there with the node's value.

    Sample ``k`` sets every coordinate outside the center's vanishing set to
    ``1/k``.  Points are compared with the node's own history.
    """
    adapted, f, _ = _adapt(node)
    if center.chart_id != adapted.id:
        raise AtlasError("center does not live in the node's adapted chart")
    if not all(0 <= i < adapted.nvars for i in center.vanishing):
        return False
    for k in range(2, samples + 2):
        pt = tuple(Fraction(0) if i in center.vanishing else Fraction(1, k) for i in range(adapted.nvars))
        if evaluate(f, pt) != 0:
            return False
        try:
            res = compute_inv(HypersurfaceState(adapted, f), pt, node.history)
        except InvariantError:
            return False
        if res.inv.flat != node.result.inv.flat:
            return False
    return True


def _fiber_points(f: Poly, chart: Chart, exc_var: int, vanishing, warnings: List[str]) -> List[Point]:
    n, names = f.nvars, f.varnames
    fiber = [Poly.var(n, exc_var, names)] + [Poly.var(n, j, names) for j in range(n) if j not in vanishing]
    found = set()
    divs = list(chart.exceptional)
    for size in range(len(divs) + 1):
        for S in combinations(divs, size):
            svars = {k for _, k in S}
            gens = [f] + fiber + [Poly.var(n, k, names) for k in svars]
            gens += [derivative(f, k) for k in range(n) if k not in svars]
            try:
                found.update(rational_points_zero_dim(gens))
            except PositiveDimensionalError:
                msg = f"chart {chart.id}: fibre search is positive-dimensional; following the origin only"
                if msg not in warnings:
                    warnings.append(msg)
                    log.info(msg)
    return sorted(found)


def _singular_points(f: Poly, warnings: List[str]) -> List[Point]:
    gens = [f] + [derivative(f, k) for k in range(f.nvars)]
    try:
        return rational_points_zero_dim(gens)
    except PositiveDimensionalError:
        msg = "year 0: singular locus is positive-dimensional; following the origin only"
        warnings.append(msg)
        log.info(msg)
        return []


def step_year(nodes: Sequence[ResolutionNode], year: int, cfg: RunConfig,
              atlas: Optional[Dict[str, ChartRecord]] = None,
              warnings: Optional[List[str]] = None) -> List[ResolutionNode]:
    """Blow up the center chosen at every node and return the followed points of the next year."""
    atlas = {} if atlas is None else atlas
    warnings = [] if warnings is None else warnings
    children: List[ResolutionNode] = []
    seen = set()
    for node in nodes:
        if node.year != year:
            raise ValueError("all nodes of a step must share the year")
        adapted, g, center = _adapt(node)
        # register the translation and automorphism charts between node.chart and adapted
        derived = []
        c = adapted
        while c is not node.chart:
            derived.append(c)
            c = c.parent
        f_cur = node.f
        for ch in reversed(derived):
            f_cur = pullback(f_cur, ch)
            atlas.setdefault(ch.id, ChartRecord(ch, f_cur))
        node.center = center
        node.adapted = adapted
        if cfg.validate_admissibility:
            node.admissible = verify_admissibility(node, center, cfg.admissibility_samples)
        new_charts = blow_up(adapted, center, year + 1)
        node.children_charts = tuple(ch.id for ch in new_charts)
        for ch, i in zip(new_charts, sorted(center.vanishing)):
            fp = strict_transform(g, ch.substitution, i)
            atlas[ch.id] = ChartRecord(ch, fp, i)
            pts: List[Point] = []
            if fp.constant_term() == 0:
                pts.append(ch.origin())
            if cfg.follow_policy == "rich":
                for p in _fiber_points(fp, ch, i, center.vanishing, warnings):
                    if p not in pts:
                        pts.append(p)
            for p in pts:
                nid = _node_id(ch, p)
                if nid in seen:
                    continue
                seen.add(nid)
                children.append(_make_node(ch, p, fp, year + 1, node.history.extend(node.inv), node.id))
    return children


def run_resolution(f: Poly, cfg: Optional[RunConfig] = None) -> RunOutcome:
    """Resolve ``V(f)`` at the followed points, year by year."""
    cfg = RunConfig() if cfg is None else cfg
    if f.is_zero() or f.is_constant():
        raise ValueError("input must be a nonconstant polynomial")
    root = root_chart(f.nvars, f.varnames)
    atlas: Dict[str, ChartRecord] = {root.id: ChartRecord(root, f)}
    warnings: List[str] = []
    nodes: List[ResolutionNode] = []
    outcome = RunOutcome(UNSUPPORTED_INPUT, f, cfg, atlas, nodes, 0, warnings=warnings)
    if cfg.follow_policy == "explicit":
        start = [p for p in cfg.points if evaluate(f, p) == 0]
        if len(start) < len(cfg.points):
            warnings.append("explicit points off the hypersurface were ignored")
    else:
        start = [root.origin()] if f.constant_term() == 0 else []
        if cfg.follow_policy == "rich":
            start += [p for p in _singular_points(f, warnings) if p not in start]
    year = 0
    try:
        for p in start:
            if len(p) != f.nvars:
                raise ValueError("point dimension mismatch")
            nodes.append(_make_node(root, p, f, 0, HistoryChain(), None))
        active = list(nodes)
        while True:
            pending = [n for n in active if not n.done]
            if not pending:
                break
            if year >= cfg.max_years:
                outcome.status = MAX_YEARS_EXCEEDED
                outcome.message = f"still unresolved after {cfg.max_years} years"
                outcome.years = year
                return _finish(outcome)
            active = step_year(pending, year, cfg, atlas, warnings)
            nodes.extend(active)
            year += 1
    except (InvariantError, AtlasError) as exc:
        outcome.status = UNSUPPORTED_INPUT
        outcome.message = f"{type(exc).__name__}: {exc}"
        outcome.years = year
        return _finish(outcome)
    outcome.years = year
    blown = {n.adapted.id for n in nodes if n.adapted is not None}
    parents = set()
    for rec in atlas.values():
        c = rec.chart
        if c.kind == "blowup":
            p = c.parent
            while p is not None:
                parents.add(p.id)
                p = p.parent
    leaves = [cid for cid, rec in atlas.items()
              if rec.chart.kind in ("root", "blowup") and cid not in parents and cid not in blown]
    outcome.certificates = {cid: smooth_certificate(atlas[cid].f) for cid in leaves}
    terminal_nc = all(n.normal_crossings for n in nodes if n.done)
    if all(outcome.certificates.values()) and terminal_nc:
        outcome.status = RESOLVED_CERTIFIED
    else:
        outcome.status = RESOLVED_AT_FOLLOWED_POINTS
    return _finish(outcome)


def _finish(outcome: RunOutcome) -> RunOutcome:
    if outcome.config.emit_probe_checks:
        outcome.probes = mu_probe_checks(outcome)
    return outcome


def _probe_candidates(mu) -> List:
    cands = {mu, mu + Fraction(1, 2), mu + 1, INFINITY}
    if mu - Fraction(1, 2) >= 1:
        cands.add(mu - Fraction(1, 2))
    return sorted(cands)


def mu_probe_checks(outcome: RunOutcome) -> List[dict]:
    """Run the test blow-up probe on every level presentation of every node."""
    out = []
    for node in outcome.nodes:
        if node.result is None:
            continue
        for lev in node.result.levels:
            if lev.mu is INFINITY:
                continue
            pres = Presentation(len(lev.N_vars), node.chart.id, node.point, lev.N_vars, lev.H, ())
            got = test_blowup_mu_probe(pres, _probe_candidates(lev.mu))
            out.append({"node": node.id, "level": lev.level, "mu": lev.mu, "probe": got, "agree": got == lev.mu})
    return out


# ---------------------------------------------------------------------------
# property checks on a finished trace


def verify_theorem_b(trace) -> List[Tuple[str, bool, str]]:
    """Check a trace (document dict or :class:`RunOutcome`) and return ``(property, passed, detail)`` lines."""
    from .trace import emit_document  # local import: trace depends on this module
    from .invariant import parse_inv

    doc = emit_document(trace) if isinstance(trace, RunOutcome) else trace
    nodes = {n["id"]: n for n in doc["nodes"]}
    charts = {c["id"]: c for c in doc["charts"]}
    nvars = len(doc["input"]["vars"])

    def inv_of(n) -> InvValue:
        return parse_inv(n["inv"], mu_x=n.get("mu_x"))

    fails: Dict[str, List[str]] = {k: [] for k in ("semicontinuity", "stabilization", "normal_crossings",
                                                    "decrease", "integrality", "length")}
    for n in nodes.values():
        inv = inv_of(n)
        if not check_integrality(inv):
            fails["integrality"].append(n["id"])
        if len(inv.entries) > nvars + 1:
            fails["length"].append(n["id"])
        par = n.get("parent")
        if par is not None:
            p = inv_of(nodes[par])
            cmp = compare_inv(inv, p)
            if cmp > 0:
                fails["semicontinuity"].append(f"{n['id']} > {par}")
            if cmp == 0:
                if inv.terminal != NU_ZERO or not inv.mu_x < p.mu_x:
                    fails["decrease"].append(f"{n['id']} vs {par}")
        centre = n.get("center")
        if centre is not None:
            ch = charts.get(centre["chart"])
            if ch is None:
                fails["normal_crossings"].append(f"{n['id']}: unknown chart {centre['chart']}")
            else:
                idx = [d["var"] for d in ch["exceptional"]]
                ok = len(set(idx)) == len(idx) and all(0 <= v < nvars for v in centre["vanishing"])
                cdivs = {(d["birth"], d["label"]) for d in centre["divisors"]}
                regs = {(d["birth"], d["label"]): d["var"] for d in ch["exceptional"]}
                ok = ok and all(k in regs and regs[k] in centre["vanishing"] for k in cdivs)
                if not ok:
                    fails["normal_crossings"].append(n["id"])
    children = {p for p in (n.get("parent") for n in nodes.values()) if p is not None}
    for nid, n in nodes.items():
        # a blown-up leaf just has no followed point above it; only an unfinished, un-blown-up leaf is stuck
        if nid not in children and not n.get("done") and n.get("center") is None:
            fails["stabilization"].append(nid)
    labels = {
        "semicontinuity": "semicontinuity: inv does not increase under blowing up",
        "stabilization": "stabilization: every followed chain stabilizes within the run",
        "normal_crossings": "normal crossings: centers are coordinate subspaces compatible with the exceptional registry",
        "decrease": "decrease: (inv, mu_X) strictly decreases over each center",
        "integrality": "integrality: e_{r-1}! nu_r in N",
        "length": "length: at most n+1 entries",
    }
    return [(labels[k], not v, ", ".join(v[:5])) for k, v in fails.items()]
