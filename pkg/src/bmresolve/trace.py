"""Trace documents for resolution runs: JSON emission, text rendering, replay.

The JSON schema is ``bm-trace/1``.  Rationals are strings (``"5/2"``), the
infinite order is ``"inf"``, polynomials are strings in the input grammar
over the run's variable names, and keys are sorted so equal runs give equal
bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .atlas import Automorphism, CenterSpec, Chart, DivisorId, HypersurfaceState, blow_up, pullback, strict_transform
from .invariant import (
    INFINITY,
    HistoryChain,
    InvariantError,
    InvResult,
    delta_sequence,
    parse_inv,
    compute_inv,
)
from .poly import Poly, format_rat, parse_poly
from .resolve import ResolutionNode, RunOutcome, select_center, verify_theorem_b

__all__ = [
    "SCHEMA",
    "emit_document",
    "emit_trace",
    "parse_trace",
    "render_text",
    "replay",
]

SCHEMA = "bm-trace/1"


def _rat(v) -> str:
    return format_rat(v)


def _poly(p: Poly) -> str:
    return p.to_str()


def _div(d: DivisorId) -> dict:
    return {"birth": d.birth_year, "label": d.label}


def _undiv(d: dict) -> DivisorId:
    return DivisorId(d["birth"], d["label"])


def _chart_doc(rec) -> dict:
    c = rec.chart
    return {
        "id": c.id,
        "year": c.year,
        "kind": c.kind,
        "parent": c.parent.id if c.parent is not None else None,
        "substitution": [_poly(p) for p in c.substitution] if c.substitution is not None else None,
        "exceptional": [dict(_div(d), var=k) for d, k in c.exceptional],
        "automorphisms": [{"var": a.var, "shift": _poly(a.shift), "scale": _rat(a.scale)} for a in c.automorphisms],
        "exc_var": rec.exc_var,
        "f": _poly(rec.f),
    }


def _levels_doc(res: InvResult) -> List[dict]:
    out = []
    for lev in res.levels:
        out.append({
            "level": lev.level,
            "earliest_year": lev.earliest_year,
            "E_block": [_div(d) for d in lev.E_block],
            "s": lev.s,
            "direction": lev.direction,
            "N_vars": sorted(lev.N_vars),
            "H": [[_poly(h), _rat(m)] for h, m in lev.H],
            "mu": _rat(lev.mu),
            "mu_H": [[_div(d), _rat(m)] for d, m in lev.mu_H],
            "nu": _rat(lev.nu),
        })
    return out


def _node_doc(node: ResolutionNode) -> dict:
    res = node.result
    E_order = [d for d, _ in res.E]
    options = [{"divisors": [_div(d) for d in c.divisors], "delta": list(delta_sequence(c, E_order)),
                "vanishing": sorted(c.vanishing), "equations": [_poly(e) for e in c.equations]}
               for c in res.components]
    chosen = res.components.index(res.selected())
    doc = {
        "id": node.id,
        "year": node.year,
        "chart": node.chart.id,
        "point": [_rat(v) for v in node.point],
        "parent": node.parent,
        "f": _poly(node.f),
        "inv": res.inv.to_strings(),
        "inv_text": str(res.inv),
        "terminal": res.inv.terminal,
        "mu_x": None if res.inv.mu_x is None else _rat(res.inv.mu_x),
        "E": [dict(_div(d), var=k) for d, k in res.E],
        "levels": _levels_doc(res),
        "D": None if res.D is None else [[_div(d), _rat(m)] for d, m in res.D],
        "components": options,
        "J": chosen,
        "changes": [{"var": v, "shift": _poly(p)} for v, p in res.changes],
        "done": node.done,
        "normal_crossings": node.normal_crossings,
        "center": None,
        "admissible": node.admissible,
        "children": list(node.children_charts),
    }
    if node.center is not None:
        doc["center"] = {"chart": node.center.chart_id, "vanishing": sorted(node.center.vanishing),
                         "divisors": [_div(d) for d in node.center.divisors]}
    return doc


def emit_document(outcome: RunOutcome) -> dict:
    """The trace as plain JSON-compatible data."""
    cfg = outcome.config
    f = outcome.f
    charts = [_chart_doc(rec) for rec in outcome.charts.values()]
    years = []
    for k in range(outcome.years + 1):
        years.append({
            "year": k,
            "charts": [c["id"] for c in charts if c["year"] == k and c["kind"] in ("root", "blowup")],
            "nodes": [n.id for n in outcome.nodes if n.year == k],
        })
    probes = [{"node": p["node"], "level": p["level"], "mu": _rat(p["mu"]), "probe": _rat(p["probe"]),
               "agree": p["agree"]} for p in outcome.probes]
    return {
        "schema": SCHEMA,
        "input": {
            "poly": _poly(f),
            "vars": list(f.varnames),
            "terms": [[list(e), _rat(c)] for e, c in f.items()],
        },
        "config": {
            "max_years": cfg.max_years,
            "follow_policy": cfg.follow_policy,
            "points": [[_rat(v) for v in p] for p in cfg.points],
            "validate_admissibility": cfg.validate_admissibility,
            "admissibility_samples": cfg.admissibility_samples,
            "emit_probe_checks": cfg.emit_probe_checks,
        },
        "charts": charts,
        "years": years,
        "nodes": [_node_doc(n) for n in outcome.nodes],
        "outcome": {
            "status": outcome.status,
            "years": outcome.years,
            "message": outcome.message,
            "warnings": list(outcome.warnings),
            "certificates": dict(sorted(outcome.certificates.items())),
            "probes": probes,
        },
    }


def emit_trace(outcome: RunOutcome) -> bytes:
    """Canonical serialization: sorted keys, rationals as strings, trailing newline."""
    return (json.dumps(emit_document(outcome), sort_keys=True, indent=1) + "\n").encode("ascii")


def parse_trace(data) -> dict:
    if isinstance(data, bytes):
        data = data.decode("ascii")
    doc = json.loads(data)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} document")
    return doc


# ---------------------------------------------------------------------------
# text rendering


def _divname(d: dict) -> str:
    return f"H{d['birth']}"


def _monomial_text(D, vars_of: Dict[Tuple[int, str], int], names: Sequence[str]) -> str:
    parts = []
    for d, m in D:
        if m == "0":
            continue
        name = names[vars_of[(d["birth"], d["label"])]]
        parts.append(name if m == "1" else f"{name}^({m})" if "/" in m else f"{name}^{m}")
    return "*".join(parts) or "1"


def render_text(doc: dict) -> str:
    """Year-by-year report listing the quantities computed at every followed point."""
    names = doc["input"]["vars"]
    charts = {c["id"]: c for c in doc["charts"]}
    nodes = {n["id"]: n for n in doc["nodes"]}
    out = [f"Resolution of {doc['input']['poly']} = 0 in ({', '.join(names)})",
           f"status: {doc['outcome']['status']} after {doc['outcome']['years']} year(s)"]
    if doc["outcome"]["message"]:
        out.append(f"message: {doc['outcome']['message']}")
    for w in doc["outcome"]["warnings"]:
        out.append(f"warning: {w}")
    for yr in doc["years"]:
        out.append("")
        out.append(f"Year {yr['year']}")
        for cid in yr["charts"]:
            c = charts[cid]
            if c["substitution"] is not None:
                sub = ", ".join(f"{names[j]} = {p}" for j, p in enumerate(c["substitution"]))
                out.append(f"  chart {cid} over {c['parent']}: {sub}")
            exc = ", ".join(f"{_divname(d)}: {names[d['var']]}=0" for d in c["exceptional"]) or "none"
            out.append(f"    strict transform {c['f']}; exceptional {exc}")
        for nid in yr["nodes"]:
            n = nodes[nid]
            vars_of = {(d["birth"], d["label"]): d["var"] for d in n["E"]}
            out.append(f"  point {nid} (chart {n['chart']}, ({', '.join(n['point'])}))")
            out.append(f"    g = {n['f']}")
            out.append(f"    E(a) = {{{', '.join(_divname(d) for d in n['E'])}}}")
            for lev in n["levels"]:
                r = lev["level"]
                H = ", ".join(f"({h}, {m})" for h, m in lev["H"]) or "empty"
                muH = ", ".join(f"mu_{r + 1}{_divname(d)} = {m}" for d, m in lev["mu_H"])
                out.append(f"    E^{r} = {{{', '.join(_divname(d) for d in lev['E_block'])}}} "
                           f"(earliest year {lev['earliest_year']}), s_{r} = {lev['s']}")
                out.append(f"    N_{r} = {{{', '.join(names[k] + '=0' for k in lev['N_vars'])}}}, H_{r} = {{{H}}}")
                out.append(f"    mu_{r + 1} = {lev['mu']}" + (f", {muH}" if muH else "") + f", nu_{r + 1} = {lev['nu']}")
            line = f"    inv = {n['inv_text']}"
            if n["mu_x"] is not None:
                line += f", mu_X = {n['mu_x']}"
            out.append(line)
            if n["D"] is not None:
                out.append(f"    D = {_monomial_text(n['D'], vars_of, names)}")
            if n["done"]:
                out.append("    resolved here (order <= 1, s_1 = 0, normal crossings)")
                continue
            comps = "; ".join(
                "{" + ", ".join(names[k] + "=0" for k in c["vanishing"]) + "}"
                + (f" I={{{', '.join(_divname(d) for d in c['divisors'])}}} delta={tuple(c['delta'])}" if c["divisors"] else "")
                for c in n["components"])
            out.append(f"    components of the maximum locus: {comps}")
            if n["center"] is not None:
                cen = n["center"]
                out.append(f"    center {{{', '.join(names[k] + '=0' for k in cen['vanishing'])}}} in chart {cen['chart']}"
                           f" (J picks component {n['J'] + 1} of {len(n['components'])})"
                           + ("" if n["admissible"] is None else f"; admissibility sample {'ok' if n['admissible'] else 'FAILED'}"))
    certs = doc["outcome"]["certificates"]
    if certs:
        out.append("")
        out.append("Smoothness certificates: " + ", ".join(f"{k} {'smooth' if v else 'not certified'}"
                                                         for k, v in certs.items()))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# replay


def _rebuild_charts(doc: dict) -> Tuple[Dict[str, Chart], Dict[str, Poly], List[str]]:
    names = doc["input"]["vars"]
    n = len(names)
    built: Dict[str, Chart] = {}
    fs: Dict[str, Poly] = {}
    problems: List[str] = []
    f0 = Poly(n, {tuple(e): Fraction(c) for e, c in doc["input"]["terms"]}, names)
    if parse_poly(doc["input"]["poly"], names) != f0:
        problems.append("input polynomial text and terms disagree")
    for c in doc["charts"]:
        parent = built.get(c["parent"]) if c["parent"] is not None else None
        if c["parent"] is not None and parent is None:
            problems.append(f"chart {c['id']}: parent {c['parent']} appears later or not at all")
            continue
        sub = None if c["substitution"] is None else tuple(parse_poly(p, names) for p in c["substitution"])
        exc = tuple((_undiv(d), d["var"]) for d in c["exceptional"])
        autos = tuple(Automorphism(a["var"], parse_poly(a["shift"], names), Fraction(a["scale"]))
                      for a in c["automorphisms"])
        chart = Chart(c["id"], n, tuple(names), c["year"], parent, sub, exc, autos, c["kind"])
        built[c["id"]] = chart
        f = parse_poly(c["f"], names)
        fs[c["id"]] = f
        if parent is None:
            expected = f0
        elif c["kind"] == "blowup":
            expected = strict_transform(fs[parent.id], sub, c["exc_var"])
        else:
            expected = pullback(fs[parent.id], chart)
        if expected != f:
            problems.append(f"chart {c['id']}: strict transform mismatch")
    return built, fs, problems


def replay(doc: dict) -> Tuple[List[str], List[Tuple[str, bool, str]]]:
    """Recompute every transform, invariant and center of a trace.

    Returns the list of mismatches and the property report.
    """
    names = doc["input"]["vars"]
    charts, fs, problems = _rebuild_charts(doc)
    nodes = {n["id"]: n for n in doc["nodes"]}
    invs = {}
    for nd in doc["nodes"]:
        try:
            invs[nd["id"]] = parse_inv(nd["inv"], mu_x=nd["mu_x"])
        except (ValueError, KeyError) as exc:
            problems.append(f"node {nd['id']}: unreadable inv ({exc})")
    for nd in doc["nodes"]:
        nid = nd["id"]
        chart = charts.get(nd["chart"])
        if chart is None:
            problems.append(f"node {nid}: unknown chart {nd['chart']}")
            continue
        f = parse_poly(nd["f"], names)
        if f != fs[chart.id]:
            problems.append(f"node {nid}: polynomial differs from its chart's strict transform")
        chain = []
        p = nd["parent"]
        while p is not None:
            chain.append(p)
            p = nodes[p]["parent"]
        if any(a not in invs for a in chain):
            continue
        history = HistoryChain(tuple(invs[a] for a in reversed(chain)))
        point = tuple(Fraction(v) for v in nd["point"])
        try:
            res = compute_inv(HypersurfaceState(chart, f), point, history)
        except (InvariantError, ValueError) as exc:
            problems.append(f"node {nid}: inv recomputation failed ({exc})")
            continue
        if nid in invs and (res.inv.flat != invs[nid].flat or res.inv.mu_x != invs[nid].mu_x):
            problems.append(f"node {nid}: inv {res.inv} recomputed, trace says {nd['inv_text']}")
        if nd["center"] is None:
            continue
        node = ResolutionNode(nid, nd["year"], chart, point, f, history, nd["parent"], res)
        try:
            centre = select_center(node)
        except (InvariantError, ValueError) as exc:
            problems.append(f"node {nid}: center selection failed ({exc})")
            continue
        if centre.chart_id != nd["center"]["chart"] or sorted(centre.vanishing) != nd["center"]["vanishing"]:
            problems.append(f"node {nid}: recomputed center differs")
            continue
        adapted = charts.get(centre.chart_id)
        if adapted is None:
            problems.append(f"node {nid}: adapted chart {centre.chart_id} missing")
            continue
        for ch in blow_up(adapted, centre, nd["year"] + 1):
            rec = charts.get(ch.id)
            if rec is None or rec.substitution != ch.substitution or rec.exceptional != ch.exceptional:
                problems.append(f"node {nid}: blow-up chart {ch.id} does not match the trace")
    report = verify_theorem_b(doc)
    return problems, report
