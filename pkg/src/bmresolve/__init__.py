"""Exact canonical resolution of hypersurface singularities in characteristic zero."""

from .atlas import CenterSpec, Chart, DivisorId, HypersurfaceState, blow_up, root_chart, strict_transform
from .invariant import InvValue, compare_inv, compute_inv
from .poly import INFINITY, Poly, parse_poly
from .resolve import RunConfig, run_resolution, verify_theorem_b
from .trace import emit_trace, render_text, replay

__all__ = [
    "INFINITY",
    "Poly",
    "parse_poly",
    "Chart",
    "CenterSpec",
    "DivisorId",
    "HypersurfaceState",
    "root_chart",
    "blow_up",
    "strict_transform",
    "InvValue",
    "compare_inv",
    "compute_inv",
    "RunConfig",
    "run_resolution",
    "verify_theorem_b",
    "emit_trace",
    "render_text",
    "replay",
]
__version__ = "0.1.0"
