"""Coordinate charts, blow-ups along coordinate subspaces, and transforms.

Every chart except the root records how the coordinates of its parent are
written in its own coordinates (``substitution[j]`` is the parent's
``x_j``).  Three kinds of child exist: blow-up charts, triangular
automorphisms, and translations that move a point to the origin.  All
charts keep the same variable names, so a polynomial can be read in any
chart of a lineage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .poly import (
    Poly,
    Point,
    as_rat,
    derivative,
    evaluate,
    format_rat,
    order_along_hyperplane,
    order_at_point,
    substitute,
)

__all__ = [
    "AUTO",
    "DivisorId",
    "Automorphism",
    "Chart",
    "CenterSpec",
    "HypersurfaceState",
    "AtlasError",
    "CodimensionOneCenter",
    "NonIntegralMultiplicity",
    "NotDivisible",
    "SingularPointError",
    "root_chart",
    "blow_up",
    "strict_transform",
    "total_transform",
    "controlled_transform",
    "apply_automorphism",
    "localize",
    "pullback",
    "lineage",
    "project_point",
    "normal_crossings_at",
]

AUTO = None  # pass as ``d`` to let strict_transform compute the exceptional order


class AtlasError(ValueError):
    pass


class CodimensionOneCenter(AtlasError):
    pass


class NonIntegralMultiplicity(AtlasError):
    pass


class NotDivisible(AtlasError):
    """The controlled transform does not exist: the center was not admissible."""


class SingularPointError(AtlasError):
    pass


@dataclass(frozen=True, order=True)
class DivisorId:
    """An exceptional hypersurface, ordered by the year it was created.

    ``label`` names the chart that was blown up, which keeps ids unique when
    several centers are blown up in the same year.
    """

    birth_year: int
    label: str = ""

    def __post_init__(self):
        if self.birth_year < 1:
            raise ValueError("exceptional divisors are born in year 1 or later")

    def __str__(self) -> str:
        return f"H{self.birth_year}" if not self.label else f"H{self.birth_year}[{self.label}]"


@dataclass(frozen=True)
class Automorphism:
    """``x_var`` is replaced by ``x_var - shift/scale`` (the new coordinate is ``(scale*x_var + shift)/scale``)."""

    var: int
    shift: Poly
    scale: Fraction


@dataclass(frozen=True, eq=False)
class Chart:
    id: str
    nvars: int
    varnames: Tuple[str, ...]
    year: int
    parent: Optional["Chart"] = None
    substitution: Optional[Tuple[Poly, ...]] = None
    exceptional: Tuple[Tuple[DivisorId, int], ...] = ()
    automorphisms: Tuple[Automorphism, ...] = ()
    kind: str = "root"  # root | blowup | automorphism | translation

    def __post_init__(self):
        idx = [k for _, k in self.exceptional]
        if len(set(idx)) != len(idx):
            raise AtlasError(f"chart {self.id}: two divisors on one coordinate hyperplane")
        if any(not 0 <= k < self.nvars for k in idx):
            raise AtlasError(f"chart {self.id}: divisor index out of range")
        if any(d.birth_year > self.year for d, _ in self.exceptional):
            raise AtlasError(f"chart {self.id}: divisor born after the chart's year")
        object.__setattr__(self, "exceptional", tuple(sorted(self.exceptional)))

    @property
    def divisors(self) -> Tuple[DivisorId, ...]:
        return tuple(d for d, _ in self.exceptional)

    def divisor_var(self, d: DivisorId) -> int:
        for dd, k in self.exceptional:
            if dd == d:
                return k
        raise KeyError(f"{d} is not visible in chart {self.id}")

    def exceptional_vars(self) -> FrozenSet[int]:
        return frozenset(k for _, k in self.exceptional)

    def divisors_through(self, a: Optional[Sequence] = None) -> Tuple[Tuple[DivisorId, int], ...]:
        if a is None:
            return self.exceptional
        return tuple((d, k) for d, k in self.exceptional if as_rat(a[k]) == 0)

    def origin(self) -> Point:
        return tuple(Fraction(0) for _ in range(self.nvars))

    def __repr__(self) -> str:
        return f"Chart({self.id!r}, year={self.year})"


@dataclass(frozen=True)
class CenterSpec:
    """``Z = {x_i = 0 : i in vanishing}`` in the coordinates of chart ``chart_id``."""

    chart_id: str
    vanishing: FrozenSet[int]
    divisors: Tuple[DivisorId, ...] = ()  # the exceptional hypersurfaces cut in (the set I)

    def __post_init__(self):
        object.__setattr__(self, "vanishing", frozenset(self.vanishing))
        if not self.vanishing:
            raise AtlasError("a center needs at least one vanishing coordinate")

    def contains(self, a: Sequence) -> bool:
        return all(as_rat(a[i]) == 0 for i in self.vanishing)

    def codim(self) -> int:
        return len(self.vanishing)

    def describe(self, varnames: Sequence[str]) -> str:
        return "{" + ", ".join(f"{varnames[i]}=0" for i in sorted(self.vanishing)) + "}"


@dataclass(frozen=True)
class HypersurfaceState:
    chart: Chart
    f: Poly

    @property
    def chart_id(self) -> str:
        return self.chart.id


def root_chart(nvars: int, varnames: Optional[Sequence[str]] = None, chart_id: str = "U") -> Chart:
    if varnames is None:
        varnames = tuple(f"x{i + 1}" for i in range(nvars))
    return Chart(chart_id, nvars, tuple(varnames), 0)


def _var(chart: Chart, i: int) -> Poly:
    return Poly.var(chart.nvars, i, chart.varnames)


def blow_up(chart: Chart, center: CenterSpec, year: int) -> List[Chart]:
    """The standard charts of the blow-up of ``chart`` along a coordinate subspace."""
    if center.chart_id != chart.id:
        raise AtlasError(f"center lives in chart {center.chart_id}, not {chart.id}")
    if any(not 0 <= i < chart.nvars for i in center.vanishing):
        raise IndexError("center index out of range")
    if center.codim() < 2:
        raise CodimensionOneCenter("blowing up a hypersurface is the identity; refusing")
    if year <= chart.year:
        raise AtlasError("blow-up year must exceed the chart's year")
    new = DivisorId(year, chart.id)
    out = []
    for i in sorted(center.vanishing):
        yi = _var(chart, i)
        sub = tuple(
            yi * _var(chart, j) if (j in center.vanishing and j != i) else _var(chart, j)
            for j in range(chart.nvars)
        )
        exc = [(d, k) for d, k in chart.exceptional if k != i] + [(new, i)]
        out.append(Chart(f"{chart.id}{i + 1}", chart.nvars, chart.varnames, year, chart, sub,
                         tuple(exc), (), "blowup"))
    return out


def total_transform(f: Poly, chart_sub: Sequence[Poly]) -> Poly:
    return substitute(f, list(chart_sub))


def strict_transform(f: Poly, chart_sub: Sequence[Poly], exc_var: int, d: Optional[int] = AUTO) -> Poly:
    """``y_exc^(-d) * (f o sigma)`` with ``d`` the full power of ``y_exc`` in the total transform."""
    if f.is_zero():
        raise AtlasError("strict transform of the zero polynomial")
    g = total_transform(f, chart_sub)
    order = order_along_hyperplane(g, exc_var)
    if d is None:
        d = order
    elif d != order:
        raise AtlasError(f"exceptional order is {order}, not {d}")
    exps = [0] * g.nvars
    exps[exc_var] = d
    return g.div_monomial(exps)


def controlled_transform(h: Poly, chart_sub: Sequence[Poly], exc_var: int, mu) -> Poly:
    mu = as_rat(mu)
    if mu.denominator != 1 or mu < 0:
        raise NonIntegralMultiplicity(f"assigned multiplicity {mu} must be a natural number")
    g = total_transform(h, chart_sub)
    m = int(mu)
    if m == 0:
        return g
    if g.is_zero():
        return g
    if order_along_hyperplane(g, exc_var) < m:
        raise NotDivisible(f"total transform not divisible by the exceptional coordinate to power {m}")
    exps = [0] * g.nvars
    exps[exc_var] = m
    return g.div_monomial(exps)


def apply_automorphism(chart: Chart, var: int, shift: Poly, scale=1) -> Chart:
    """Child chart whose coordinate ``x_var`` is ``x_var + shift/scale`` in the old coordinates.

    Polynomials read in the child are obtained by substituting
    ``x_var -> x_var - shift/scale``.  Identity changes return ``chart``.
    """
    scale = as_rat(scale)
    if scale == 0:
        raise AtlasError("automorphism scale must be nonzero")
    if not 0 <= var < chart.nvars:
        raise IndexError("variable index out of range")
    if shift.involves(var):
        raise AtlasError("shift must not involve the variable being changed")
    if shift.constant_term() != 0:
        raise AtlasError("shift must vanish at the base point")
    if shift.is_zero():
        # pure rescaling of x_var is absorbed: the hyperplane {x_var = 0} is unchanged
        return chart
    if var in chart.exceptional_vars():
        raise AtlasError("cannot move an exceptional coordinate hyperplane")
    step = shift.scale(1 / scale)
    sub = tuple(_var(chart, j) - step if j == var else _var(chart, j) for j in range(chart.nvars))
    auto = Automorphism(var, shift, scale)
    return Chart(chart.id + "'", chart.nvars, chart.varnames, chart.year, chart, sub,
                 chart.exceptional, chart.automorphisms + (auto,), "automorphism")


def localize(chart: Chart, point: Sequence) -> Chart:
    """Child chart with ``point`` moved to the origin; divisors missing the point are dropped."""
    a = tuple(as_rat(v) for v in point)
    if len(a) != chart.nvars:
        raise ValueError("point dimension mismatch")
    if not any(a):
        return chart
    sub = tuple(_var(chart, j) + a[j] if a[j] else _var(chart, j) for j in range(chart.nvars))
    exc = tuple((d, k) for d, k in chart.exceptional if a[k] == 0)
    label = ",".join(format_rat(v) for v in a)
    return Chart(f"{chart.id}@{label}", chart.nvars, chart.varnames, chart.year, chart, sub,
                 exc, chart.automorphisms, "translation")


def pullback(f: Poly, chart: Chart) -> Poly:
    """Read a polynomial of ``chart.parent`` in the coordinates of ``chart``."""
    if chart.substitution is None:
        return f
    return substitute(f, list(chart.substitution))


def lineage(chart: Chart) -> List[Chart]:
    """Charts from the root down to ``chart``."""
    out = []
    c: Optional[Chart] = chart
    while c is not None:
        out.append(c)
        c = c.parent
    return out[::-1]


def project_point(chart: Chart, a: Sequence, target_year: int) -> Point:
    """Image of ``a`` in the deepest chart of year ``target_year`` on the lineage."""
    if target_year > chart.year:
        raise ValueError("target year is later than the chart's year")
    p = tuple(as_rat(v) for v in a)
    c = chart
    while c.year > target_year:
        p = tuple(evaluate(s, p) for s in c.substitution)
        c = c.parent
    return p


def normal_crossings_at(state: HypersurfaceState, a: Optional[Sequence] = None) -> bool:
    """Whether ``V(f)`` and the exceptional hyperplanes through ``a`` cross normally at ``a``."""
    f, chart = state.f, state.chart
    a = chart.origin() if a is None else tuple(as_rat(v) for v in a)
    order = order_at_point(f, a)
    if order == 0:
        return True
    if order > 1:
        raise SingularPointError("normal crossings test at a singular point")
    through = {k for _, k in chart.divisors_through(a)}
    return any(evaluate(derivative(f, i), a) != 0 for i in range(f.nvars) if i not in through)
