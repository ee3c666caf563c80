"""The desingularization invariant and the presentations that compute it.

All computations happen at the origin: ``compute_inv`` first moves the
point of interest there by a Taylor shift.  Coordinates are adapted along
the way by triangular changes ``u_i -> u_i + p``; each change is recorded so
that a caller can realize it as a chart automorphism, after which every
maximal contact hypersurface and every component of the maximum locus is a
coordinate subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .atlas import Chart, CenterSpec, DivisorId, HypersurfaceState, apply_automorphism, localize
from .groebner import grevlex, normal_form
from .poly import (
    INFINITY,
    Infinity,
    Point,
    Poly,
    as_rat,
    derivative,
    equalize_multiplicities,
    format_rat,
    monomial_content,
    order_along_hyperplane,
    substitute,
    taylor_shift,
)

__all__ = [
    "NU_ZERO",
    "NU_INFINITY",
    "TRUNCATED",
    "InvEntry",
    "InvValue",
    "HistoryChain",
    "Presentation",
    "LevelRecord",
    "Component",
    "InvResult",
    "InvariantError",
    "NoEqualityWitness",
    "UnsupportedMaxContact",
    "IncompleteHistory",
    "ProbeInconsistent",
    "compare_inv",
    "parse_inv",
    "check_integrality",
    "max_contact",
    "compute_mu",
    "compute_mu_H",
    "compute_nu",
    "compute_s_block",
    "build_G_next",
    "compute_inv",
    "components_of_Sinv",
    "extended_J",
    "delta_sequence",
    "test_blowup_mu_probe",
]

NU_ZERO = "zero"
NU_INFINITY = "inf"
TRUNCATED = "truncated"

Pair = Tuple[Poly, Fraction]


class InvariantError(RuntimeError):
    pass


class NoEqualityWitness(InvariantError):
    """No pair in the collection has order equal to its assigned multiplicity."""


class UnsupportedMaxContact(InvariantError):
    """The maximal contact hypersurface could not be straightened polynomially."""


class EqualizationTooLarge(InvariantError):
    """Raising the collection to a common multiplicity would need impractically high powers."""


class IncompleteHistory(InvariantError):
    pass


class ProbeInconsistent(InvariantError):
    pass


# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class InvEntry:
    nu: Fraction
    s: int

    def __post_init__(self):
        if self.nu < 0 or self.s < 0:
            raise ValueError("inv entries are nonnegative")


@dataclass(frozen=True)
class InvValue:
    """``(nu_1, s_1; ...; nu_t, s_t; nu_{t+1})`` with the companion ``mu_x`` when ``nu_{t+1} = 0``."""

    entries: Tuple[InvEntry, ...]
    terminal: str
    mu_x: Optional[Fraction] = None

    def __post_init__(self):
        if not self.entries:
            raise ValueError("inv needs at least one entry")
        if self.terminal not in (NU_ZERO, NU_INFINITY, TRUNCATED):
            raise ValueError(f"bad terminal {self.terminal!r}")
        if (self.mu_x is not None) != (self.terminal == NU_ZERO):
            raise ValueError("mu_X is present exactly when the last nu is 0")

    @property
    def flat(self) -> tuple:
        out: list = []
        for e in self.entries:
            out += [e.nu, Fraction(e.s)]
        if self.terminal == NU_ZERO:
            out.append(Fraction(0))
        elif self.terminal == NU_INFINITY:
            out.append(INFINITY)
        return tuple(out)

    def truncate(self, length: int) -> tuple:
        return self.flat[:length]

    @property
    def order(self) -> Fraction:
        return self.entries[0].nu

    @property
    def s1(self) -> int:
        return self.entries[0].s

    def to_strings(self) -> List[str]:
        return [format_rat(v) for v in self.flat]

    def __str__(self) -> str:
        parts = [f"{format_rat(e.nu)},{e.s}" for e in self.entries]
        if self.terminal != TRUNCATED:
            parts.append(format_rat(self.flat[-1]))
        return "(" + "; ".join(parts) + ")"

    def _cmp(self, other: "InvValue") -> int:
        a, b = self.flat, other.flat
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


def compare_inv(u: InvValue, v: InvValue) -> int:
    """-1, 0 or 1 as ``u`` is lexicographically below, equal to, or above ``v``."""
    return u._cmp(v)


def parse_inv(strings: Sequence[str], terminal: Optional[str] = None, mu_x=None) -> InvValue:
    """Inverse of :meth:`InvValue.to_strings`."""
    vals = [INFINITY if s == "inf" else as_rat(s) for s in strings]
    if terminal is None:
        if len(vals) % 2 == 0:
            terminal = TRUNCATED
        else:
            terminal = NU_INFINITY if vals[-1] is INFINITY else NU_ZERO
    body = vals if terminal == TRUNCATED else vals[:-1]
    if len(body) % 2:
        raise ValueError("malformed inv flattening")
    entries = tuple(InvEntry(body[i], int(body[i + 1])) for i in range(0, len(body), 2))
    mu = None if mu_x is None else as_rat(mu_x)
    return InvValue(entries, terminal, mu)


def check_integrality(inv: InvValue) -> bool:
    """``e_{r-1}! * nu_r`` is a natural number, with ``e_0 = 1`` and ``e_r = max(e_{r-1}!, e_{r-1}! nu_r)``."""
    e = 1
    nus = [en.nu for en in inv.entries]
    for nu in nus:
        if e > 10_000:
            return True  # every denominator that can occur is far below this
        q = nu.denominator
        if q > e and (math.factorial(e) * nu).denominator != 1:
            return False
        f = math.factorial(e)
        e = int(max(Fraction(f), f * nu))
    return True


@dataclass(frozen=True)
class HistoryChain:
    """Inv values at the ancestors of a followed point, year 0 first."""

    values: Tuple[InvValue, ...] = ()

    @property
    def year(self) -> int:
        return len(self.values)

    def extend(self, inv: InvValue) -> "HistoryChain":
        return HistoryChain(self.values + (inv,))

    def earliest(self, prefix: tuple) -> int:
        for k, v in enumerate(self.values):
            if v.truncate(len(prefix)) == prefix:
                return k
        return self.year


def _as_history(history) -> HistoryChain:
    if history is None:
        return HistoryChain()
    if isinstance(history, HistoryChain):
        return history
    return HistoryChain(tuple(history))


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Presentation:
    """``(N, H, E)`` at the origin of the adapted coordinates.

    ``N = {u_i = 0 : i in N_vars}``; the functions in ``H`` do not involve
    the ``N_vars``.  ``coordinates[i]`` writes the adapted ``u_i`` in the
    chart's coordinates centred at the base point, and ``changes`` lists
    the triangular substitutions that produced them.  For a direction in
    ``curved`` the slot holds instead a defining function of that N
    hypersurface, which is straight only up to a unit.
    """

    codim: int
    chart_id: str
    base_point: Point
    N_vars: FrozenSet[int]
    H: Tuple[Pair, ...]
    E: Tuple[Tuple[DivisorId, int], ...]
    coordinates: Tuple[Poly, ...] = ()
    changes: Tuple[Tuple[int, Poly], ...] = ()
    curved: FrozenSet[int] = frozenset()

    def divisor_var(self, d: DivisorId) -> int:
        for dd, k in self.E:
            if dd == d:
                return k
        raise KeyError(f"{d} is not in E")


@dataclass(frozen=True)
class LevelRecord:
    level: int
    earliest_year: int
    E_block: Tuple[DivisorId, ...]
    s: int
    direction: int
    N_vars: FrozenSet[int]
    H: Tuple[Pair, ...]
    mu: Union[Fraction, Infinity]
    mu_H: Tuple[Tuple[DivisorId, Fraction], ...]
    nu: Union[Fraction, Infinity]


@dataclass(frozen=True)
class Component:
    divisors: Tuple[DivisorId, ...]
    vanishing: FrozenSet[int]
    equations: Tuple[Poly, ...]

    def center(self, chart_id: str) -> CenterSpec:
        return CenterSpec(chart_id, self.vanishing, self.divisors)


@dataclass(frozen=True)
class InvResult:
    inv: InvValue
    presentation: Presentation
    D: Optional[Tuple[Tuple[DivisorId, Fraction], ...]]
    components: Tuple[Component, ...]
    levels: Tuple[LevelRecord, ...]
    E: Tuple[Tuple[DivisorId, int], ...]

    @property
    def changes(self) -> Tuple[Tuple[int, Poly], ...]:
        return self.presentation.changes

    @property
    def straight(self) -> bool:
        """Whether every component is a coordinate subspace once ``changes`` are applied."""
        return not self.presentation.curved

    def selected(self) -> Component:
        return extended_J(self.components, [d for d, _ in self.E])


# ---------------------------------------------------------------------------
# maximal contact


_SCALES = (1, -1, 2, -2, 3, -3)


def _change(g: Poly, var: int, p: Poly) -> Poly:
    """Rewrite ``g`` in coordinates where ``u_var`` becomes ``u_var + p``."""
    if not g.involves(var):
        return g
    images = [Poly.var(g.nvars, i, g.varnames) for i in range(g.nvars)]
    images[var] = images[var] - p
    return substitute(g, images)


def _split_linear(z: Poly, k: int) -> Tuple[Poly, Poly]:
    """``(w, b)`` with ``z = u_k * w + b``, for ``z`` of degree one in ``u_k``."""
    unit = tuple(1 if i == k else 0 for i in range(z.nvars))
    w = {tuple(0 if i == k else x for i, x in enumerate(e)): c for e, c in z.terms.items() if e[k] == 1}
    b = {e: c for e, c in z.terms.items() if e[k] == 0}
    return Poly(z.nvars, w, z.varnames), Poly(z.nvars, b, z.varnames)


def _rank(z: Poly, k: int) -> Optional[int]:
    """How ``{z = 0}`` can be straightened to ``{u_k = 0}``.

    0: ``z = u_k * w`` with ``w(0) != 0``, already straight.  1: ``z = c*u_k + b``
    with ``c`` constant, straightened by a triangular shift.  2: ``z = u_k*w + b``
    with ``w(0) != 0``; restrictions to ``{z = 0}`` are taken up to a power of
    the unit ``w``.
    """
    terms = z.terms
    unit = tuple(1 if i == k else 0 for i in range(z.nvars))
    if terms and all(e[k] >= 1 for e in terms) and terms.get(unit, 0) != 0:
        return 0
    linear = [e for e in terms if e[k] >= 1]
    if linear == [unit]:
        return 1
    if z.degree_in(k) == 1 and terms.get(unit, 0) != 0:
        return 2
    return None


def _restrict(g: Poly, k: int, w: Optional[Poly], b: Optional[Poly]) -> Poly:
    """``g`` on ``{u_k = 0}``, or ``w^m * g(u_k = -b/w)`` with ``m = deg_k g`` on ``{u_k*w + b = 0}``."""
    n = g.nvars
    if w is None:
        zero = [Poly.var(n, i, g.varnames) for i in range(n)]
        zero[k] = Poly.zero(n, g.varnames)
        return substitute(g, zero)
    m = g.degree_in(k)
    coeffs: Dict[int, Dict] = {}
    for e, c in g.terms.items():
        coeffs.setdefault(e[k], {})[tuple(0 if i == k else x for i, x in enumerate(e))] = c
    out = Poly.zero(n, g.varnames)
    for j, terms in coeffs.items():
        out = out + Poly(n, terms, g.varnames) * (-b) ** j * w ** (m - j)
    return out


def _find_direction(witnesses: Sequence[Poly], dirs: Sequence[int], d: int):
    best = None
    for di, k in enumerate(dirs):
        for wi, g in enumerate(witnesses):
            if derivative(g, k, d).constant_term() == 0:
                continue
            z = derivative(g, k, d - 1)
            rank = _rank(z, k)
            if rank is None:
                continue
            key = (rank, di, wi)
            if best is None or key < best[0]:
                best = (key, k, z)
    return None if best is None else (best[1], best[0][0], best[2])


def _shear_schedule(free: Sequence[int], movable: Sequence[int]):
    """Linear changes ``u_i <- u_i + c_i * u_j`` to try, fewest sheared coordinates first.

    Shearing several ``u_i`` along one ``u_j`` makes ``e_j + sum c_i e_i``
    a coordinate direction, which a single shear cannot reach once three or
    more coordinates must be nonzero.
    """
    for size in range(1, len(movable) + 1):
        for j in free:
            others = [i for i in movable if i != j]
            for subset in combinations(others, size):
                for cs in product(_SCALES, repeat=size):
                    yield j, tuple(zip(subset, cs))


def _restrict_implicit(g: Poly, k: int, z: Poly) -> Optional[Poly]:
    """Restriction to ``{z = 0}`` when it needs no implicit function: ``g`` free of ``u_k`` or a multiple of ``z``."""
    if not g.involves(k):
        return g
    if normal_form(g, [z], grevlex(g.nvars)).is_zero():
        return Poly.zero(g.nvars, g.varnames)
    return None


def _implicit_direction(polys: Sequence[Poly], witness_idx: Sequence[int], dirs: Sequence[int], d: int):
    """Rank 3: ``{z = 0}`` is smooth but not a graph, and every coefficient restricts without solving for ``u_k``."""
    for k in dirs:
        for i in witness_idx:
            if derivative(polys[i], k, d).constant_term() == 0:
                continue
            z = derivative(polys[i], k, d - 1)
            if all(_restrict_implicit(derivative(g, k, q), k, z) is not None for g in polys for q in range(d)):
                return k, 3, z
    return None


@dataclass(frozen=True)
class _Contact:
    direction: int
    changes: Tuple[Tuple[int, Poly], ...]
    collection: Tuple[Tuple[Poly, int], ...]
    H: Tuple[Pair, ...]
    equation: Optional[Poly] = None  # set when N is {z = 0} rather than a coordinate hyperplane


def _max_contact(coll: Sequence[Pair], N_vars: FrozenSet[int], blocked: FrozenSet[int],
                 exceptional: FrozenSet[int]) -> _Contact:
    eq = equalize_multiplicities(coll)
    if not eq:
        raise NoEqualityWitness("empty collection")
    d = eq[0][1]
    n = eq[0][0].nvars
    polys = [g for g, _ in eq]
    witness_idx = [i for i, g in enumerate(polys) if g.min_degree() == d]
    if not witness_idx:
        raise NoEqualityWitness("no pair has order equal to its assigned multiplicity")
    free = [k for k in reversed(range(n)) if k not in N_vars and k not in blocked]
    changes: List[Tuple[int, Poly]] = []
    pick = _find_direction([polys[i] for i in witness_idx], free, d)
    if pick is None:
        movable = [i for i in reversed(range(n)) if i not in N_vars and i not in exceptional]
        names = polys[0].varnames
        for j, shears in _shear_schedule(free, movable):
            step = [(i, Poly.var(n, j, names).scale(-c)) for i, c in shears]
            trial = [polys[w] for w in witness_idx]
            for i, p in step:
                trial = [_change(g, i, p) for g in trial]
            pick = _find_direction(trial, [j], d)
            if pick is not None:
                changes.extend(step)
                for i, p in step:
                    polys = [_change(g, i, p) for g in polys]
                break
        if pick is None:
            pick = _implicit_direction(polys, witness_idx, free, d)
        if pick is None:
            raise UnsupportedMaxContact(
                "no coordinate direction in the search schedule straightens the maximal contact hypersurface")
    k, rank, z = pick
    w = b = None
    if rank == 2:
        w, b = _split_linear(z, k)
    if rank == 1:
        unit = tuple(1 if i == k else 0 for i in range(n))
        c = z.coeff(unit)
        b = z - Poly.monomial(unit, c, z.varnames)
        if not b.is_zero():
            p = b.scale(1 / c)
            changes.append((k, p))
            polys = [_change(g, k, p) for g in polys]
    H: List[Pair] = []
    seen = set()
    for g in polys:
        for q in range(d):
            if rank == 3:
                c_q = _restrict_implicit(derivative(g, k, q), k, z)
            else:
                c_q = _restrict(derivative(g, k, q), k, w, b)
            if c_q.is_zero():
                continue
            pair = (c_q.monic(), Fraction(d - q))
            if pair not in seen:
                seen.add(pair)
                H.append(pair)
    return _Contact(k, tuple(changes), tuple((g, d) for g in polys), tuple(H), z if rank >= 2 else None)


def max_contact(g_coll: Sequence[Tuple[Poly, object]], chart: Chart, a: Optional[Sequence] = None,
                N_vars: Iterable[int] = (), E: Optional[Sequence[Tuple[DivisorId, int]]] = None):
    """One maximal contact step for a collection written in ``chart`` coordinates.

    Returns the chart in which the new hypersurface is a coordinate
    hyperplane (``chart`` itself when no change was needed) and the
    presentation of codimension one more.  ``E`` lists the divisors that
    must stay transverse to the hypersurface; it defaults to all divisors
    through ``a``.
    """
    base = chart.origin() if a is None else tuple(as_rat(v) for v in a)
    local = localize(chart, base)
    coll = [(taylor_shift(g, base), as_rat(mu)) for g, mu in g_coll]
    E = tuple(local.exceptional) if E is None else tuple(E)
    N_vars = frozenset(N_vars)
    res = _max_contact(coll, N_vars, frozenset(k for _, k in E), local.exceptional_vars())
    adapted = local
    for var, p in res.changes:
        adapted = apply_automorphism(adapted, var, p)
    coords = _identity(chart)
    for var, p in res.changes:
        coords = _update_coordinates(coords, var, p)
    if res.equation is not None:
        coords = _curve(coords, res.direction, res.equation)
    curved = frozenset() if res.equation is None else frozenset({res.direction})
    pres = Presentation(len(N_vars) + 1, adapted.id, base, N_vars | {res.direction}, res.H, E,
                        coords, res.changes, curved)
    return adapted, pres


def _identity(chart_or_poly) -> Tuple[Poly, ...]:
    n, names = chart_or_poly.nvars, chart_or_poly.varnames
    return tuple(Poly.var(n, i, names) for i in range(n))


def _curve(coords: Tuple[Poly, ...], var: int, z: Poly) -> Tuple[Poly, ...]:
    # the N direction `var` is never changed again, so its slot can hold the defining function
    new = list(coords)
    new[var] = substitute(z, list(coords))
    return tuple(new)


def _update_coordinates(coords: Tuple[Poly, ...], var: int, p: Poly) -> Tuple[Poly, ...]:
    new = list(coords)
    new[var] = coords[var] + substitute(p, list(coords))
    return tuple(new)


# ---------------------------------------------------------------------------
# the quantities of one level


def _mu(H: Sequence[Pair]):
    if not H:
        return INFINITY
    return min(Fraction(h.min_degree()) / mu for h, mu in H)


def _mu_along(H: Sequence[Pair], var: int) -> Fraction:
    return min(Fraction(order_along_hyperplane(h, var)) / mu for h, mu in H)


def compute_mu(pres: Presentation):
    return _mu(pres.H)


def compute_mu_H(pres: Presentation, H: DivisorId) -> Fraction:
    var = pres.divisor_var(H)
    if not pres.H:
        raise ValueError("mu_H needs a finite mu")
    return _mu_along(pres.H, var)


def compute_nu(pres: Presentation):
    mu = compute_mu(pres)
    if mu is INFINITY:
        return INFINITY
    return mu - sum((_mu_along(pres.H, k) for _, k in pres.E), Fraction(0))


def compute_s_block(history, E_at_a: Sequence[Tuple[DivisorId, int]], level: int,
                    used: Iterable[DivisorId], prefix: Sequence) -> Tuple[Tuple[DivisorId, ...], int, int]:
    """``(E^r, s_r, i_r)`` for the level ``r`` whose truncated value ``inv_{r-1/2}`` is ``prefix``."""
    history = _as_history(history)
    prefix = tuple(prefix)
    if len(prefix) != 2 * level - 1:
        raise IncompleteHistory(f"level {level} needs a prefix of length {2 * level - 1}")
    i_r = history.earliest(prefix)
    used = set(used)
    block = tuple(sorted(d for d, _ in E_at_a if d not in used and d.birth_year <= i_r))
    return block, len(block), i_r


def _split(g: Poly, mu: Fraction) -> List[Pair]:
    if g.min_degree() != mu:
        return [(g, mu)]
    m, g0 = monomial_content(g)
    if not any(m):
        return [(g, mu)]
    out = [(Poly.var(g.nvars, i, g.varnames), Fraction(1)) for i, e in enumerate(m) if e > 0]
    o = g0.min_degree()
    if o > 0:
        out.append((g0, Fraction(o)))
    return out


# rough cap on k * (terms - 1) for any power g^k taken during equalization
EQUALIZE_BUDGET = 600


def _check_equalize_cost(H: Sequence[Pair]) -> None:
    e = 1
    for _, mu in H:
        e = e * mu.numerator // math.gcd(e, mu.numerator)
    for g, mu in H:
        k = e / mu
        if len(g.terms) > 1 and k * (len(g.terms) - 1) > EQUALIZE_BUDGET:
            raise EqualizationTooLarge(f"common multiplicity {e} would raise a {len(g.terms)}-term "
                                       f"polynomial to the power {k}")


def _build_G(H: Sequence[Pair], nu: Fraction, mu_H: Sequence[Tuple[int, Fraction]]) -> List[Pair]:
    _check_equalize_cost(H)
    eq = equalize_multiplicities(H)
    e = eq[0][1]
    n, names = eq[0][0].nvars, eq[0][0].varnames
    dexp = [0] * n
    for var, m in mu_H:
        v = e * m
        if v.denominator != 1:
            raise InvariantError("exceptional exponent is not integral after equalization")
        dexp[var] = int(v)
    G: List[Pair] = [(h.div_monomial(dexp), e * nu) for h, _ in eq]
    if nu < 1:
        G.append((Poly.monomial(dexp, 1, names), (1 - nu) * e))
    out: List[Pair] = []
    seen = set()
    for g, mu in G:
        for pair in _split(g, mu):
            if pair not in seen:
                seen.add(pair)
                out.append(pair)
    return out


def build_G_next(pres: Presentation, nu, mu_Hs: Dict[DivisorId, Fraction]) -> Presentation:
    """The collection ``G`` that continues the recursion, as a presentation of the same codimension."""
    if nu is INFINITY or nu <= 0:
        raise ValueError("the recursion continues only for 0 < nu < infinity")
    pairs = [(pres.divisor_var(d), as_rat(m)) for d, m in mu_Hs.items()]
    G = _build_G(pres.H, as_rat(nu), pairs)
    return Presentation(pres.codim, pres.chart_id, pres.base_point, pres.N_vars, tuple(G), pres.E,
                        pres.coordinates, pres.changes)


# ---------------------------------------------------------------------------
# the invariant


def compute_inv(state: HypersurfaceState, a: Optional[Sequence] = None, history=None) -> InvResult:
    """``inv_X`` at ``a`` together with the data needed to pick a center there."""
    chart, f = state.chart, state.f
    history = _as_history(history)
    base = chart.origin() if a is None else tuple(as_rat(v) for v in a)
    f0 = taylor_shift(f, base)
    if f0.is_zero():
        raise ValueError("inv of the zero polynomial")
    order = f0.min_degree()
    if order < 1:
        raise ValueError("the point is not on the hypersurface")
    n = f.nvars
    E_all = chart.divisors_through(base)
    exceptional = frozenset(k for _, k in E_all)
    calE = list(E_all)
    used: List[DivisorId] = []
    coords = _identity(f)
    changes: List[Tuple[int, Poly]] = []
    curved = set()
    N_vars: FrozenSet[int] = frozenset()
    coll: List[Pair] = [(f0, Fraction(order))]
    prefix: list = [Fraction(order)]
    entries: List[InvEntry] = []
    levels: List[LevelRecord] = []
    level = 1
    nu_r = Fraction(order)
    while True:
        block, s, i_r = compute_s_block(history, calE, level, used, prefix)
        used += block
        calE = [(d, k) for d, k in calE if d not in block]
        prefix.append(Fraction(s))
        entries.append(InvEntry(nu_r, s))
        names = f.varnames
        aug = coll + [(Poly.var(n, _divisor_var(E_all, d), names), Fraction(1)) for d in block]
        contact = _max_contact(aug, N_vars, frozenset(k for _, k in calE), exceptional)
        for var, p in contact.changes:
            coords = _update_coordinates(coords, var, p)
            changes.append((var, p))
        if contact.equation is not None:
            coords = _curve(coords, contact.direction, contact.equation)
            curved.add(contact.direction)
        N_vars = N_vars | {contact.direction}
        H = contact.H
        mu = _mu(H)
        if mu is INFINITY:
            mu_H: List[Tuple[DivisorId, Fraction]] = []
            nu_next = INFINITY
        else:
            mu_H = [(d, _mu_along(H, k)) for d, k in calE]
            nu_next = mu - sum((m for _, m in mu_H), Fraction(0))
        levels.append(LevelRecord(level, i_r, block, s, contact.direction, N_vars, H, mu,
                                  tuple(mu_H), nu_next))
        pres = Presentation(len(N_vars), chart.id, base, N_vars, H, tuple(calE), tuple(coords), tuple(changes),
                            frozenset(curved))
        if nu_next is INFINITY:
            inv = InvValue(tuple(entries), NU_INFINITY)
            comps = (Component((), N_vars, tuple(coords[k] for k in sorted(N_vars))),)
            return InvResult(inv, pres, None, comps, tuple(levels), E_all)
        if nu_next == 0:
            inv = InvValue(tuple(entries), NU_ZERO, mu)
            D = tuple(mu_H)
            comps = tuple(_zero_components(D, calE, N_vars, coords))
            return InvResult(inv, pres, D, comps, tuple(levels), E_all)
        prefix.append(nu_next)
        coll = _build_G(H, nu_next, [(k, m) for (d, k), (_, m) in zip(calE, mu_H)])
        nu_r = nu_next
        level += 1
        if level > n + 1:  # pragma: no cover - each level cuts one more coordinate
            raise InvariantError("recursion did not terminate within the ambient dimension")


def _divisor_var(E: Sequence[Tuple[DivisorId, int]], d: DivisorId) -> int:
    for dd, k in E:
        if dd == d:
            return k
    raise KeyError(d)


def _zero_components(D, calE, N_vars, coords) -> List[Component]:
    omega = dict(D)
    var = dict(calE)
    out = []
    divs = [d for d, _ in calE]
    for size in range(1, len(divs) + 1):
        for I in combinations(divs, size):
            total = sum((omega[d] for d in I), Fraction(0))
            if 0 <= total - 1 and all(total - 1 < omega[d] for d in I):
                vanish = frozenset(N_vars) | {var[d] for d in I}
                eqs = tuple(coords[k] for k in sorted(N_vars)) + tuple(coords[var[d]] for d in I)
                out.append(Component(tuple(I), vanish, eqs))
    return out


def components_of_Sinv(final_pres: Presentation, D, terminal: str) -> Tuple[Component, ...]:
    """Components of the maximum locus of inv through the base point, in adapted coordinates."""
    coords = final_pres.coordinates
    if not coords:
        raise ValueError("presentation carries no adapted coordinates")
    if terminal == NU_INFINITY:
        return (Component((), final_pres.N_vars, tuple(coords[k] for k in sorted(final_pres.N_vars))),)
    if terminal == NU_ZERO:
        return tuple(_zero_components(tuple(D), final_pres.E, final_pres.N_vars, coords))
    raise ValueError("components need a completed invariant")


def delta_sequence(component: Component, E_order: Sequence[DivisorId]) -> Tuple[int, ...]:
    chosen = set(component.divisors)
    return tuple(1 if d in chosen else 0 for d in sorted(E_order))


def extended_J(components: Sequence[Component], E_order: Sequence[DivisorId]) -> Component:
    """The component whose divisor indicator sequence (birth order) is lexicographically largest."""
    if not components:
        raise ValueError("no components to choose from")
    return max(components, key=lambda c: (delta_sequence(c, E_order), sorted(c.vanishing)))


# ---------------------------------------------------------------------------
# the test blow-up probe


def _probe_membership(H: Sequence[Pair], beta: int, alpha: int) -> bool:
    """Whether ``(beta, alpha)`` lies in the set S of the test blow-up characterization.

    The pair (with equalized multiplicity ``e``) is pulled back along the arc
    ``x = t^beta * x``: ``beta`` blow-ups of the curve each remove ``t^e``,
    and then ``alpha + 1`` further divisions by ``t^e`` must still leave a
    polynomial.
    """
    eq = equalize_multiplicities(H)
    e = eq[0][1]
    for h, _ in eq:
        n = h.nvars
        t = Poly.var(n + 1, n)
        images = [Poly.var(n + 1, i) * t ** beta for i in range(n)]
        lifted = substitute(Poly(n, h.terms), images)
        if order_along_hyperplane(lifted, n) < (beta + alpha + 1) * e:
            return False
    return True


def test_blowup_mu_probe(pres: Presentation, candidates: Iterable) -> Union[Fraction, Infinity]:
    """Recover ``mu`` from test blow-up memberships alone, choosing among ``candidates``."""
    if not pres.H:
        return INFINITY
    cands = sorted({c if c is INFINITY else as_rat(c) for c in candidates})
    finite = [c for c in cands if c is not INFINITY]
    gaps = [b - a for a, b in zip(finite, finite[1:])]
    beta_max = 2 + max((math.ceil(1 / g) for g in gaps), default=1)
    top = max(finite, default=Fraction(1))
    consistent = list(cands)
    for beta in range(1, beta_max + 1):
        for alpha in range(0, math.ceil(beta * top) + 2):
            member = _probe_membership(pres.H, beta, alpha)
            consistent = [c for c in consistent
                          if (True if c is INFINITY else beta * (c - 1) - alpha >= 1) == member]
    if len(consistent) != 1:
        raise ProbeInconsistent(f"candidates consistent with the probe: {consistent}")
    return consistent[0]


test_blowup_mu_probe.__test__ = False  # not a pytest test despite the name
