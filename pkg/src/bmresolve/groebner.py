"""Buchberger's algorithm and the ideal computations built on it.

Used for followed-point search on exceptional fibres (rational points of
zero-dimensional ideals) and for global smoothness certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .poly import Monomial, Poly, Point, derivative, evaluate, substitute

__all__ = [
    "MonomialOrder",
    "IdealBasis",
    "PositiveDimensionalError",
    "lex",
    "grevlex",
    "leading_monomial",
    "leading_term",
    "normal_form",
    "s_polynomial",
    "buchberger",
    "eliminate",
    "is_zero_dimensional",
    "rational_roots",
    "rational_points_zero_dim",
    "smooth_certificate",
]


class PositiveDimensionalError(ValueError):
    """The ideal has infinitely many zeros over the algebraic closure."""


@dataclass(frozen=True)
class MonomialOrder:
    kind: str  # "lex" or "grevlex"
    permutation: Tuple[int, ...]  # permutation[0] is the most significant variable

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex"):
            raise ValueError(f"unknown monomial order {self.kind!r}")
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError("permutation must list every variable exactly once")

    def key(self, exps: Monomial):
        if self.kind == "lex":
            return tuple(exps[p] for p in self.permutation)
        return (sum(exps), tuple(-exps[p] for p in reversed(self.permutation)))

    @property
    def nvars(self) -> int:
        return len(self.permutation)


def lex(nvars: int, permutation: Optional[Sequence[int]] = None) -> MonomialOrder:
    return MonomialOrder("lex", tuple(permutation) if permutation is not None else tuple(range(nvars)))


def grevlex(nvars: int, permutation: Optional[Sequence[int]] = None) -> MonomialOrder:
    return MonomialOrder("grevlex", tuple(permutation) if permutation is not None else tuple(range(nvars)))


@dataclass(frozen=True)
class IdealBasis:
    generators: Tuple[Poly, ...]
    order: MonomialOrder
    reduced: bool = False

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)


def leading_monomial(f: Poly, order: MonomialOrder) -> Monomial:
    return max(f.terms, key=order.key)


def leading_term(f: Poly, order: MonomialOrder) -> Tuple[Monomial, Fraction]:
    lm = leading_monomial(f, order)
    return lm, f.coeff(lm)


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def _primitive(f: Poly) -> Poly:
    # integer coefficients with unit content; ideal membership is unaffected
    if f.is_zero():
        return f
    den = 1
    for c in f.terms.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    num = 0
    for c in f.terms.values():
        num = math.gcd(num, (c * den).numerator)
    return f.scale(Fraction(den, num))


def _monic(f: Poly, order: MonomialOrder) -> Poly:
    _, lc = leading_term(f, order)
    return f if lc == 1 else f.scale(1 / lc)


def _reduce(f: Poly, basis: Sequence[Poly], order: MonomialOrder) -> Poly:
    lead = [leading_term(g, order) for g in basis]
    terms: Dict[Monomial, Fraction] = f.terms
    remainder: Dict[Monomial, Fraction] = {}
    nvars, names = f.nvars, f.varnames
    while terms:
        lm = max(terms, key=order.key)
        lc = terms[lm]
        for g, (glm, glc) in zip(basis, lead):
            if _divides(glm, lm):
                shift = tuple(a - b for a, b in zip(lm, glm))
                factor = lc / glc
                for e, c in g.terms.items():
                    ne = tuple(a + b for a, b in zip(e, shift))
                    v = terms.get(ne, 0) - factor * c
                    if v:
                        terms[ne] = v
                    else:
                        terms.pop(ne, None)
                break
        else:
            remainder[lm] = lc
            del terms[lm]
    return Poly(nvars, remainder, names)


def normal_form(f: Poly, basis, order: Optional[MonomialOrder] = None) -> Poly:
    """Remainder of multivariate division of ``f`` by ``basis``."""
    if isinstance(basis, IdealBasis):
        order = basis.order if order is None else order
        gens = list(basis.generators)
    else:
        gens = [g for g in basis if not g.is_zero()]
        if order is None:
            order = lex(f.nvars)
    if not gens:
        raise ValueError("normal form against an empty basis")
    return _reduce(f, gens, order)


def s_polynomial(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    flm, flc = leading_term(f, order)
    glm, glc = leading_term(g, order)
    l = _lcm(flm, glm)
    return (f.mul_monomial(tuple(a - b for a, b in zip(l, flm)), 1 / flc)
            - g.mul_monomial(tuple(a - b for a, b in zip(l, glm)), 1 / glc))


def buchberger(gens: Iterable[Poly], order: MonomialOrder) -> IdealBasis:
    """Reduced Gröbner basis by Buchberger's algorithm.

    Pairs are taken in the normal strategy (smallest lcm first); the product
    criterion and the chain criterion prune pairs.
    """
    basis: List[Poly] = [_primitive(g) for g in gens if not g.is_zero()]
    if not basis:
        return IdealBasis((), order, True)
    for g in basis:
        if g.is_constant():
            return IdealBasis((Poly.const(g.nvars, 1, g.varnames),), order, True)
    lms: List[Monomial] = [leading_monomial(g, order) for g in basis]
    pairs: Set[Tuple[int, int]] = set(combinations(range(len(basis)), 2))
    done: Set[Tuple[int, int]] = set()

    def pair_key(p):
        i, j = p
        return (order.key(_lcm(lms[i], lms[j])), p)

    while pairs:
        i, j = min(pairs, key=pair_key)
        pairs.discard((i, j))
        done.add((i, j))
        l = _lcm(lms[i], lms[j])
        if all(a + b == c for a, b, c in zip(lms[i], lms[j], l)):
            continue
        chain = False
        for k in range(len(basis)):
            if k in (i, j) or not _divides(lms[k], l):
                continue
            if tuple(sorted((i, k))) in done and tuple(sorted((j, k))) in done:
                chain = True
                break
        if chain:
            continue
        r = _reduce(s_polynomial(basis[i], basis[j], order), basis, order)
        if r.is_zero():
            continue
        r = _primitive(r)
        if r.is_constant():
            return IdealBasis((Poly.const(r.nvars, 1, r.varnames),), order, True)
        basis.append(r)
        lms.append(leading_monomial(r, order))
        n = len(basis) - 1
        pairs.update((k, n) for k in range(n))
    return IdealBasis(tuple(_reduce_basis(basis, order)), order, True)


def _reduce_basis(basis: List[Poly], order: MonomialOrder) -> List[Poly]:
    lms = [leading_monomial(g, order) for g in basis]
    keep = []
    for i, g in enumerate(basis):
        redundant = False
        for j in range(len(basis)):
            if j == i or not _divides(lms[j], lms[i]):
                continue
            if lms[j] != lms[i] or j < i:
                redundant = True
                break
        if not redundant:
            keep.append(g)
    reduced = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1:]
        r = _reduce(g, others, order) if others else g
        reduced.append(_monic(r, order))
    reduced.sort(key=lambda g: order.key(leading_monomial(g, order)), reverse=True)
    return reduced


def eliminate(basis: IdealBasis, keep: Iterable[int]) -> List[Poly]:
    """Generators of the elimination ideal in the variables ``keep``."""
    keep = set(keep)
    order = basis.order
    if order.kind != "lex":
        raise ValueError("elimination needs a lex order")
    drop = [v for v in order.permutation if v not in keep]
    if drop and max(order.permutation.index(v) for v in drop) > min(
            (order.permutation.index(v) for v in keep), default=len(order.permutation)):
        raise ValueError("lex order does not eliminate the complement of `keep`")
    return [g for g in basis.generators if all(not g.involves(v) for v in drop)]


def is_zero_dimensional(basis: IdealBasis) -> bool:
    """Every variable has a pure power among the leading monomials."""
    if basis.is_unit():
        return True
    if not basis.generators:
        return False
    nvars = basis.generators[0].nvars
    lms = [leading_monomial(g, basis.order) for g in basis.generators]
    for i in range(nvars):
        if not any(m[i] > 0 and sum(m) == m[i] for m in lms):
            return False
    return True


def _divisors(n: int) -> List[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def rational_roots(coeffs: Sequence[Fraction]) -> List[Fraction]:
    """Rational roots of ``sum coeffs[k] x^k`` (rational root theorem)."""
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        if coeffs:
            return []
        raise ValueError("zero polynomial has every number as a root")
    roots = set()
    k = 0
    while coeffs[k] == 0:
        k += 1
    if k:
        roots.add(Fraction(0))
        coeffs = coeffs[k:]
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    if len(ints) > 1:
        for p in _divisors(ints[0]):
            for q in _divisors(ints[-1]):
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    if sum(c * cand ** i for i, c in enumerate(ints)) == 0:
                        roots.add(cand)
    return sorted(roots)


def rational_points_zero_dim(gens: Sequence[Poly], box: Optional[int] = None) -> List[Point]:
    """All rational zeros of a zero-dimensional ideal.

    The lex basis is triangular; the last variable's eliminant is solved by
    the rational root theorem and each root is substituted back.  ``box`` is
    accepted for interface compatibility and bounds nothing: the method is
    complete for rational points.
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise PositiveDimensionalError("the zero ideal is not zero-dimensional")
    nvars = gens[0].nvars
    basis = buchberger(gens, lex(nvars))
    if basis.is_unit():
        return []
    if not is_zero_dimensional(basis):
        raise PositiveDimensionalError("ideal is positive-dimensional")
    points = _solve(list(basis.generators), nvars, list(range(nvars)), {})
    return sorted(set(points))


def _solve(polys: List[Poly], nvars: int, free: List[int], fixed: Dict[int, Fraction]) -> List[Point]:
    if not free:
        if all(p.is_zero() for p in polys):
            return [tuple(fixed[i] for i in range(nvars))]
        return []
    basis = buchberger(polys, lex(nvars))
    if basis.is_unit():
        return []
    v = free[-1]
    uni = [g for g in basis.generators if all(not g.involves(w) for w in free if w != v)]
    uni = [g for g in uni if not g.is_zero()]
    if not uni:
        raise PositiveDimensionalError("ideal is positive-dimensional")
    g = uni[-1]
    coeffs = [Fraction(0)] * (g.degree_in(v) + 1)
    for e, c in g.terms.items():
        coeffs[e[v]] += c
    if all(c == 0 for c in coeffs[1:]):
        return []
    out: List[Point] = []
    names = polys[0].varnames
    for r in rational_roots(coeffs):
        images = [Poly.var(nvars, i, names) for i in range(nvars)]
        images[v] = Poly.const(nvars, r, names)
        sub = [substitute(p, images) for p in basis.generators]
        out.extend(_solve(sub, nvars, free[:-1], {**fixed, v: r}))
    return out


def smooth_certificate(f: Poly) -> bool:
    """True iff ``1`` lies in ``(f, df/dx_1, ..., df/dx_n)``: V(f) is smooth over the closure."""
    if f.is_zero():
        raise ValueError("smoothness certificate of the zero polynomial")
    gens = [f] + [derivative(f, i) for i in range(f.nvars)]
    return buchberger(gens, grevlex(f.nvars)).is_unit()
