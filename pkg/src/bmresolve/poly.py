"""Sparse multivariate polynomials over the rationals.

Coefficients are :class:`fractions.Fraction`; terms are stored in a dict keyed
by exponent tuples.  Values are immutable once built.  The module also holds
the small text parser used for polynomial input and the ``INFINITY`` order
value.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

__all__ = [
    "INFINITY",
    "Infinity",
    "Monomial",
    "FracMonomial",
    "Poly",
    "Point",
    "ParseError",
    "UnknownVariableError",
    "MAX_EXPONENT",
    "as_rat",
    "parse_poly",
    "parse_point",
    "infer_varnames",
    "format_rat",
    "derivative",
    "taylor_shift",
    "order_at_point",
    "order_along_hyperplane",
    "substitute",
    "monomial_content",
    "equalize_multiplicities",
    "evaluate",
    "natural_key",
]

Monomial = Tuple[int, ...]
FracMonomial = Tuple[Fraction, ...]
Point = Tuple[Fraction, ...]
RatLike = Union[int, Fraction, str]

# Exponents beyond this are treated as a bug (runaway equalization), not data.
MAX_EXPONENT = 1 << 16


@total_ordering
class Infinity:
    """Order of the zero function; compares above every rational."""

    _instance: Optional["Infinity"] = None

    def __new__(cls) -> "Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __str__(self) -> str:
        return "inf"

    def __eq__(self, other: object) -> bool:
        return other is self

    def __lt__(self, other: object) -> bool:
        return False

    def __gt__(self, other: object) -> bool:
        return other is not self

    def __hash__(self) -> int:
        return hash("bmresolve.INFINITY")

    def __reduce__(self):
        return (Infinity, ())


INFINITY = Infinity()


def as_rat(value: RatLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to a rational")


def format_rat(value) -> str:
    """Canonical string of a rational (``"p/q"``) or of INFINITY (``"inf"``)."""
    if value is INFINITY:
        return "inf"
    value = as_rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def natural_key(name: str):
    """Sort key putting ``x2`` before ``x10``."""
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", name)]


def _term_key(exps: Monomial):
    # graded, then lexicographic with the highest-index variable most significant
    return (sum(exps), tuple(-e for e in reversed(exps)))


class Poly:
    """Immutable sparse polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("nvars", "varnames", "_terms", "_hash")

    def __init__(
        self,
        nvars: int,
        terms: Optional[Mapping[Monomial, RatLike]] = None,
        varnames: Optional[Sequence[str]] = None,
    ):
        if varnames is None:
            varnames = tuple(f"x{i + 1}" for i in range(nvars))
        varnames = tuple(varnames)
        if len(varnames) != nvars:
            raise ValueError("varnames length must equal nvars")
        clean: Dict[Monomial, Fraction] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"monomial {exps} has wrong length for {nvars} variables")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            if any(e > MAX_EXPONENT for e in exps):
                raise OverflowError(f"exponent exceeds {MAX_EXPONENT}")
            c = as_rat(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self.nvars = nvars
        self.varnames = varnames
        self._terms = clean
        self._hash: Optional[int] = None

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Monomial, Fraction], varnames: Tuple[str, ...]) -> "Poly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.varnames = varnames
        p._terms = terms
        p._hash = None
        return p

    # constructors

    @classmethod
    def zero(cls, nvars: int, varnames: Optional[Sequence[str]] = None) -> "Poly":
        return cls(nvars, {}, varnames)

    @classmethod
    def const(cls, nvars: int, c: RatLike, varnames: Optional[Sequence[str]] = None) -> "Poly":
        return cls(nvars, {(0,) * nvars: c}, varnames)

    @classmethod
    def var(cls, nvars: int, i: int, varnames: Optional[Sequence[str]] = None) -> "Poly":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range")
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): 1}, varnames)

    @classmethod
    def monomial(cls, exps: Sequence[int], c: RatLike = 1, varnames: Optional[Sequence[str]] = None) -> "Poly":
        return cls(len(exps), {tuple(exps): c}, varnames)

    def _like(self, terms: Dict[Monomial, Fraction]) -> "Poly":
        return Poly._raw(self.nvars, terms, self.varnames)

    def with_varnames(self, varnames: Sequence[str]) -> "Poly":
        return Poly._raw(self.nvars, dict(self._terms), tuple(varnames))

    # basic queries

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        """Terms in canonical order (graded, highest-index variable first)."""
        for exps in sorted(self._terms, key=_term_key):
            yield exps, self._terms[exps]

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, i: int) -> int:
        if not self._terms:
            return -1
        return max(e[i] for e in self._terms)

    def min_degree(self):
        """Least total degree of a term, i.e. the order at the origin."""
        if not self._terms:
            return INFINITY
        return min(sum(e) for e in self._terms)

    def involves(self, i: int) -> bool:
        return any(e[i] for e in self._terms)

    def variables(self) -> List[int]:
        return [i for i in range(self.nvars) if self.involves(i)]

    def leading_coefficient(self) -> Fraction:
        """Coefficient of the largest term in canonical order."""
        if not self._terms:
            return Fraction(0)
        return self._terms[max(self._terms, key=_term_key)]

    def monic(self) -> "Poly":
        lc = self.leading_coefficient()
        if not lc or lc == 1:
            return self
        return self.scale(1 / lc)

    # arithmetic

    def _check(self, other: "Poly") -> None:
        if other.nvars != self.nvars:
            raise ValueError(f"dimension mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly.const(self.nvars, other, self.varnames)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return self._like(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return self._like({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, c: RatLike) -> "Poly":
        c = as_rat(c)
        if not c:
            return self._like({})
        return self._like({e: v * c for e, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        out: Dict[Monomial, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        for e in out:
            if any(x > MAX_EXPONENT for x in e):
                raise OverflowError(f"exponent exceeds {MAX_EXPONENT}")
        return self._like(out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly.const(self.nvars, 1, self.varnames)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mul_monomial(self, exps: Sequence[int], c: RatLike = 1) -> "Poly":
        c = as_rat(c)
        exps = tuple(exps)
        return self._like({tuple(a + b for a, b in zip(e, exps)): v * c for e, v in self._terms.items()})

    def div_monomial(self, exps: Sequence[int]) -> "Poly":
        """Exact division by ``x^exps``; raises if some term is not divisible."""
        out = {}
        for e, v in self._terms.items():
            q = tuple(a - b for a, b in zip(e, exps))
            if any(x < 0 for x in q):
                raise ArithmeticError(f"term {e} not divisible by monomial {tuple(exps)}")
            out[q] = v
        return self._like(out)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._terms == Poly.const(self.nvars, other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # calculus

    def diff(self, i: int, k: int = 1) -> "Poly":
        return derivative(self, i, k)

    def __call__(self, *point) -> Fraction:
        return evaluate(self, point)

    # rendering

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.to_str()!r}, vars={list(self.varnames)})"

    def to_str(self, varnames: Optional[Sequence[str]] = None) -> str:
        names = tuple(varnames) if varnames is not None else self.varnames
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.items():
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = format_rat(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = format_rat(mag) + "*" + "*".join(factors)
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)


# ---------------------------------------------------------------------------
# operations


def derivative(f: Poly, var: int, k: int = 1) -> Poly:
    """Exact ``k``-fold partial derivative in variable ``var``."""
    if not 0 <= var < f.nvars:
        raise IndexError(f"variable index {var} out of range")
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    if k == 0:
        return f
    out: Dict[Monomial, Fraction] = {}
    for e, c in f._terms.items():
        if e[var] < k:
            continue
        factor = math.perm(e[var], k)
        ne = list(e)
        ne[var] -= k
        out[tuple(ne)] = c * factor
    return f._like(out)


def substitute(f: Poly, images: Sequence[Poly]) -> Poly:
    """Compose: ``f(images[0], ..., images[n-1])``."""
    if len(images) != f.nvars:
        raise ValueError(f"need {f.nvars} images, got {len(images)}")
    if f.nvars == 0:
        raise ValueError("cannot substitute into a polynomial with no variables")
    m = images[0].nvars
    names = images[0].varnames
    for img in images:
        if img.nvars != m:
            raise ValueError("images must share a common variable set")
    powers: List[Dict[int, Poly]] = [{0: Poly.const(m, 1, names), 1: img} for img in images]

    def power(i: int, e: int) -> Poly:
        cache = powers[i]
        if e not in cache:
            cache[e] = power(i, e // 2) * power(i, e - e // 2)
        return cache[e]

    out: Dict[Monomial, Fraction] = {}
    for exps, c in f._terms.items():
        term = None
        for i, e in enumerate(exps):
            if e:
                p = power(i, e)
                term = p if term is None else term * p
        if term is None:
            key = (0,) * m
            v = out.get(key, 0) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
            continue
        for te, tc in term._terms.items():
            v = out.get(te, 0) + tc * c
            if v:
                out[te] = v
            else:
                out.pop(te, None)
    return Poly._raw(m, out, names)


def taylor_shift(f: Poly, a: Sequence[RatLike]) -> Poly:
    """Return ``f(x + a)``."""
    if len(a) != f.nvars:
        raise ValueError("point dimension mismatch")
    a = [as_rat(v) for v in a]
    if not any(a):
        return f
    images = [Poly.var(f.nvars, i, f.varnames) + a[i] if a[i] else Poly.var(f.nvars, i, f.varnames)
              for i in range(f.nvars)]
    return substitute(f, images)


def order_at_point(f: Poly, a: Optional[Sequence[RatLike]] = None):
    """Order (multiplicity) of ``f`` at ``a``: a natural number, or INFINITY for ``f = 0``."""
    if f.is_zero():
        return INFINITY
    if a is None:
        return f.min_degree()
    return taylor_shift(f, a).min_degree()


def order_along_hyperplane(f: Poly, var: int):
    """Largest ``k`` with ``x_var^k`` dividing ``f``; INFINITY for ``f = 0``."""
    if not 0 <= var < f.nvars:
        raise IndexError(f"variable index {var} out of range")
    if f.is_zero():
        return INFINITY
    return min(e[var] for e in f._terms)


def evaluate(f: Poly, a: Sequence[RatLike]) -> Fraction:
    if len(a) != f.nvars:
        raise ValueError(f"point has {len(a)} coordinates, polynomial has {f.nvars} variables")
    a = [as_rat(v) for v in a]
    total = Fraction(0)
    for exps, c in f._terms.items():
        term = c
        for v, e in zip(a, exps):
            if e:
                term *= v ** e
        total += term
    return total


def monomial_content(f: Poly) -> Tuple[Monomial, Poly]:
    """Split ``f = x^m * g`` with no variable dividing ``g``."""
    if f.is_zero():
        raise ValueError("monomial content of the zero polynomial is undefined")
    m = tuple(min(e[i] for e in f._terms) for i in range(f.nvars))
    return m, f.div_monomial(m)


def equalize_multiplicities(coll: Iterable[Tuple[Poly, RatLike]]) -> List[Tuple[Poly, int]]:
    """Raise each ``(g, mu)`` to ``(g^(e/mu), e)`` for the least common natural ``e``.

    ``e`` is the smallest positive integer that is an integer multiple of
    every ``mu``, which is the lcm of the numerators.
    """
    coll = [(g, as_rat(mu)) for g, mu in coll]
    if not coll:
        return []
    for _, mu in coll:
        if mu <= 0:
            raise ValueError(f"assigned multiplicity must be positive, got {mu}")
    e = 1
    for _, mu in coll:
        e = e * mu.numerator // math.gcd(e, mu.numerator)
    out = []
    for g, mu in coll:
        k = e / mu
        out.append((g ** int(k), e))
    return out


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariableError(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    """Recursive descent over: expr := term (('+'|'-') term)*;
    term := unary (('*'|'/') unary)*; unary := '-' unary | '+' unary | power;
    power := atom ('^' natural)?; atom := number | name | '(' expr ')'."""

    def __init__(self, text: str, varnames: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = tuple(varnames)
        self.index = {name: k for k, name in enumerate(self.names)}
        self.n = len(self.names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str) -> None:
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return p

    def expr(self) -> Poly:
        p = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                q = self.term()
                p = p + q if val == "+" else p - q
            else:
                return p

    def term(self) -> Poly:
        p = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.unary()
            elif kind == "op" and val == "/":
                self.take()
                q = self.unary()
                if not q.is_constant() or q.is_zero():
                    raise ParseError("division only by a nonzero constant", pos)
                p = p.scale(1 / q.constant_term())
            else:
                return p

    def unary(self) -> Poly:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return -self.unary()
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer literal", pos)
            if val > MAX_EXPONENT:
                raise ParseError("exponent too large", pos)
            return base ** val
        return base

    def atom(self) -> Poly:
        kind, val, pos = self.take()
        if kind == "num":
            return Poly.const(self.n, val, self.names)
        if kind == "name":
            if val not in self.index:
                raise UnknownVariableError(f"unknown variable {val!r}", pos)
            return Poly.var(self.n, self.index[val], self.names)
        if kind == "op" and val == "(":
            p = self.expr()
            self.expect(")")
            return p
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_poly(text: str, varnames: Sequence[str]) -> Poly:
    """Parse and expand a polynomial expression over the listed variables."""
    return _Parser(text, varnames).parse()


def infer_varnames(text: str) -> List[str]:
    """Identifiers appearing in ``text``, in natural sort order."""
    names = {tok[1] for tok in _tokenize(text) if tok[0] == "name"}
    return sorted(names, key=natural_key)


def parse_point(text: str) -> Point:
    """Parse ``"0,1/2,-3"`` into a tuple of Fractions."""
    text = text.strip()
    if not text:
        return ()
    return tuple(Fraction(part.strip()) for part in text.split(","))
