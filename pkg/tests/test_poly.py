import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from bmresolve.poly import (
    INFINITY,
    ParseError,
    Poly,
    UnknownVariableError,
    derivative,
    equalize_multiplicities,
    evaluate,
    format_rat,
    infer_varnames,
    monomial_content,
    order_along_hyperplane,
    order_at_point,
    parse_point,
    parse_poly,
    substitute,
    taylor_shift,
)

from conftest import P, poly_and_point, polys, rats

XYZ = ("x", "y", "z")
UVW = ("u", "v", "w")


def to_sympy(f: Poly):
    syms = sympy.symbols(f.varnames)
    return sympy.expand(sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(
        [s ** e for s, e in zip(syms, m)]) for m, c in f.items()))


# parse_poly

def test_parse_cusp_product_terms():
    f = P("x3^2 - x1^2*x2^3")
    assert f.terms == {(0, 0, 2): 1, (2, 3, 0): -1}


def test_parse_zero():
    assert parse_poly("0", ("x",)).is_zero()


def test_parse_cancellation_to_zero():
    assert parse_poly("(x+1)^3 - x^3 - 3*x^2 - 3*x - 1", ("x",)).is_zero()


def test_parse_reports_position_of_syntax_error():
    with pytest.raises(ParseError) as err:
        parse_poly("x + * y", ("x", "y"))
    assert err.value.position == 4


def test_parse_rejects_unknown_variable():
    with pytest.raises(UnknownVariableError):
        parse_poly("x + q", ("x",))


def test_parse_rejects_negative_exponent():
    with pytest.raises(ParseError):
        parse_poly("x^-1", ("x",))


def test_parse_unary_minus_and_parentheses():
    assert parse_poly("-(x - y)^2", ("x", "y")) == parse_poly("-x^2 + 2*x*y - y^2", ("x", "y"))


@pytest.mark.parametrize("text", ["x^2 - y^2 - z^2", "z^3 - x^2*y*z - x^4", "(x+2*y-3)^4 - z", "7"])
def test_parse_agrees_with_sympy_expansion(text):
    f = parse_poly(text, XYZ)
    assert sympy.expand(to_sympy(f) - sympy.sympify(text.replace("^", "**"))) == 0


@given(polys())
def test_render_parse_round_trip(f):
    assert parse_poly(f.to_str(), f.varnames) == f


def test_infer_varnames_uses_natural_order():
    assert infer_varnames("x10 + x2*x1") == ["x1", "x2", "x10"]


def test_parse_point_and_format():
    assert parse_point("0, 1/2,-3") == (0, Fraction(1, 2), -3)
    assert format_rat(Fraction(-5, 2)) == "-5/2" and format_rat(INFINITY) == "inf"


# derivative

def test_second_derivative_is_constant_two():
    assert derivative(P("x3^2 - x1^2*x2^3"), 2, 2) == Poly.const(3, 2)


def test_derivative_of_constant():
    assert derivative(Poly.const(2, 7), 0).is_zero()


def test_first_derivative_power_rule():
    assert derivative(P("x3^2 - x1^2*x2^3"), 2) == P("2*x3")


@given(polys(), st.integers(0, 3), st.integers(0, 3))
def test_derivative_matches_sympy(f, i, k):
    i %= f.nvars
    expect = sympy.diff(to_sympy(f), sympy.Symbol(f.varnames[i]), k)
    assert sympy.expand(to_sympy(derivative(f, i, k)) - expect) == 0


# taylor_shift

def test_taylor_shift_square():
    assert taylor_shift(parse_poly("x^2", ("x",)), (1,)) == parse_poly("x^2 + 2*x + 1", ("x",))


def test_taylor_shift_at_origin_is_identity():
    f = P("x3^2 - x1^2*x2^3")
    assert taylor_shift(f, (0, 0, 0)) == f


def test_taylor_shift_difference_of_squares():
    f = parse_poly("x^2 - y^2", ("x", "y"))
    assert taylor_shift(f, (1, 1)) == parse_poly("x^2 - y^2 + 2*x - 2*y", ("x", "y"))


@given(poly_and_point())
def test_taylor_shift_inverts(fa):
    f, a = fa
    assert taylor_shift(taylor_shift(f, a), tuple(-v for v in a)) == f


@given(poly_and_point())
def test_taylor_shift_evaluates_like_translation(fa):
    f, a = fa
    assert evaluate(taylor_shift(f, a), tuple(0 for _ in a)) == evaluate(f, a)


# orders

def test_order_cusp_product():
    assert order_at_point(P("x3^2 - x1^2*x2^3"), (0, 0, 0)) == 2


def test_order_of_zero_is_infinity():
    assert order_at_point(Poly.zero(2), (0, 0)) is INFINITY


def test_order_of_monomial():
    assert order_at_point(P("x1^3*x2^4"), (0, 0, 0)) == 7


def _order_by_derivatives(f, a):
    if f.is_zero():
        return INFINITY
    for total in itertools.count():
        for alpha in itertools.product(range(total + 1), repeat=f.nvars):
            if sum(alpha) != total:
                continue
            g = f
            for i, k in enumerate(alpha):
                g = derivative(g, i, k)
            if evaluate(g, a) != 0:
                return total


@given(poly_and_point())
def test_order_agrees_with_derivative_scan(fa):
    f, a = fa
    assert order_at_point(f, a) == _order_by_derivatives(f, a)


def test_order_along_hyperplane_examples():
    assert order_along_hyperplane(P("x1^3*x2^3"), 0) == 3
    assert order_along_hyperplane(P("x1^3*x2^4"), 1) == 4
    assert order_along_hyperplane(P("1 + x1*x2"), 1) == 0
    assert order_along_hyperplane(Poly.zero(3), 0) is INFINITY


@given(polys(nvars=3).filter(lambda f: not f.is_zero()), st.integers(0, 2), st.integers(0, 4))
def test_order_along_hyperplane_is_additive(f, i, k):
    exps = [0, 0, 0]
    exps[i] = k
    assert order_along_hyperplane(f.mul_monomial(exps), i) == order_along_hyperplane(f, i) + k


# substitute

def test_substitute_cone_into_blowup_chart():
    f = parse_poly("x^2 - y^2 - z^2", XYZ)
    imgs = [parse_poly(t, UVW) for t in ("u", "u*v", "u*w")]
    assert substitute(f, imgs) == parse_poly("u^2*(1 - v^2 - w^2)", UVW)


def test_substitute_identity():
    f = P("x3^2 - x1^2*x2^3")
    assert substitute(f, [Poly.var(3, i) for i in range(3)]) == f


def test_substitute_forced_center_chart():
    f = parse_poly("z^3 - x^2*y*z - x^4", XYZ)
    imgs = [parse_poly(t, UVW) for t in ("u", "v", "u*w")]
    assert substitute(f, imgs) == parse_poly("u^3*(w^3 - v*w - u)", UVW)


def test_substitute_dimension_mismatch():
    with pytest.raises(ValueError):
        substitute(P("x1"), [Poly.var(3, 0)])


@given(polys(nvars=2, max_degree=3), polys(nvars=2, max_degree=2), polys(nvars=2, max_degree=2),
       polys(nvars=2, max_degree=2), polys(nvars=2, max_degree=2))
def test_substitute_respects_composition(f, s1, s2, t1, t2):
    sigma, tau = [s1, s2], [t1, t2]
    composed = [substitute(s, tau) for s in sigma]
    assert substitute(substitute(f, sigma), tau) == substitute(f, composed)


# monomial content and equalization

def test_monomial_content_pure_monomial():
    m, g = monomial_content(P("x1^3*x2^3"))
    assert m == (3, 3, 0) and g == Poly.const(3, 1)


def test_monomial_content_unit():
    f = P("1 + x1")
    assert monomial_content(f) == ((0, 0, 0), f)


def test_monomial_content_year_three():
    assert monomial_content(P("x1*x2^4"))[0] == (1, 4, 0)


def test_monomial_content_rejects_zero():
    with pytest.raises(ValueError):
        monomial_content(Poly.zero(2))


def test_equalize_two_and_three():
    g, h = P("x1"), P("x2")
    assert equalize_multiplicities([(g, 2), (h, 3)]) == [(g ** 3, 6), (h ** 2, 6)]


def test_equalize_single_pair():
    g = P("x1 + x2^2")
    assert equalize_multiplicities([(g, 2)]) == [(g, 2)]


def test_equalize_fractional():
    g, h = P("x1"), P("x2")
    assert equalize_multiplicities([(g, Fraction(3, 2)), (h, 1)]) == [(g ** 2, 3), (h ** 3, 3)]


def test_equalize_is_integral_for_unit_fractions():
    g = P("x1")
    assert equalize_multiplicities([(g, Fraction(1, 3)), (g, Fraction(1, 2))]) == [(g ** 3, 1), (g ** 2, 1)]


def test_equalize_rejects_nonpositive():
    with pytest.raises(ValueError):
        equalize_multiplicities([(P("x1"), 0)])


MULTS = st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)])


@given(polys(nvars=2, max_degree=2, max_terms=3).filter(lambda f: not f.is_zero()),
       polys(nvars=2, max_degree=2, max_terms=3).filter(lambda f: not f.is_zero()),
       MULTS, MULTS, st.tuples(rats, rats))
def test_equalize_preserves_order_ratios(g, h, mg, mh, a):
    out = equalize_multiplicities([(g, mg), (h, mh)])
    for (orig, mu), (new, e) in zip([(g, mg), (h, mh)], out):
        assert Fraction(order_at_point(new, a)) / e == Fraction(order_at_point(orig, a)) / mu


# evaluate

def test_evaluate_examples():
    assert evaluate(parse_poly("x^2 - y^2", ("x", "y")), (2, 1)) == 3
    assert evaluate(P("5 + x1*x2"), (0, 0, 0)) == 5
    assert evaluate(parse_poly("1 - v^2 - w^2", ("v", "w")), (0, 0)) == 1


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(P("x1"), (1, 2))


def test_exponent_overflow_fails_loudly():
    with pytest.raises(OverflowError):
        Poly(1, {(1 << 20,): 1})
