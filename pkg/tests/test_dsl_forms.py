import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from degcw.exprgeom.dsl import (Bump, DSLSyntaxError, UnknownSymbolError, bump, lambdify,
                                parse_scalar_expr)
from degcw.exprgeom.forms import (Chart, DForm, VectorField, contract_vf, evaluate_exprs,
                                  exterior_d, lie_vf, vf_bracket, wedge)

XY = Chart("xy", ("x", "y"))
X4 = Chart("r4", ("p", "q", "r", "s"))


def test_parse_and_evaluate_pythagoras():
    e = parse_scalar_expr("sin(t)^2 + cos(t)^2", ["t"])
    f = lambdify([sympy.Symbol("t", real=True)], [e])
    assert f(0.3)[0] == pytest.approx(1.0, abs=1e-15)


def test_parse_derivative():
    x, y = XY.symbols
    e = parse_scalar_expr("x*y", XY.symbol_map)
    assert sympy.diff(e, x) == y


def test_parse_rationals_pi_and_constants():
    e = parse_scalar_expr("3/4*pi + 2*m", [], {"m": 3})
    assert e == sympy.Rational(3, 4) * sympy.pi + 6


def test_syntax_error_offset():
    with pytest.raises(DSLSyntaxError) as ei:
        parse_scalar_expr("sin(", ["t"])
    assert ei.value.offset == 4


@pytest.mark.parametrize("text", ["x +", "(x", "x y", "sin(x, y)", "x^y"])
def test_syntax_errors(text):
    with pytest.raises(DSLSyntaxError):
        parse_scalar_expr(text, ["x", "y"])


@pytest.mark.parametrize("text", ["z + 1", "tan(x)"])
def test_unknown_symbol(text):
    with pytest.raises(UnknownSymbolError):
        parse_scalar_expr(text, ["x", "y"])


def _step_oracle(x):
    h = lambda t: np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
    return h(x) / (h(x) + h(1 - x))


def test_bump_values_and_derivative():
    r = sympy.Symbol("r", real=True)
    b = bump(r, sympy.Rational(1, 4), 1)
    assert b.subs(r, 0) == 0 and b.subs(r, 2) == 1
    f = lambdify([r], [b, sympy.diff(b, r), sympy.diff(b, r, 2)])
    xs = np.linspace(0.0, 1.2, 97)
    v, d1, d2 = (np.asarray(a) for a in f(xs))
    assert np.allclose(v, _step_oracle((xs - 0.25) / 0.75), atol=1e-14)
    h = 1e-5
    fd = (_step_oracle((xs + h - 0.25) / 0.75) - _step_oracle((xs - h - 0.25) / 0.75)) / (2 * h)
    assert np.allclose(d1, fd, atol=1e-6)
    fd2 = (_step_oracle((xs + h - 0.25) / 0.75) - 2 * _step_oracle((xs - 0.25) / 0.75)
           + _step_oracle((xs - h - 0.25) / 0.75)) / h**2
    assert np.allclose(d2, fd2, atol=1e-3)
    assert isinstance(sympy.diff(b, r), Bump)


def test_d_x_dy():
    x, y = XY.symbols
    w = DForm(XY, 1, {(1,): x})
    assert exterior_d(w).comps == {(0, 1): 1}


def test_top_degree_d_zero():
    x, y = XY.symbols
    assert exterior_d(DForm(XY, 2, {(0, 1): x * y})).is_zero()


def test_wedge_antisymmetry_unit():
    dx, dy = (DForm.coord_differential(XY, i) for i in range(2))
    assert (wedge(dx, dy) + wedge(dy, dx)).is_zero()
    a = DForm(XY, 1, {(0,): XY.symbols[1]})
    assert (wedge(a, DForm.scalar(XY, 1)) - a).is_zero()


def test_contract_first_slot():
    S2 = Chart("s2", ("th", "ph"))
    d_phi = VectorField(S2, (0, 1))
    res = contract_vf(d_phi, DForm(S2, 2, {(0, 1): 1}))
    assert res.comps == {(0,): -1}


coef = st.integers(-3, 3)


@st.composite
def poly_forms(draw, chart=X4, degree=None):
    k = draw(st.integers(0, chart.dim)) if degree is None else degree
    comps = {}
    xs = chart.symbols
    for I in itertools.combinations(range(chart.dim), k):
        c = sum(draw(coef) * xs[i] ** draw(st.integers(0, 2)) for i in range(chart.dim))
        comps[I] = c
    return DForm(chart, k, comps)


@given(poly_forms())
def test_dd_zero(w):
    assert exterior_d(exterior_d(w)).is_zero()


@given(poly_forms(degree=1), poly_forms(degree=1), poly_forms(degree=2))
def test_wedge_associative_and_leibniz(a, b, c):
    pts = np.random.default_rng(0).uniform(-1, 1, (20, 4))
    lhs = wedge(wedge(a, b), c).evaluate(pts)
    rhs = wedge(a, wedge(b, c)).evaluate(pts)
    assert np.allclose(lhs, rhs, atol=1e-12)
    dl = exterior_d(wedge(a, c))
    dr = wedge(exterior_d(a), c) - wedge(a, exterior_d(c))
    assert (dl - dr).expand().is_zero()


@st.composite
def vfields(draw, chart=X4):
    xs = chart.symbols
    return VectorField(chart, tuple(sum(draw(coef) * x for x in xs) + draw(coef) for _ in xs))


@given(vfields(), poly_forms())
def test_contract_twice_zero(V, w):
    assert contract_vf(V, contract_vf(V, w)).expand().is_zero()


@given(vfields(), poly_forms(), st.integers(-3, 3))
def test_lie_leibniz(V, w, k):
    p, q, r, s = X4.symbols
    f = p * q + k * s**2
    lhs = lie_vf(V, w * f)
    rhs = w * V.apply(f) + lie_vf(V, w) * f
    pts = np.random.default_rng(1).uniform(-1, 1, (20, 4))
    assert np.allclose(lhs.evaluate(pts), rhs.evaluate(pts), atol=1e-9)


@given(vfields(), vfields(), poly_forms())
def test_lie_bracket_commutator(U, V, w):
    lhs = lie_vf(vf_bracket(U, V), w)
    rhs = lie_vf(U, lie_vf(V, w)) - lie_vf(V, lie_vf(U, w))
    assert (lhs - rhs).expand().is_zero()


def test_evaluate_exprs_shapes():
    x, y = XY.symbols
    out = evaluate_exprs(XY, [x + y, sympy.Integer(2)], [[1, 2], [3, 4]])
    assert out.shape == (2, 2) and np.allclose(out, [[3, 2], [7, 2]])
    assert math.isclose(evaluate_exprs(XY, [sympy.pi], [[0, 0]])[0, 0], math.pi)
