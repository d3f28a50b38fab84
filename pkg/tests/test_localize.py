from fractions import Fraction
import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from degcw.cartan import EqForm
from degcw.dcw import metric_connection, perturbed_connection
from degcw.exprgeom import FixedComponent, Region, load_scenario
from degcw.exprgeom.forms import Chart, DForm
from degcw.liealg import build_lie_algebra
from degcw.localize import (LaurentU, LocalizationError, MixedForm, ResidueComponent,
                            equivariant_euler, exp_u, jk_residue_check, kalkman_sides,
                            laurent_invert, res0, su2_boundary_sides, fixed_point_sum,
                            triangle_residue_components)
from degcw.suites import random_residue_components

u = LaurentU.u
SO3 = build_lie_algebra("so3")


def _sphere_component(c1):
    reg = Region(Chart("fc", ("a", "b")), ("a", "b"), ((0, 1), (0, 1)), None)
    return FixedComponent("S", (3,), region=reg, c1=(sympy.sympify(c1),))


def test_euler_point():
    assert equivariant_euler(FixedComponent("p", (1, 1))) == u(2)
    assert equivariant_euler(FixedComponent("p", (2, -3))) == u(2, -6)


def test_euler_with_c1():
    fc = _sphere_component(5)
    e = equivariant_euler(fc)
    assert e.coeff(1).degree0() == 3
    assert e.coeff(0).parts[2].comps[(0, 1)] == 5


@given(st.lists(st.integers(-4, 4).filter(bool), min_size=1, max_size=3),
       st.lists(st.integers(-4, 4).filter(bool), min_size=1, max_size=3))
def test_euler_multiplicative(w1, w2):
    e1 = equivariant_euler(FixedComponent("a", tuple(w1)))
    e2 = equivariant_euler(FixedComponent("b", tuple(w2)))
    assert e1 * e2 == equivariant_euler(FixedComponent("c", tuple(w1 + w2)))


def test_zero_weight_rejected():
    with pytest.raises(LocalizationError):
        equivariant_euler(FixedComponent("z", (1, 0)))


def test_invert_examples():
    assert laurent_invert(u(2)) == u(-2)
    fc = _sphere_component(1)
    chart = Chart("fc", ("a", "b"))
    gamma = MixedForm(chart, {2: DForm(chart, 2, {(0, 1): 1})})
    m = 3
    x = LaurentU({1: MixedForm.scalar(chart, m), 0: gamma})
    inv = laurent_invert(x, max_form_degree=2)
    assert inv.lo is None
    expected = LaurentU({-1: MixedForm.scalar(chart, sympy.Rational(1, m)),
                         -2: gamma * sympy.Rational(-1, m**2)})
    assert inv == expected
    one = (inv * x).coeff(0)
    assert one.degree0() == 1 and 2 not in one.parts


@given(st.lists(st.fractions(max_denominator=5), min_size=1, max_size=4),
       st.fractions(max_denominator=5).filter(bool), st.integers(-2, 3))
def test_double_inverse(tail, lead, k):
    x = LaurentU({k: lead, **{k - 1 - i: c for i, c in enumerate(tail)}})
    inv = laurent_invert(x, order=10)
    back = laurent_invert(inv, order=10)
    # compare inside the window where both truncations are exact
    for j in range(k - 3, k + 1):
        assert sympy.simplify(back.coeff(j) - x.terms.get(j, 0)) == 0


def test_invert_zero_and_window():
    with pytest.raises(LocalizationError):
        laurent_invert(LaurentU())
    x = LaurentU({1: 1, 0: 1})
    inv = laurent_invert(x, order=4)
    with pytest.raises(LocalizationError):
        inv.coeff(-10)
    assert inv.coeff(-3) == 1


def test_res0_examples():
    assert res0(u(2) + u(-1, 3)) == 3
    assert res0(u(-2)) == 0
    g, mu = sympy.Rational(7, 3), sympy.Rational(-5, 2)
    assert res0(u(2) * exp_u(mu, 6) * u(-3, g)) == g


@given(st.fractions(max_denominator=6), st.integers(1, 5))
def test_exp_series(mu, n):
    # coefficient of u^-1 in e^{mu u} u^{-n-1} is mu^n / n!
    got = res0(exp_u(mu, n + 2) * u(-n - 1))
    assert got == sympy.Rational(mu.numerator, mu.denominator) ** n / sympy.factorial(n)


def test_truncation_conflict():
    with pytest.raises(LocalizationError):
        exp_u(1, 3) * LaurentU({0: 1}, lo=-2)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_kalkman_disk(m):
    s = load_scenario("disk_m", m=m)
    one = EqForm.on(s).const(1)
    sides = kalkman_sides(s, one)
    assert abs(sides.lhs - 1 / m) < 1e-6 and abs(sides.rhs - 1 / m) < 1e-6


def test_kalkman_independent_of_connection():
    s = load_scenario("disk_m")
    one = EqForm.on(s).const(1)
    om = metric_connection(s)
    a = kalkman_sides(s, one)
    b = kalkman_sides(s, one, connection=perturbed_connection(s, om))
    assert abs(a.lhs - b.lhs) < 1e-9


def test_kalkman_wrong_degree():
    s = load_scenario("disk_sphere")
    with pytest.raises(LocalizationError):
        kalkman_sides(s, EqForm.on(s).const(1))


def test_kalkman_alpha_zero():
    s = load_scenario("disk_m")
    sides = kalkman_sides(s, EqForm.on(s).const(0))
    assert sides.lhs == 0 and sides.rhs == 0


def test_kalkman_disk_sphere_oracle():
    s = load_scenario("disk_sphere")
    vT = EqForm.on(s).from_terms(s.eqforms["vT"])
    sides = kalkman_sides(s, vT)
    # hand evaluation at the poles: 4 pi / (1*1) at the north, 0 at the south
    assert abs(sides.lhs - 4 * np.pi) < 1e-5 and abs(sides.rhs - 4 * np.pi) < 1e-5


def test_su2_boundary():
    s = load_scenario("quat_ball")
    sides = su2_boundary_sides(s, EqForm.on(s).const(1))
    assert abs(sides.lhs - sides.rhs) < 1e-5
    assert abs(abs(sides.lhs) - 1) < 1e-5
    assert abs(sides.extra["rewrite_lhs"] - sides.extra["rewrite_rhs"]) < 1e-5
    z = su2_boundary_sides(s, EqForm.on(s).const(0))
    assert z.lhs == 0 and z.rhs == 0
    lin = su2_boundary_sides(s, EqForm.on(s).const(sympy.Rational(5, 2)))
    assert abs(lin.lhs - 2.5 * sides.lhs) < 1e-9


def test_su2_boundary_wrong_group():
    s = load_scenario("disk_m")
    with pytest.raises(LocalizationError):
        su2_boundary_sides(s, EqForm.on(s).const(1))


def _hand_fixed_point_sum(radii, c):
    # 8 poles of (S^2)^3; weights s_i, moment sum s_i r_i; F_+ where the moment is positive
    total = Fraction(0)
    for signs in itertools.product((1, -1), repeat=3):
        mu = sum(s * Fraction(r) for s, r in zip(signs, radii))
        if mu > 0:
            total += Fraction(1, signs[0] * signs[1] * signs[2])
    b, cg = 1, 2
    return -Fraction(b, cg) * c * total


@pytest.mark.parametrize("radii", [(1, 1, 1), (2, Fraction(3, 2), 1)])
def test_fixed_point_sum_triangle(radii):
    s = load_scenario("triangle_fp", r1=radii[0], r2=radii[1], r3=radii[2])
    c = sympy.Symbol("c")
    assert sympy.simplify(fixed_point_sum(s.fixed, c, s.alg) - c) == 0
    assert fixed_point_sum(s.fixed, sympy.Rational(3, 7), s.alg) == sympy.Rational(3, 7)
    assert _hand_fixed_point_sum(radii, Fraction(3, 7)) == Fraction(3, 7)
    assert fixed_point_sum(s.fixed, 0, s.alg) == 0


def test_fixed_point_sum_linear_in_alpha():
    s = load_scenario("triangle_fp")
    a, b = fixed_point_sum(s.fixed, 2, s.alg), fixed_point_sum(s.fixed, 5, s.alg)
    assert sympy.Rational(5, 2) * a == b


def test_fixed_point_sum_missing_sign():
    with pytest.raises(LocalizationError):
        fixed_point_sum([FixedComponent("p", (1,), mu=Fraction(0))], 1, SO3)


def test_jk_point_component():
    c = sympy.Symbol("c")
    for w in ((1, 1, 1), (1, -1, 1)):
        comp = ResidueComponent(0, sympy.Integer(2), {(0, 0, 0): c / (w[0] * w[1] * w[2])}, True)
        res, tri = jk_residue_check([comp], 0, 0, SO3)
        expected = -sympy.Rational(1, 2) * c * sympy.Rational(1, w[0] * w[1] * w[2])
        assert sympy.simplify(res - expected) == 0 and sympy.simplify(tri - expected) == 0


def test_jk_all_zero():
    comps = [ResidueComponent(1, sympy.Integer(1), {(0, 1, 0): 0, (0, 0, 1): 0}, True)]
    assert jk_residue_check(comps, 2, 0, SO3) == (0, 0)


def test_jk_triangle_matches_fixed_point_sum():
    s = load_scenario("triangle_fp")
    c = sympy.Symbol("c")
    res, tri = jk_residue_check(triangle_residue_components(s, c), 0, 0, s.alg)
    assert sympy.simplify(res - c) == 0 and sympy.simplify(tri - c) == 0


@given(st.integers(0, 2**31 - 1))
def test_jk_random(seed):
    comps, n, sdeg = random_residue_components(np.random.default_rng(seed))
    res, tri = jk_residue_check(comps, n, sdeg, SO3)
    assert sympy.simplify(res - tri) == 0


def test_jk_inconsistent_pairing():
    comps = [ResidueComponent(1, sympy.Integer(1), {(0, 0, 0): 1}, True)]
    with pytest.raises(LocalizationError):
        jk_residue_check(comps, 2, 0, SO3)
