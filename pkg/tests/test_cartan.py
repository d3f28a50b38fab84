import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from degcw.cartan import (EqForm, cartan_D, check_invariance, contract, coefficient_identity_residuals,
                          lie_geometric, project_to_torus, random_closed_invariant,
                          random_invariant, symmetric_coefficients, torus_average_residual)
from degcw.exprgeom import DForm, load_scenario
from degcw.liealg import build_lie_algebra
from degcw.weil import casimir


@pytest.fixture(scope="module")
def sphere():
    s = load_scenario("sphere_so3")
    return s, s.sample_points(100)


@pytest.fixture(scope="module")
def ds():
    s = load_scenario("disk_sphere")
    return s, s.sample_points(100)


@pytest.fixture(scope="module")
def qb():
    s = load_scenario("quat_ball")
    return s, s.sample_points(40)


def test_D_of_constant(sphere):
    s, pts = sphere
    assert cartan_D(EqForm.on(s).const(1)).is_zero()


@pytest.mark.parametrize("name,b", [("sphere_so3", 1), ("sphere_su2", 2)])
def test_vT_closed(name, b):
    s = load_scenario(name)
    th, ph = s.chart.symbols
    assert s.params["b"] == b
    base = EqForm.on(s, torus=True)
    # v_T written out by hand: sin(th) dth^dph + 2 pi (1 + b cos th) u
    vT = (base.from_dform(DForm(s.chart, 2, {(0, 1): sympy.sin(th)}))
          + base.theta((1,), 2 * sympy.pi * (1 + b * sympy.cos(th))))
    from_file = base.from_terms([((e[0],), i, c) for e, i, c in s.eqforms["vT"]])
    assert vT.equals(from_file)
    assert cartan_D(vT).max_abs(s.sample_points(100)) < 1e-10


def test_vT_wrong_constant_not_closed():
    s = load_scenario("sphere_so3")
    th, _ = s.chart.symbols
    base = EqForm.on(s, torus=True)
    bad = base.from_dform(DForm(s.chart, 2, {(0, 1): sympy.sin(th)})) + base.theta((1,), 2 * sympy.pi * (1 + 3 * sympy.cos(th)))
    assert cartan_D(bad).max_abs(s.sample_points(20)) > 1e-3


def test_invariance_examples(qb):
    s, pts = qb
    base = EqForm.on(s)
    assert check_invariance(base.const(1), pts) == 0.0
    assert check_invariance(base.from_polynomial(casimir(s.alg)), pts) < 1e-12
    assert check_invariance(base.generator(0), pts) > 1.0


def test_projection_examples(qb, sphere):
    s, _ = qb
    p = project_to_torus(EqForm.on(s).from_polynomial(casimir(s.alg)))
    assert p.alg == build_lie_algebra("u1")
    assert p.equals(EqForm.on(s, torus=True).theta((2,)))
    s2, pts = sphere
    th, _ = s2.chart.symbols
    area = EqForm.on(s2).from_dform(DForm(s2.chart, 2, {(0, 1): sympy.sin(th)}))
    pa = project_to_torus(area)
    assert pa.equals(EqForm.on(s2, torus=True).from_dform(DForm(s2.chart, 2, {(0, 1): sympy.sin(th)})))


seeds = st.integers(0, 2**31 - 1)


@given(seeds)
def test_D_squared_invariant(ds, seed):
    s, pts = ds
    a = random_invariant(s, np.random.default_rng(seed))
    assert check_invariance(a, pts) < 1e-9
    assert cartan_D(cartan_D(a)).max_abs(pts) < 1e-10


def _random_form(s, rng):
    base = EqForm.on(s)
    xs = s.chart.symbols
    out = base.zero()
    for _ in range(3):
        q = int(rng.integers(0, 3))
        idx = tuple(sorted(rng.choice(s.chart.dim, q, replace=False)))
        coeff = sum(int(rng.integers(-3, 4)) * x for x in xs) + 1
        exps = [0] * s.alg.dim
        exps[int(rng.integers(s.alg.dim))] = int(rng.integers(0, 2))
        out = out + base.from_terms([(exps, idx, coeff)])
    return out


@given(seeds)
def test_D_squared_is_minus_theta_lie(ds, seed):
    # D^2 = -Theta^a Lie_{V_a} on any equivariant form (no invariance needed)
    s, pts = ds
    a = _random_form(s, np.random.default_rng(seed))
    rhs = EqForm.on(s).zero()
    for b in range(s.alg.dim):
        rhs = rhs - a.generator(b) * lie_geometric(b, a)
    assert (cartan_D(cartan_D(a)) - rhs).max_abs(pts) < 1e-10


def test_D_squared_nonzero_noninvariant(ds):
    s, pts = ds
    x, y, th, ph = s.chart.symbols
    a = EqForm.on(s).from_dform(DForm.scalar(s.chart, x))
    assert cartan_D(cartan_D(a)).max_abs(pts) > 1e-3


def test_contract_anticommutes(qb):
    s, pts = qb
    a = random_invariant(s, np.random.default_rng(3))
    lhs = contract(0, contract(1, a)) + contract(1, contract(0, a))
    assert lhs.max_abs(pts) < 1e-12


@pytest.mark.parametrize("name", ["disk_sphere", "sphere_so3"])
def test_coefficient_identities(name):
    s = load_scenario(name)
    pts = s.sample_points(60)
    rng = np.random.default_rng(11)
    for _ in range(3):
        a = random_closed_invariant(s, rng)
        r = coefficient_identity_residuals(a, pts)
        assert r["lie"] < 1e-9 and r["exterior"] < 1e-9


def test_coefficient_identities_fail_off_closed(ds):
    s, pts = ds
    x, y, th, ph = s.chart.symbols
    # invariant but not closed: the exterior identity should fail
    a = EqForm.on(s).from_dform(DForm.scalar(s.chart, x**2 + y**2))
    assert check_invariance(a, pts) < 1e-12
    assert coefficient_identity_residuals(a, pts)["exterior"] > 1e-3


def test_symmetric_coefficients_scaling(qb):
    s, _ = qb
    base = EqForm.on(s)
    a = base.generator(0) * base.generator(1)
    sc = symmetric_coefficients(a)
    # Theta^1 Theta^2 = a_{12} Theta^1Theta^2 + a_{21} Theta^2Theta^1, so a_{12} = 1/2
    assert sc[((0, 1), 0)].comps[()] == sympy.Rational(1, 2)


@pytest.mark.parametrize("name", ["disk_sphere", "sphere_so3"])
def test_projection_commutes_with_D(name):
    s = load_scenario(name)
    pts = s.sample_points(50)
    rng = np.random.default_rng(5)
    for _ in range(3):
        a = random_invariant(s, rng)
        diff = project_to_torus(cartan_D(a)) - cartan_D(project_to_torus(a))
        assert diff.max_abs(pts) < 1e-9


def test_circle_average_identity_on_invariant(sphere):
    s, _ = sphere
    pts = s.sample_points(8)
    a = random_invariant(s, np.random.default_rng(2))
    assert torus_average_residual(s, a, pts) < 1e-8
