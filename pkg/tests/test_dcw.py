import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from degcw.cartan import EqForm, cartan_D, check_invariance, random_invariant
from degcw.dcw import (ConnectionPath, CutoffPath, NotInvariantError, SingularGramError,
                       apply_cw_f, apply_r_f, connection_residuals, degenerate_curvature,
                       horizontality_residual, curvature_identity_residual, polarized_invariance_residual,
                       polarized_bracket_residual, metric_connection, perturbed_connection,
                       r_from_curvature, transgress_form, transgress_invariant_poly,
                       transgression_residual)
from degcw.exprgeom import DForm, exterior_d, load_scenario
from degcw.exprgeom.forms import evaluate_exprs, metric_flat
from degcw.weil import WeilElement, casimir


@pytest.fixture(scope="module")
def disk1():
    s = load_scenario("disk_m", m=1)
    return s, s.sample_points(100), metric_connection(s)


@pytest.fixture(scope="module")
def ds():
    s = load_scenario("disk_sphere")
    return s, s.sample_points(100), metric_connection(s)


@pytest.fixture(scope="module")
def qb():
    s = load_scenario("quat_ball")
    return s, s.sample_points(100), metric_connection(s)


def test_disk_connection_formula():
    s = load_scenario("disk_m", m=3)
    x, y = s.chart.symbols
    om = metric_connection(s).comps[0]
    # d phi / (2 pi m) in Cartesian coordinates
    expected = DForm(s.chart, 1, {(0,): -y, (1,): x}) * (1 / (6 * sympy.pi * (x**2 + y**2)))
    assert all(sympy.simplify(c) == 0 for c in (om - expected).comps.values())


def test_connection_axioms(ds, qb):
    for s, pts, om in (ds, qb):
        r = connection_residuals(om, pts)
        assert r["vertical"] < 1e-9 and r["equivariant"] < 1e-9
        r = connection_residuals(perturbed_connection(s, om), pts)
        assert r["vertical"] < 1e-9 and r["equivariant"] < 1e-9


def test_quat_ball_on_sphere(qb):
    s, _, om = qb
    bpts = s.boundary.map_points(s.boundary.sample_params(100, np.random.default_rng(0)))
    assert connection_residuals(om, bpts)["vertical"] < 1e-9


def test_connection_at_fixed_point(disk1):
    s, _, om = disk1
    with pytest.raises(SingularGramError):
        om.evaluate([[0.0, 0.0]])


def test_curvature_f_zero(qb):
    s, pts, om = qb
    curv = degenerate_curvature(om, 0)
    base = EqForm.on(s)
    for a in range(3):
        assert curv.comps[a].equals(base.generator(a))


def test_curvature_f_one_abelian(disk1):
    s, pts, om = disk1
    curv = degenerate_curvature(om, 1)
    assert curv.comps[0].equals(EqForm.on(s).from_dform(exterior_d(om.comps[0])))


def test_curvature_identity(qb):
    s, pts, om = qb
    assert curvature_identity_residual(degenerate_curvature(om, s.cutoff), pts) < 1e-9


def test_cw_u1_by_hand(disk1):
    s, pts, om = disk1
    f = s.cutoff
    curv = degenerate_curvature(om, f)
    F = WeilElement.Theta(s.alg, 0)
    base = EqForm.on(s)
    expected = base.from_dform(exterior_d(om.comps[0] * f)) + base.generator(0) * (1 - f)
    assert apply_cw_f(F, curv).equals(expected)
    assert apply_cw_f(WeilElement.scalar(s.alg, 1), curv).equals(base.const(1))


def test_cw_rejects_noninvariant(qb):
    s, _, om = qb
    with pytest.raises(NotInvariantError):
        apply_cw_f(WeilElement.Theta(s.alg, 0), degenerate_curvature(om, s.cutoff))
    with pytest.raises(NotInvariantError):
        apply_cw_f(WeilElement.theta(s.alg, 0), degenerate_curvature(om, s.cutoff))


def test_cw_closed_and_polarized_invariance(qb):
    s, pts, om = qb
    curv = degenerate_curvature(om, s.cutoff)
    F = casimir(s.alg)
    cw = apply_cw_f(F, curv)
    assert cw.max_abs(pts) > 1e-3
    assert cartan_D(cw).max_abs(pts) < 1e-9
    assert polarized_invariance_residual(F, curv, pts) < 1e-9


def test_polarized_bracket_random_alpha(qb):
    s, pts, om = qb
    curv = degenerate_curvature(om, s.cutoff)
    rng = np.random.default_rng(4)
    xs = s.chart.symbols
    alpha = [DForm(s.chart, 1, {(i,): sum(int(rng.integers(-3, 4)) * x for x in xs) + 1
                                for i in range(4)}) for _ in range(3)]
    assert polarized_bracket_residual(casimir(s.alg), curv, alpha, pts) < 1e-9


def test_r_identity_for_zero_cutoff(ds):
    s, pts, om = ds
    a = random_invariant(s, np.random.default_rng(0))
    assert apply_r_f(a, om, 0).equals(a)


def test_cw_equals_r_of_polynomial(qb):
    s, _, om = qb
    curv = degenerate_curvature(om, s.cutoff)
    F = casimir(s.alg)
    assert r_from_curvature(EqForm.on(s).from_polynomial(F), curv).equals(apply_cw_f(F, curv))


@settings(max_examples=5)
@given(st.integers(0, 2**31 - 1))
def test_chain_map_disk_sphere(ds, seed):
    s, pts, om = ds
    curv = degenerate_curvature(om, s.cutoff)
    a = random_invariant(s, np.random.default_rng(seed))
    lhs = cartan_D(r_from_curvature(a, curv))
    rhs = r_from_curvature(cartan_D(a), curv)
    assert (lhs - rhs).max_abs(pts) < 1e-9


def test_chain_map_quat_ball_nontrivial(qb):
    s, pts, om = qb
    curv = degenerate_curvature(om, s.cutoff)
    base = EqForm.on(s)
    p, q, r, ss = s.chart.symbols
    # Theta^a g(V_a, .) times a radial function: invariant, with nonzero D
    phi = base.zero()
    for a in range(3):
        phi = phi + base.generator(a) * metric_flat(s.metric, s.fields[a])
    a = phi * (p**2 + q**2 + r**2 + ss**2) * sympy.Rational(1, 40)
    assert check_invariance(a, pts) < 1e-9
    lhs = cartan_D(r_from_curvature(a, curv))
    assert lhs.max_abs(pts) > 1e-3
    assert (lhs - r_from_curvature(cartan_D(a), curv)).max_abs(pts) < 1e-9


def test_r_basic_where_f_is_one(ds):
    s, _, om = ds
    collar = s.sample_points(60, "collar")
    assert np.allclose(evaluate_exprs(s.chart, [s.cutoff], collar), 1.0)
    curv = degenerate_curvature(om, s.cutoff)
    base = EqForm.on(s)
    vT = base.from_terms(s.eqforms["vT"])
    r = r_from_curvature(vT, curv)
    assert horizontality_residual(r, collar) < 1e-9
    assert horizontality_residual(vT, collar) > 1e-3


def test_transgression_trivial_cases(ds):
    s, pts, om = ds
    F = WeilElement.Theta(s.alg, 0)
    T = transgress_invariant_poly(ConnectionPath(om, om, s.cutoff), F)
    assert T.integrand.is_zero()
    T = transgress_invariant_poly(ConnectionPath(om, perturbed_connection(s, om), s.cutoff),
                                  WeilElement.scalar(s.alg, 1))
    assert T.integrand.is_zero()
    assert transgress_form(om, om, s.cutoff, EqForm.on(s).generator(0)).integrand.is_zero()
    assert transgress_form(om, perturbed_connection(s, om), s.cutoff, EqForm.on(s).const(1)).integrand.is_zero()


def test_transgression_cutoff_path_disk1(disk1):
    s, pts, om = disk1
    F = WeilElement.Theta(s.alg, 0)
    T = transgress_invariant_poly(CutoffPath(om, s.cutoff, s.cutoff_alt), F)
    target = apply_cw_f(F, degenerate_curvature(om, s.cutoff_alt)) - apply_cw_f(F, degenerate_curvature(om, s.cutoff))
    assert target.max_abs(pts) > 1e-2
    res, err = transgression_residual(T, target, pts)
    assert res < 1e-6 and err < 1e-6


def test_transgression_form_disk_sphere(ds):
    s, pts, om = ds
    om1 = perturbed_connection(s, om)
    vT = EqForm.on(s).from_terms(s.eqforms["vT"])
    c0, c1 = degenerate_curvature(om, s.cutoff), degenerate_curvature(om1, s.cutoff)
    target = r_from_curvature(vT, c1) - r_from_curvature(vT, c0)
    assert target.max_abs(pts) > 1e-3
    T = transgress_form(om, om1, s.cutoff, vT)
    res, _ = transgression_residual(T, target, pts, correction=transgress_form(om, om1, s.cutoff, cartan_D(vT)))
    assert res < 1e-6
