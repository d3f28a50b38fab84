"""Verification suites run by the command line tool and the acceptance tests."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

import numpy as np
import sympy

from .cartan import (EqForm, cartan_D, check_invariance, coefficient_identity_residuals, project_to_torus,
                     random_closed_invariant, random_invariant)
from .dcw import (ConnectionPath, CutoffPath, apply_cw_f, apply_r_f, degenerate_curvature,
                  horizontality_residual, curvature_identity_residual, polarized_invariance_residual, polarized_bracket_residual,
                  metric_connection, perturbed_connection, r_from_curvature, transgress_form,
                  transgress_invariant_poly, transgression_residual)
from .exprgeom.forms import DForm
from .exprgeom.scenario import load_scenario
from .liealg import build_lie_algebra
from .localize import (jk_residue_check, kalkman_sides, su2_boundary_sides, fixed_point_sum,
                       triangle_residue_components, ResidueComponent)
from .weil import (WeilElement, casimir, in_span, invariant_polynomials, random_element, weil_contract,
                   weil_d, weil_lie)

SUITES = ("weil", "cartan", "dcw", "kalkman", "nonabelian", "residue")
CARTAN_SCENARIOS = ("disk_m", "disk_sphere", "sphere_so3", "sphere_su2", "quat_ball")
DCW_SCENARIOS = ("disk_m", "disk_sphere", "quat_ball")


@dataclass
class Check:
    ident: str
    ref: str
    passed: bool
    residual: float | None = None
    lhs: object = None
    rhs: object = None
    tolerance: float = 0.0
    wall: float = 0.0


@dataclass
class Settings:
    seed: int = 0
    quad_order: int = 32
    tolerance_scale: float = 1.0
    n_points: int = 100
    scenarios: dict = field(default_factory=dict)

    def scenario(self, name, **overrides):
        if name in self.scenarios and not overrides:
            return self.scenarios[name]
        return load_scenario(name, **overrides)

    def tol(self, t):
        return t * self.tolerance_scale


class _Recorder:
    def __init__(self, settings):
        self.settings = settings
        self.checks = []

    def residual(self, ident, ref, fn, tol):
        t0 = time.perf_counter()
        value = float(fn())
        tol = self.settings.tol(tol)
        self.checks.append(Check(ident, ref, bool(value <= tol), value, tolerance=tol,
                                 wall=time.perf_counter() - t0))

    def exact(self, ident, ref, fn):
        t0 = time.perf_counter()
        ok = bool(fn())
        self.checks.append(Check(ident, ref, ok, 0.0 if ok else 1.0, wall=time.perf_counter() - t0))

    def pair(self, ident, ref, fn, tol, expected=None):
        t0 = time.perf_counter()
        lhs, rhs = fn()
        tol = self.settings.tol(tol)
        if isinstance(lhs, sympy.Basic) or isinstance(rhs, sympy.Basic):
            ok = sympy.simplify(lhs - rhs) == 0
            if expected is not None:
                ok = ok and sympy.simplify(lhs - expected) == 0
            res = 0.0 if ok else 1.0
        else:
            res = abs(float(lhs) - float(rhs))
            if expected is not None:
                res = max(res, abs(float(lhs) - float(expected)))
            ok = res <= tol
        self.checks.append(Check(ident, ref, bool(ok), res, lhs, rhs, tol, time.perf_counter() - t0))


# ---------------------------------------------------------------------------

def _weil_residual_count(alg, rng, n):
    bad_d2 = bad_h = bad_gc = 0
    for _ in range(n):
        x = random_element(alg, rng)
        if weil_d(weil_d(x)):
            bad_d2 += 1
        for a in range(alg.dim):
            if weil_lie(a, x) != weil_d(weil_contract(a, x)) + weil_contract(a, weil_d(x)):
                bad_h += 1
        p, q = rng.randint(0, 4), rng.randint(0, 4)
        y = random_element(alg, rng, degree=p)
        z = random_element(alg, rng, degree=q)
        if y * z != z * y * (-1) ** (p * q):
            bad_gc += 1
    return bad_d2, bad_h, bad_gc


def suite_weil(st: Settings):
    rec = _Recorder(st)
    rng = random.Random(st.seed)
    for kind in ("u1", "torus2", "su2", "so3"):
        alg = build_lie_algebra(kind)
        counts = {}

        def run(alg=alg, counts=counts):
            counts["v"] = _weil_residual_count(alg, rng, 100)
            return counts["v"][0]
        rec.residual(f"weil.{kind}.d_squared", "d_w d_w = 0", run, 0)
        rec.residual(f"weil.{kind}.homotopy", "L_a = d_w i_a + i_a d_w", lambda c=counts: c["v"][1], 0)
        rec.residual(f"weil.{kind}.graded_commutative", "xy = (-1)^{pq} yx", lambda c=counts: c["v"][2], 0)
    for kind in ("su2", "so3"):
        alg = build_lie_algebra(kind)
        rec.exact(f"weil.{kind}.invariants_q2", "S^2(g*)^G = span(Casimir)",
                  lambda alg=alg: (lambda B: len(B) == 1 and in_span(casimir(alg), B))(invariant_polynomials(alg, 2)))
        rec.exact(f"weil.{kind}.invariants_q1", "S^1(g*)^G = 0", lambda alg=alg: not invariant_polynomials(alg, 1))
        rec.exact(f"weil.{kind}.invariants_q3", "S^3(g*)^G = 0", lambda alg=alg: not invariant_polynomials(alg, 3))
    return rec.checks


def suite_cartan(st: Settings):
    rec = _Recorder(st)
    rng = np.random.default_rng(st.seed)
    for name in CARTAN_SCENARIOS:
        s = st.scenario(name)
        pts = s.sample_points(st.n_points, seed=st.seed)
        forms = [random_invariant(s, rng) for _ in range(20)]
        rec.residual(f"cartan.{name}.invariance", "random test forms are invariant",
                     lambda: max(check_invariance(a, pts) for a in forms[:5]), 1e-9)
        rec.residual(f"cartan.{name}.D_squared", "D D = 0 on invariant forms",
                     lambda: max(cartan_D(cartan_D(a)).max_abs(pts) for a in forms), 1e-10)
        closed = [cartan_D(a) for a in forms[:5]]

        def l25(key, closed=closed, pts=pts):
            return max(coefficient_identity_residuals(a, pts)[key] for a in closed)
        rec.residual(f"cartan.{name}.lie_of_coefficients", "Lie_b a_J = q f^p_{b(j1} a_{|p|j2..)}",
                     lambda: l25("lie"), 1e-9)
        rec.residual(f"cartan.{name}.d_of_coefficients", "d a_J = iota_{(j1} a_{j2..)}",
                     lambda: l25("exterior"), 1e-9)
        rec.residual(f"cartan.{name}.torus_projection", "p D_G = D_T p",
                     lambda: max((project_to_torus(cartan_D(a)) - cartan_D(project_to_torus(a))).max_abs(pts)
                                 for a in forms[:5]), 1e-9)
    for name in ("sphere_so3", "sphere_su2"):
        s = st.scenario(name)
        pts = s.sample_points(st.n_points, seed=st.seed)
        vT = EqForm.on(s, torus=True).from_terms([((e[0],), i, c) for e, i, c in s.eqforms["vT"]])
        rec.residual(f"cartan.{name}.vT_closed", "D_T(v + 2 pi (1 + b x1) u) = 0",
                     lambda vT=vT, pts=pts: cartan_D(vT).max_abs(pts), 1e-10)
    return rec.checks


def _test_polynomial(alg):
    return casimir(alg) if alg.dim > 1 else WeilElement.Theta(alg, 0)


def _random_g_forms(s, rng):
    from .exprgeom.forms import DForm
    out = []
    for _a in range(s.alg.dim):
        comps = {}
        for i, x in enumerate(s.chart.symbols):
            comps[(i,)] = sympy.Rational(int(rng.integers(-4, 5)), 3) + sympy.Rational(int(rng.integers(-3, 4)), 5) * x
        out.append(DForm(s.chart, 1, comps))
    return out


def suite_dcw(st: Settings):
    rec = _Recorder(st)
    rng = np.random.default_rng(st.seed)
    for name in DCW_SCENARIOS:
        s = st.scenario(name)
        pts = s.sample_points(st.n_points, seed=st.seed)
        omega = metric_connection(s)
        curv = degenerate_curvature(omega, s.cutoff)
        F = _test_polynomial(s.alg)
        rec.residual(f"dcw.{name}.curvature_identity", "D Omega_f = [Omega_f, omega_f]",
                     lambda: curvature_identity_residual(curv, pts), 1e-9)
        rec.residual(f"dcw.{name}.polarized_invariance", "q F([Omega_f, omega_f], Omega_f, ...) = 0",
                     lambda: polarized_invariance_residual(casimir(s.alg), curv, pts), 1e-9)
        rec.residual(f"dcw.{name}.polarized_bracket", "q(q-1) F(a, [omega_f, Omega_f], ..) = q F([a, omega_f], ..)",
                     lambda: max(polarized_bracket_residual(casimir(s.alg), curv, _random_g_forms(s, rng), pts)
                                 for _ in range(3)), 1e-9)
        cw = apply_cw_f(casimir(s.alg), curv)
        rec.residual(f"dcw.{name}.cw_closed", "D F(Omega_f) = 0", lambda: cartan_D(cw).max_abs(pts), 1e-9)
        alphas = [random_invariant(s, rng) for _ in range(3)]
        rec.residual(f"dcw.{name}.chain_map", "D r_f = r_f D",
                     lambda: max((cartan_D(r_from_curvature(a, curv)) - r_from_curvature(cartan_D(a), curv)).max_abs(pts)
                                 for a in alphas), 1e-9)
        rec.exact(f"dcw.{name}.zero_cutoff_identity", "r_f = id for f = 0",
                  lambda: all(apply_r_f(a, omega, 0).equals(a) for a in alphas))
        base = EqForm.on(s)
        rec.exact(f"dcw.{name}.cw_is_r_of_polynomial", "CW_f = r_f i^c",
                  lambda: r_from_curvature(base.from_polynomial(F), curv).equals(apply_cw_f(F, curv)))
        collar = s.sample_points(st.n_points, "collar", seed=st.seed)
        curv1 = degenerate_curvature(omega, 1)
        rec.residual(f"dcw.{name}.basic_near_boundary", "r(alpha) is basic where f = 1",
                     lambda: max(horizontality_residual(r_from_curvature(a, curv1), collar) for a in alphas), 1e-9)
        rec.residual(f"dcw.{name}.idempotent_near_boundary", "r(r(alpha)) = r(alpha) where f = 1",
                     lambda: max((r_from_curvature(r_from_curvature(a, curv1), curv1) - r_from_curvature(a, curv1)).max_abs(collar)
                                 for a in alphas), 1e-9)
        omega1 = perturbed_connection(s, omega)
        c0, c1 = curv, degenerate_curvature(omega1, s.cutoff)
        T = transgress_invariant_poly(ConnectionPath(omega, omega1, s.cutoff), F)
        rec.residual(f"dcw.{name}.transgression_connection_path", "D T = F(Omega^1) - F(Omega^0)",
                     lambda: transgression_residual(T, apply_cw_f(F, c1) - apply_cw_f(F, c0), pts, st.quad_order)[0],
                     1e-6)
        d1 = degenerate_curvature(omega, s.cutoff_alt)
        T2 = transgress_invariant_poly(CutoffPath(omega, s.cutoff, s.cutoff_alt), F)
        rec.residual(f"dcw.{name}.transgression_cutoff_path", "D T = F(Omega_{f1}) - F(Omega_{f0})",
                     lambda: transgression_residual(T2, apply_cw_f(F, d1) - apply_cw_f(F, curv), pts, st.quad_order)[0],
                     1e-6)
        if name == "disk_sphere":
            vT = base.from_terms(s.eqforms["vT"])
            Tf = transgress_form(omega, omega1, s.cutoff, vT)
            TD = transgress_form(omega, omega1, s.cutoff, cartan_D(vT))
            rec.residual(f"dcw.{name}.transgression_form", "D T + T D = r^1 - r^0",
                         lambda: transgression_residual(Tf, r_from_curvature(vT, c1) - r_from_curvature(vT, c0),
                                                        pts, st.quad_order, correction=TD)[0], 1e-6)
    return rec.checks


def suite_kalkman(st: Settings):
    rec = _Recorder(st)
    for m in (1, 2, 3):
        s = st.scenario("disk_m", m=m)
        alpha = EqForm.on(s).from_terms(s.eqforms["one"])
        rec.pair(f"kalkman.disk_m{m}.one", "int_{dW} omega r(1) = sum 1 u / eps",
                 lambda s=s, alpha=alpha: (lambda r: (r.lhs, r.rhs))(kalkman_sides(s, alpha, st.quad_order)),
                 1e-6, expected=1.0 / m)
    s = st.scenario("disk_sphere")
    vT = EqForm.on(s).from_terms(s.eqforms["vT"])
    rec.pair("kalkman.disk_sphere.vT", "int_{dW} omega r(v_T) = sum v_T u / eps",
             lambda: (lambda r: (r.lhs, r.rhs))(kalkman_sides(s, vT, st.quad_order)), 1e-5,
             expected=4 * np.pi)
    return rec.checks


def suite_nonabelian(st: Settings):
    rec = _Recorder(st)
    s = st.scenario("quat_ball")
    alpha = EqForm.on(s).from_terms(s.eqforms["one"])
    res = {}

    def sides():
        res["r"] = su2_boundary_sides(s, alpha, st.quad_order)
        return res["r"].lhs, res["r"].rhs
    rec.pair("nonabelian.quat_ball.boundary_formula", "(1/vol) int w1 w2 w3 r(alpha) = -(1/c) sum p(alpha) u^2 / eps",
             sides, 1e-5)
    rec.pair("nonabelian.quat_ball.rewrite", "int w1 w2 w3 r = -(1/a) int w1 dw1 r",
             lambda: (res["r"].extra["rewrite_lhs"], res["r"].extra["rewrite_rhs"]), 1e-5)
    rec.pair("nonabelian.quat_ball.pipeline", "Kalkman sides for beta agree",
             lambda: (res["r"].extra["pipeline_lhs"], res["r"].extra["pipeline_rhs"]), 1e-5)
    return rec.checks


def random_residue_components(rng, n_max=4):
    n = int(rng.integers(2, n_max + 1))
    s_deg = int(rng.integers(0, n + 1))
    comps = []
    for _ in range(int(rng.integers(1, 4))):
        l = int(rng.integers(0, min(2, n) + 1))
        pair = {}
        for a in range(0, min(s_deg, l) + 1):
            for b in range(0, l - a + 1):
                c = l - a - b
                pair[(a, b, c)] = sympy.Rational(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
        mu = sympy.Rational(int(rng.integers(-9, 10)) or 1, int(rng.integers(1, 5)))
        comps.append(ResidueComponent(l, mu, pair, bool(mu > 0)))
    return comps, n, s_deg


def suite_residue(st: Settings):
    rec = _Recorder(st)
    c = sympy.Symbol("c")
    alg = build_lie_algebra("so3")
    for label, radii in (("r111", (1, 1, 1)), ("r2_32_1", (2, sympy.Rational(3, 2), 1))):
        s = st.scenario("triangle_fp", r1=radii[0], r2=radii[1], r3=radii[2])
        oracle = s.oracle["reduced_integral_per_unit"] * c
        rec.pair(f"residue.triangle_{label}.fixed_point_side", "-(b/c) sum_{F+} u^3 p(alpha) / eps",
                 lambda s=s, oracle=oracle: (fixed_point_sum(s.fixed, c, s.alg), oracle), 0)
        rec.pair(f"residue.triangle_{label}.residue_identity", "Res_0 form = triple sum",
                 lambda s=s: jk_residue_check(triangle_residue_components(s, c), 0, 0, s.alg), 0,
                 expected=oracle)
    rng = np.random.default_rng(st.seed)
    data = [random_residue_components(rng) for _ in range(50)]
    rec.exact("residue.synthetic_50", "Res_0 form = triple sum on random data",
              lambda: all(sympy.simplify(x - y) == 0 for x, y in
                          (jk_residue_check(cs, n, sd, alg) for cs, n, sd in data)))
    return rec.checks


SUITE_FUNCS = {
    "weil": suite_weil, "cartan": suite_cartan, "dcw": suite_dcw, "kalkman": suite_kalkman,
    "nonabelian": suite_nonabelian, "residue": suite_residue,
}


def run_suite(name: str, settings: Settings | None = None):
    settings = settings or Settings()
    if name == "all":
        return [c for n in SUITES for c in SUITE_FUNCS[n](settings)]
    if name not in SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return SUITE_FUNCS[name](settings)
