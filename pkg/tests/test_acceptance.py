"""Acceptance criteria 1-11. Each test prints one PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) or through pytest; the
lines are also repeated in the pytest terminal summary.
"""
import time

import pytest
import sympy

from degcw.liealg import build_lie_algebra
from degcw.suites import (Settings, suite_cartan, suite_dcw, suite_kalkman, suite_nonabelian,
                          suite_residue, suite_weil)
from degcw.weil import casimir, in_span, invariant_polynomials

RESULTS = []


def report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def _select(checks, *parts):
    return [c for c in checks if any(p in c.ident for p in parts)]


def _worst(checks):
    return max((c.residual for c in checks if c.residual is not None), default=0.0)


@pytest.fixture(scope="module")
def dcw_run():
    return _timed(suite_dcw, Settings())


def test_criterion_01_weil():
    checks, dt = _timed(suite_weil, Settings())
    sel = _select(checks, "d_squared", "homotopy", "graded_commutative")
    kinds = {c.ident.split(".")[1] for c in sel}
    ok = (len(sel) == 12 and kinds == {"u1", "torus2", "su2", "so3"}
          and all(c.passed and c.residual == 0 for c in sel) and dt < 30)
    report(1, ok, f"{len(sel)} exact identity checks over {sorted(kinds)}, max residual {_worst(sel)}, {dt:.1f}s")


def test_criterion_02_invariant_polynomials():
    t0 = time.perf_counter()
    ok = True
    for kind in ("su2", "so3"):
        alg = build_lie_algebra(kind)
        B2 = invariant_polynomials(alg, 2)
        ok &= len(B2) == 1 and in_span(casimir(alg), B2)
        ok &= len(invariant_polynomials(alg, 1)) == 0 and len(invariant_polynomials(alg, 3)) == 0
    dt = time.perf_counter() - t0
    report(2, ok and dt < 5, f"dims (1, 0, 0) with Casimir membership for su2 and so3, {dt:.2f}s")


@pytest.fixture(scope="module")
def cartan_run():
    return _timed(suite_cartan, Settings())


def test_criterion_03_cartan(cartan_run):
    checks, dt = cartan_run
    d2 = _select(checks, "D_squared")
    l25 = _select(checks, "lie_of_coefficients", "d_of_coefficients")
    proj = _select(checks, "torus_projection")
    ok = (len(d2) == 5 and all(c.residual < 1e-10 for c in d2)
          and len(l25) == 10 and all(c.residual < 1e-9 for c in l25)
          and len(proj) == 5 and all(c.residual < 1e-9 for c in proj)
          and all(c.passed for c in d2 + l25 + proj))
    report(3, ok, f"D^2 max {_worst(d2):.1e}, coefficient identities max {_worst(l25):.1e}, "
                  f"pD = Dp max {_worst(proj):.1e}")


def test_criterion_04_vT_closed(cartan_run):
    checks, _ = cartan_run
    sel = _select(checks, "vT_closed")
    ok = len(sel) == 2 and all(c.residual < 1e-10 for c in sel)
    report(4, ok, f"SO(3) b=1 and SU(2) b=2, max residual {_worst(sel):.1e}")


def test_criterion_05_dcw(dcw_run):
    checks, dt = dcw_run
    names = ("curvature_identity", "polarized_invariance", "polarized_bracket", "cw_closed", "chain_map")
    sel = _select(checks, *names)
    ok = len(sel) == 15 and all(c.passed and c.residual < 1e-9 for c in sel) and dt < 180
    report(5, ok, f"{len(sel)} identities on disk_m, disk_sphere, quat_ball, max {_worst(sel):.1e}, "
                  f"suite {dt:.1f}s")


def test_criterion_06_chain_identity(dcw_run):
    checks, _ = dcw_run
    sel = _select(checks, "zero_cutoff_identity", "cw_is_r_of_polynomial")
    ok = len(sel) == 6 and all(c.passed for c in sel)
    report(6, ok, f"{sum(c.passed for c in sel)}/{len(sel)} exact symbolic equalities")


def test_criterion_07_transgression(dcw_run):
    checks, _ = dcw_run
    sel = _select(checks, "transgression_")
    ok = (len(sel) == 7 and any("quat_ball" in c.ident for c in sel)
          and any("transgression_form" in c.ident for c in sel)
          and all(c.residual < 1e-6 for c in sel))
    report(7, ok, f"{len(sel)} transgression checks, max residual {_worst(sel):.1e}")


def test_criterion_08_kalkman():
    checks, dt = _timed(suite_kalkman, Settings())
    expect = {"kalkman.disk_m1.one": 1.0, "kalkman.disk_m2.one": 0.5, "kalkman.disk_m3.one": 1 / 3}
    ok = dt < 120
    for c in checks:
        if c.ident in expect:
            ok &= abs(c.lhs - expect[c.ident]) < 1e-6 and abs(c.rhs - expect[c.ident]) < 1e-6
        else:
            ok &= abs(c.lhs - 4 * sympy.pi.evalf()) < 1e-5 and abs(c.rhs - 4 * sympy.pi.evalf()) < 1e-5
    pairs = ", ".join(f"{c.ident.split('.')[1]} ({c.lhs:.9f}, {c.rhs:.9f})" for c in checks)
    report(8, ok and len(checks) == 4, f"{pairs}, {dt:.1f}s")


def test_criterion_09_nonabelian():
    checks, _ = _timed(suite_nonabelian, Settings())
    main = _select(checks, "boundary_formula")[0]
    rew = _select(checks, "rewrite")[0]
    ok = abs(main.lhs - main.rhs) < 1e-5 and abs(rew.lhs - rew.rhs) < 1e-5
    report(9, ok, f"quat_ball ({main.lhs:.10f}, {main.rhs:.10f}); rewrite ({rew.lhs:.10f}, {rew.rhs:.10f})")


@pytest.fixture(scope="module")
def residue_run():
    return _timed(suite_residue, Settings())


def test_criterion_10_fixed_point_side(residue_run):
    checks, _ = residue_run
    c = sympy.Symbol("c")
    sel = _select(checks, "fixed_point_side")
    ok = len(sel) == 2 and all(x.passed and sympy.simplify(x.lhs - c) == 0 for x in sel)
    report(10, ok, "radii (1,1,1) and (2,3/2,1): " + ", ".join(str(x.lhs) for x in sel))


def test_criterion_11_residue(residue_run):
    checks, dt = residue_run
    sel = _select(checks, "residue_identity", "synthetic_50")
    ok = len(sel) == 3 and all(x.passed for x in sel) and dt < 30
    report(11, ok, f"triangle data and 50 synthetic datasets equal exactly, {dt:.2f}s")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
