"""Gauss-Legendre integration of forms over parametrized regions, and
averaging of forms over the flow of a periodic vector field."""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .forms import DForm, evaluate_exprs
from .kernels import pullback_coeffs
from .scenario import Region, Scenario, ScenarioError


@lru_cache(maxsize=64)
def gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def box_rule(bounds, order):
    """Tensor-product nodes (N, k) and weights (N,) on a box."""
    x, w = gauss_legendre(order)
    axes, wts = [], []
    for lo, hi in bounds:
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (x + 1.0))
        wts.append(half * w)
    if not axes:
        return np.zeros((1, 0)), np.ones(1)
    nodes = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in np.meshgrid(*wts, indexing="ij")], axis=1), axis=1)
    return nodes, weights


def pulled_back_density(region: Region, form: DForm, params) -> np.ndarray:
    """Coefficient of dparam_1 ^ ... ^ dparam_k of the pullback at params."""
    k = region.dim
    pts = region.map_points(params)
    keys = sorted(form.comps)
    if k == 0:
        return evaluate_exprs(form.chart, [form.comps.get((), 0)], pts)[:, 0]
    coef = evaluate_exprs(form.chart, [form.comps[I] for I in keys], pts)
    jac = region.jacobians(params)
    rows = np.array(keys, dtype=np.int64).reshape(len(keys), k)
    cols = np.arange(k, dtype=np.int64).reshape(1, k)
    return pullback_coeffs(coef, jac, rows, cols)[:, 0]


def integrate_region(region: Region, form: DForm, order: int = 32):
    """(value, error estimate); the estimate compares against a coarser rule."""
    if form.degree != region.dim:
        raise ValueError(f"cannot integrate a {form.degree}-form over a {region.dim}-dimensional region")
    if form.chart != region.chart:
        raise ValueError("form and region live on different charts")
    if not form.comps:
        return 0.0, 0.0

    def run(n):
        nodes, weights = box_rule(region.bounds, n)
        return region.orientation * float(np.dot(weights, pulled_back_density(region, form, nodes)))

    fine = run(order)
    coarse = run(max(2, (2 * order) // 3))
    return fine, abs(fine - coarse)


def integrate(s: Scenario, region, form: DForm, order: int = 32):
    """Integrate over ``"interior"``, ``"boundary"`` or fixed component index k."""
    if isinstance(region, int):
        fc = s.fixed[region]
        if fc.region is None:
            if form.degree != 0:
                raise ValueError("only 0-forms can be integrated over a point")
            return float(evaluate_exprs(form.chart, [form.comps.get((), 0)], [fc.point])[0, 0]), 0.0
        reg = fc.region
    elif region == "interior":
        reg = s.interior
    elif region == "boundary":
        reg = s.boundary
    else:
        raise ScenarioError(f"unknown region {region!r}")
    if reg is None:
        raise ScenarioError(f"scenario {s.name} has no {region} region")
    return integrate_region(reg, form, order)


# ---------------------------------------------------------------------------
# flows and circle averages

def _flow(field, x0, times, rtol=1e-12, atol=1e-13):
    """Positions and Jacobians of the time-t flow, for each start point."""
    chart = field.chart
    n = chart.dim
    comps = list(field.comps)
    jac_exprs = [c.diff(x) for c in comps for x in chart.symbols]

    def rhs(_t, y):
        x = y[:n]
        J = y[n:].reshape(n, n)
        v = evaluate_exprs(chart, comps, x[None, :])[0]
        DV = evaluate_exprs(chart, jac_exprs, x[None, :])[0].reshape(n, n)
        return np.concatenate([v, (DV @ J).ravel()])

    pos = np.empty((len(x0), len(times), n))
    jac = np.empty((len(x0), len(times), n, n))
    for i, x in enumerate(np.asarray(x0, dtype=float)):
        y0 = np.concatenate([x, np.eye(n).ravel()])
        sol = solve_ivp(rhs, (0.0, float(times[-1]) if len(times) else 0.0), y0, t_eval=times,
                        rtol=rtol, atol=atol, method="DOP853")
        if not sol.success:
            raise ScenarioError(f"flow integration failed from {x}: {sol.message}")
        pos[i] = sol.y[:n].T
        jac[i] = sol.y[n:].T.reshape(len(times), n, n)
    return pos, jac


def pullback_along_flow(field, form: DForm, points, t):
    """Components (npts, ncomb) of (phi_t)^* form at the given points."""
    chart = form.chart
    q = form.degree
    combos = list(itertools.combinations(range(chart.dim), q))
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if t == 0:
        return evaluate_exprs(chart, [form.comps.get(J, 0) for J in combos], pts)
    pos, jac = _flow(field, pts, np.array([0.0, t]))
    keys = sorted(form.comps) or [combos[0]]
    coef = evaluate_exprs(chart, [form.comps.get(I, 0) for I in keys], pos[:, 1])
    return pullback_coeffs(coef, jac[:, 1], np.array(keys).reshape(len(keys), q),
                           np.array(combos).reshape(len(combos), q))


def average_over_circle(s: Scenario, form: DForm, direction: int = 0, tol: float = 1e-9,
                        max_nodes: int = 256):
    """Sampler x -> components of (1/N) sum_i (phi_{i/N})^* form, N doubled until stable.

    The flow of the fundamental field ``direction`` is assumed 1-periodic.
    """
    field = s.fields[direction]
    chart = form.chart
    q = form.degree
    combos = list(itertools.combinations(range(chart.dim), q))
    keys = sorted(form.comps) or [combos[0]]

    def sampler(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cache = {}

        def mean(N):
            times = np.arange(N) / N
            missing = [t for t in times if t not in cache]
            if missing:
                grid = np.array(sorted(set(missing) | {0.0}))
                pos, jac = _flow(field, pts, grid)
                for j, t in enumerate(grid):
                    coef = evaluate_exprs(chart, [form.comps.get(I, 0) for I in keys], pos[:, j])
                    cache[t] = pullback_coeffs(coef, jac[:, j], np.array(keys).reshape(len(keys), q),
                                               np.array(combos).reshape(len(combos), q))
            return sum(cache[t] for t in times) / N

        N = 4
        prev = mean(N)
        while N < max_nodes:
            N *= 2
            cur = mean(N)
            if np.max(np.abs(cur - prev), initial=0.0) < tol:
                return cur
            prev = cur
        return prev

    return sampler
