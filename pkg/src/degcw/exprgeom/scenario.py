"""Scenarios: a chart, a group action, an invariant metric, a boundary and
fixed-point data, read from INI-style text with DSL expressions."""
from __future__ import annotations

import configparser
from importlib import resources
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from ..liealg import LieAlgebraSpec, build_lie_algebra
from .dsl import DSLError, coordinate_symbols, parse_scalar_expr
from .forms import (Chart, DForm, VectorField, evaluate_exprs, lie_metric, metric_inner,
                    vf_bracket)


class ScenarioError(ValueError):
    pass


@dataclass
class Region:
    """Parametrized region: a box in parameter space mapped into the chart."""
    chart: Chart
    param_names: tuple
    bounds: tuple            # ((lo, hi), ...) floats
    map_exprs: tuple         # chart coordinates as expressions of the params
    orientation: int = 1
    outward: tuple | None = None

    @property
    def dim(self):
        return len(self.param_names)

    @property
    def param_symbols(self):
        syms = coordinate_symbols(self.param_names)
        return tuple(syms[n] for n in self.param_names)

    def jacobian_exprs(self):
        ps = self.param_symbols
        return [[sympy.diff(m, p) for p in ps] for m in self.map_exprs]

    def _param_chart(self):
        return Chart("params", self.param_names)

    def map_points(self, params):
        pc = self._param_chart()
        return evaluate_exprs(pc, list(self.map_exprs), params)

    def jacobians(self, params):
        pc = self._param_chart()
        flat = [e for row in self.jacobian_exprs() for e in row]
        vals = evaluate_exprs(pc, flat, params)
        return vals.reshape(len(vals), len(self.map_exprs), self.dim)

    def sample_params(self, n, rng):
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return lo + (hi - lo) * rng.random((n, self.dim))

    def sample(self, n, seed=0):
        rng = np.random.default_rng(seed)
        return self.map_points(self.sample_params(n, rng))


@dataclass
class FixedComponent:
    label: str
    weights: tuple                 # integers, nonzero
    mu: Fraction | None = None     # moment value (T-component), constant on the component
    sign: str | None = None        # "plus" / "minus"
    point: tuple | None = None     # chart coordinates (dimension 0)
    region: Region | None = None   # parametrization (positive dimension)
    c1: tuple = ()                 # per weight line: coefficient of the top form, or 0

    @property
    def dim(self):
        return 0 if self.region is None else self.region.dim


@dataclass
class Scenario:
    name: str
    alg: LieAlgebraSpec
    chart: Chart | None
    fields: list = field(default_factory=list)
    metric: list | None = None
    orientation: int = 1
    interior: Region | None = None
    boundary: Region | None = None
    samples: dict = field(default_factory=dict)
    cutoff: object = None
    cutoff_alt: object = None
    free_locus: object = None
    invariant_functions: list = field(default_factory=list)
    perturbation: list | None = None
    eqforms: dict = field(default_factory=dict)
    fixed: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    description: str = ""
    source: str = ""

    @property
    def dim(self):
        return self.chart.dim if self.chart else None

    def sample_points(self, n=100, region="interior", seed=0):
        if region not in self.samples:
            raise ScenarioError(f"scenario {self.name} has no sample region {region!r}")
        return self.samples[region].sample(n, seed)

    def torus_field(self):
        return self.fields[0]


# ---------------------------------------------------------------------------
# parsing

def _split(text, sep=","):
    return [p.strip() for p in text.split(sep) if p.strip()]


def _parse_params(text):
    out = {}
    for item in _split(text):
        if "=" not in item:
            raise ScenarioError(f"bad parameter entry {item!r}; expected name = value")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_scalar_expr(v.strip(), [], {})
    return out


def _expr_list(text, syms, consts, where):
    out = []
    for part in _split(text):
        try:
            out.append(parse_scalar_expr(part, syms, consts))
        except DSLError as exc:
            raise ScenarioError(f"[{where}] {exc}") from exc
    return out


def _region(sec, chart, consts, where, orientation=1):
    pnames = tuple(_split(sec["params"]))
    psyms = coordinate_symbols(pnames)
    bounds = []
    for b in _split(sec["bounds"]):
        lo, hi = b.split(":")
        bounds.append((float(parse_scalar_expr(lo, [], consts)), float(parse_scalar_expr(hi, [], consts))))
    if len(bounds) != len(pnames):
        raise ScenarioError(f"[{where}] needs one bound per parameter")
    maps = tuple(_expr_list(sec["map"], psyms, consts, where))
    if chart is not None and len(maps) != chart.dim:
        raise ScenarioError(f"[{where}] map must give {chart.dim} coordinates")
    reg = Region(chart, pnames, tuple(bounds), maps, orientation)
    if "outward" in sec:
        reg.outward = tuple(_expr_list(sec["outward"], chart.symbol_map, consts, where))
    return reg


def _eqform_terms(sec, chart, alg, consts, where):
    """Lines ``exps : basis : coefficient``; basis is coordinate names or 1."""
    terms = []
    for key, line in sec.items():
        parts = line.split(":")
        if len(parts) != 3:
            raise ScenarioError(f"[{where}] {key}: expected 'exponents : basis : coefficient'")
        exps = tuple(int(e) for e in _split(parts[0]))
        if len(exps) != alg.dim:
            raise ScenarioError(f"[{where}] {key}: need {alg.dim} exponents")
        names = parts[1].split()
        idx = () if names == ["1"] else tuple(chart.coord_names.index(n) if n in chart.coord_names
                                                else _unknown(where, n) for n in names)
        coeff = parse_scalar_expr(parts[2].strip(), chart.symbol_map, consts)
        terms.append((exps, idx, coeff))
    return terms


def _unknown(where, name):
    raise ScenarioError(f"[{where}] unknown coordinate {name!r}")


def _orientation_at_center(reg: Region, chart_orientation: int, outward=None):
    center = np.array([[0.5 * (lo + hi) for lo, hi in reg.bounds]])
    # nudge off symmetric points where a parametrization may degenerate
    center = center + 0.0137 * np.array([[hi - lo for lo, hi in reg.bounds]])
    J = reg.jacobians(center)[0]
    if outward is not None:
        pt = reg.map_points(center)
        n = evaluate_exprs(reg.chart, list(outward), pt)[0]
        J = np.column_stack([n, J])
    if J.shape[0] != J.shape[1]:
        return 1
    d = np.linalg.det(J)
    if abs(d) < 1e-12:
        raise ScenarioError("parametrization degenerate at the orientation probe point")
    return int(np.sign(d)) * chart_orientation


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from exc
    if "scenario" not in cp:
        raise ScenarioError("missing [scenario] section")
    head = cp["scenario"]
    consts = _parse_params(head.get("params", ""))
    for k, v in (overrides or {}).items():
        consts[k] = sympy.nsimplify(v) if not isinstance(v, sympy.Basic) else v
    alg = build_lie_algebra(head["group"].strip())
    coords = _split(head.get("coords", ""))
    chart = Chart(head["name"], tuple(coords)) if coords else None
    orientation = int(head.get("orientation", "1"))
    sc = Scenario(head["name"].strip(), alg, chart, orientation=orientation, params=consts,
                  description=head.get("description", "").strip(), source=text)
    syms = chart.symbol_map if chart else {}

    if chart is not None:
        if "action" not in cp:
            raise ScenarioError("missing [action] section")
        for a in range(alg.dim):
            key = f"V{a + 1}"
            if key not in cp["action"]:
                raise ScenarioError(f"[action] needs {key}")
            comps = _expr_list(cp["action"][key], syms, consts, "action")
            if len(comps) != chart.dim:
                raise ScenarioError(f"[action] {key} must have {chart.dim} components")
            sc.fields.append(VectorField(chart, tuple(comps)))
        msec = cp["metric"] if "metric" in cp else {"diagonal": ", ".join(["1"] * chart.dim)}
        if "diagonal" in msec:
            diag = _expr_list(msec["diagonal"], syms, consts, "metric")
            sc.metric = [[diag[i] if i == j else sympy.S.Zero for j in range(chart.dim)]
                         for i in range(chart.dim)]
        else:
            sc.metric = [_expr_list(msec[f"row{i + 1}"], syms, consts, "metric") for i in range(chart.dim)]
        if "interior" in cp:
            reg = _region(cp["interior"], chart, consts, "interior")
            reg.orientation = _orientation_at_center(reg, orientation)
            sc.interior = reg
        if "boundary" in cp:
            reg = _region(cp["boundary"], chart, consts, "boundary")
            if reg.outward is None:
                raise ScenarioError("[boundary] needs an outward vector")
            reg.orientation = _orientation_at_center(reg, orientation, reg.outward)
            sc.boundary = reg
        for secname in cp.sections():
            if secname == "samples" or secname.startswith("samples."):
                key = "interior" if secname == "samples" else secname.split(".", 1)[1]
                sc.samples[key] = _region(cp[secname], chart, consts, secname)
        if "cutoff" in cp:
            c = cp["cutoff"]
            if "f" in c:
                sc.cutoff = parse_scalar_expr(c["f"], syms, consts)
            if "f_alt" in c:
                sc.cutoff_alt = parse_scalar_expr(c["f_alt"], syms, consts)
            if "free_locus" in c:
                sc.free_locus = parse_scalar_expr(c["free_locus"], syms, consts)
        if "invariants" in cp and "functions" in cp["invariants"]:
            sc.invariant_functions = _expr_list(cp["invariants"]["functions"], syms, consts, "invariants")
        if "perturbation" in cp:
            eta = []
            for a in range(alg.dim):
                key = f"eta{a + 1}"
                if key not in cp["perturbation"]:
                    raise ScenarioError(f"[perturbation] needs {key}")
                comps = _expr_list(cp["perturbation"][key], syms, consts, "perturbation")
                if len(comps) != chart.dim:
                    raise ScenarioError(f"[perturbation] {key} must have {chart.dim} components")
                eta.append(comps)
            sc.perturbation = eta
        for secname in cp.sections():
            if secname.startswith("eqform."):
                sc.eqforms[secname.split(".", 1)[1]] = _eqform_terms(cp[secname], chart, alg, consts, secname)

    for secname in cp.sections():
        if not secname.startswith("fixed."):
            continue
        s = cp[secname]
        weights = tuple(int(parse_scalar_expr(w, [], consts)) for w in _split(s["weights"]))
        fc = FixedComponent(secname.split(".", 1)[1], weights)
        if "mu" in s:
            mu = parse_scalar_expr(s["mu"], [], consts)
            fc.mu = Fraction(int(sympy.Rational(mu).p), int(sympy.Rational(mu).q)) if mu.is_Rational else mu
        if "sign" in s:
            fc.sign = s["sign"].strip()
        elif fc.mu is not None and fc.mu != 0:
            fc.sign = "plus" if fc.mu > 0 else "minus"
        if "point" in s and chart is not None:
            fc.point = tuple(float(parse_scalar_expr(p, [], consts)) for p in _split(s["point"]))
        if "params" in s:
            fc.region = _region(s, chart, consts, secname)
        if "c1" in s:
            psyms = coordinate_symbols(fc.region.param_names) if fc.region else {}
            fc.c1 = tuple(_expr_list(s["c1"], psyms, consts, secname))
        sc.fixed.append(fc)
    if "oracle" in cp:
        sc.oracle = {k: parse_scalar_expr(v, [], consts) for k, v in cp["oracle"].items()}
    return sc


# ---------------------------------------------------------------------------
# validation

def validate_scenario(sc: Scenario, n=100, seed=0) -> dict:
    """Residuals of the scenario invariants at sample points."""
    out = {}
    for fc in sc.fixed:
        if any(w == 0 for w in fc.weights):
            raise ScenarioError(f"fixed component {fc.label} has a zero weight")
    if sc.chart is None:
        return out
    pts = sc.sample_points(n, "interior", seed)
    alg = sc.alg
    m = alg.dim
    worst = 0.0
    for a, b in itertools.combinations(range(m), 2):
        br = vf_bracket(sc.fields[a], sc.fields[b])
        target = [sum((alg.f(a, b, c).to_sympy() * sc.fields[c].comps[i] for c in range(m)), sympy.S.Zero)
                  for i in range(sc.chart.dim)]
        diff = [x - y for x, y in zip(br.comps, target)]
        worst = max(worst, float(np.max(np.abs(evaluate_exprs(sc.chart, diff, pts)), initial=0.0)))
    out["bracket"] = worst
    worst = 0.0
    for V in sc.fields:
        lg = lie_metric(sc.metric, V)
        vals = evaluate_exprs(sc.chart, [e for row in lg for e in row], pts)
        worst = max(worst, float(np.max(np.abs(vals), initial=0.0)))
    out["metric_invariance"] = worst
    if sc.boundary is not None:
        bp = sc.boundary.sample(n, seed)
        gram = [[metric_inner(sc.metric, U, V) for V in sc.fields] for U in sc.fields]
        vals = evaluate_exprs(sc.chart, [e for row in gram for e in row], bp).reshape(len(bp), m, m)
        out["boundary_gram_min_det"] = float(np.min(np.abs(np.linalg.det(vals))))
    return out


# ---------------------------------------------------------------------------
# built-in catalog

CATALOG = ("disk_m", "disk_sphere", "sphere_so3", "sphere_su2", "quat_ball", "triangle_fp")


def catalog_text(name: str) -> str:
    if name not in CATALOG:
        raise ScenarioError(f"unknown scenario {name!r}; known: {', '.join(CATALOG)}")
    return resources.files(__package__).joinpath("catalog", f"{name}.ini").read_text()


_LOADED = {}


def load_scenario(name: str, **overrides) -> Scenario:
    """Catalog scenario by name; keyword arguments override its parameters."""
    key = (name, tuple(sorted((k, str(v)) for k, v in overrides.items())))
    if key not in _LOADED:
        _LOADED[key] = parse_scenario(catalog_text(name), overrides)
    return _LOADED[key]


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
