"""Fixed-point localization: Laurent series in u, equivariant Euler classes and
the two sides of the Kalkman-type formulas."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import sympy

from .cartan import EqForm, _sym, project_to_torus
from .dcw import GValued1Form, curvature_from, degenerate_curvature, metric_connection, r_from_curvature
from .exprgeom.forms import Chart, DForm, evaluate_exprs, exterior_d, wedge
from .exprgeom.quadrature import box_rule, integrate
from .exprgeom.scenario import FixedComponent, Scenario
from .liealg import build_lie_algebra


class LocalizationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# coefficient rings

class MixedForm:
    """Even-degree differential form on a fixed component, degree -> DForm."""

    __slots__ = ("chart", "parts")

    def __init__(self, chart: Chart, parts=None):
        self.chart = chart
        self.parts = {q: w for q, w in (parts or {}).items() if w.comps and q <= chart.dim}

    @classmethod
    def scalar(cls, chart, c):
        return cls(chart, {0: DForm.scalar(chart, _sym(c))})

    def _coerce(self, other):
        return other if isinstance(other, MixedForm) else MixedForm.scalar(self.chart, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.parts)
        for q, w in other.parts.items():
            out[q] = out[q] + w if q in out else w
        return MixedForm(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return MixedForm(self.chart, {q: -w for q, w in self.parts.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MixedForm):
            c = _sym(other)
            return MixedForm(self.chart, {q: w * c for q, w in self.parts.items()})
        out = {}
        for q1, w1 in self.parts.items():
            for q2, w2 in other.parts.items():
                if q1 + q2 > self.chart.dim:
                    continue
                w = wedge(w1, w2)
                out[q1 + q2] = out[q1 + q2] + w if q1 + q2 in out else w
        return MixedForm(self.chart, out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / _sym(c))

    def __bool__(self):
        return bool(self.parts)

    def degree0(self):
        w = self.parts.get(0)
        return w.comps.get((), sympy.S.Zero) if w else sympy.S.Zero

    def is_nilpotent(self):
        return 0 not in self.parts

    def top(self) -> DForm:
        return self.parts.get(self.chart.dim, DForm(self.chart, self.chart.dim))

    def __repr__(self):
        return "MixedForm(" + ", ".join(f"{q}: {w!r}" for q, w in sorted(self.parts.items())) + ")"


class Graded:
    """Formal combination of monomials (a, b, c), a+b+c <= cap; used for the
    residue bookkeeping with eta_a, varpi^b, sigma_c of form degree 2(a+b+c)."""

    __slots__ = ("terms", "cap")

    def __init__(self, terms=None, cap=0):
        self.cap = cap
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0 and sum(k) <= cap}

    def __add__(self, other):
        if not isinstance(other, Graded):
            other = Graded({(0, 0, 0): _sym(other)}, self.cap)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Graded(out, self.cap)

    __radd__ = __add__

    def __neg__(self):
        return Graded({k: -v for k, v in self.terms.items()}, self.cap)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Graded):
            c = _sym(other)
            return Graded({k: v * c for k, v in self.terms.items()}, self.cap)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                out[k] = out.get(k, 0) + v1 * v2
        return Graded(out, min(self.cap, other.cap))

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.terms)

    def degree0(self):
        return self.terms.get((0, 0, 0), sympy.S.Zero)

    def is_nilpotent(self):
        return (0, 0, 0) not in self.terms

    def pair(self, pairings):
        """Integrate: monomial (a, b, c) -> pairings[(a, b, c)], top degree only."""
        return sum((v * _sym(pairings.get(k, 0)) for k, v in self.terms.items() if sum(k) == self.cap),
                   sympy.S.Zero)


def _is_zero(c):
    if isinstance(c, (MixedForm, Graded)):
        return not c
    return c == 0


def _degree0(c):
    return c.degree0() if isinstance(c, (MixedForm, Graded)) else c


def _nilpotent(c):
    return c.is_nilpotent() if isinstance(c, (MixedForm, Graded)) else c == 0


# ---------------------------------------------------------------------------
# Laurent series

class LaurentU:
    """Finite Laurent series sum_k c_k u^k.

    ``hi``: powers above hi are not known (truncated upward series);
    ``lo``: powers below lo are not known (truncated downward series).
    ``None`` means exact on that side.
    """

    __slots__ = ("terms", "hi", "lo")

    def __init__(self, terms=None, hi=None, lo=None):
        self.terms = {int(k): v for k, v in (terms or {}).items() if not _is_zero(v)}
        self.hi = hi
        self.lo = lo
        if hi is not None:
            self.terms = {k: v for k, v in self.terms.items() if k <= hi}
        if lo is not None:
            self.terms = {k: v for k, v in self.terms.items() if k >= lo}

    @classmethod
    def u(cls, k=1, c=1):
        return cls({k: _sym(c) if not isinstance(c, (MixedForm, Graded)) else c})

    @classmethod
    def const(cls, c):
        return cls.u(0, c)

    def _coerce(self, other):
        return other if isinstance(other, LaurentU) else LaurentU.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return LaurentU(out, _min_opt(self.hi, other.hi), _max_opt(self.lo, other.lo))

    __radd__ = __add__

    def __neg__(self):
        return LaurentU({k: -v for k, v in self.terms.items()}, self.hi, self.lo)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentU):
            if isinstance(other, (MixedForm, Graded)):
                other = LaurentU.const(other)
            else:
                c = _sym(other)
                return LaurentU({k: v * c for k, v in self.terms.items()}, self.hi, self.lo)
        if (self.hi is not None and other.lo is not None) or (self.lo is not None and other.hi is not None):
            raise LocalizationError("cannot multiply an upward-truncated series by a downward-truncated one")
        hi = lo = None
        if self.hi is not None or other.hi is not None:
            cands = []
            if self.hi is not None:
                cands.append(self.hi + (other.min_power() if other.terms else 0))
            if other.hi is not None:
                cands.append(other.hi + (self.min_power() if self.terms else 0))
            hi = min(cands)
        if self.lo is not None or other.lo is not None:
            cands = []
            if self.lo is not None:
                cands.append(self.lo + (other.max_power() if other.terms else 0))
            if other.lo is not None:
                cands.append(other.lo + (self.max_power() if self.terms else 0))
            lo = max(cands)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                v = _mul_coeff(v1, v2)
                out[k1 + k2] = out[k1 + k2] + v if k1 + k2 in out else v
        return LaurentU(out, hi, lo)

    def __rmul__(self, other):
        return self * other

    def min_power(self):
        return min(self.terms)

    def max_power(self):
        return max(self.terms)

    def coeff(self, k):
        if (self.hi is not None and k > self.hi) or (self.lo is not None and k < self.lo):
            raise LocalizationError(f"coefficient of u^{k} lies outside the known window")
        return self.terms.get(k, sympy.S.Zero)

    def __eq__(self, other):
        other = self._coerce(other)
        keys = set(self.terms) | set(other.terms)
        hi = _min_opt(self.hi, other.hi)
        lo = _max_opt(self.lo, other.lo)
        for k in keys:
            if (hi is not None and k > hi) or (lo is not None and k < lo):
                continue
            d = self.terms.get(k, 0) - other.terms.get(k, 0)
            if not _is_zero(d if not isinstance(d, sympy.Basic) else sympy.simplify(d)):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({v})*u^{k}" for k, v in sorted(self.terms.items(), reverse=True)) or "0"
        return f"LaurentU({body}{'' if self.hi is None else f', hi={self.hi}'}{'' if self.lo is None else f', lo={self.lo}'})"


def _min_opt(a, b):
    return b if a is None else a if b is None else min(a, b)


def _max_opt(a, b):
    return b if a is None else a if b is None else max(a, b)


def _mul_coeff(a, b):
    if isinstance(a, (MixedForm, Graded)):
        return a * b
    if isinstance(b, (MixedForm, Graded)):
        return b * a
    return a * b


def exp_u(mu, order: int) -> LaurentU:
    """e^{mu u}, exact through u^order."""
    mu = _sym(mu)
    return LaurentU({j: mu ** j / sympy.factorial(j) for j in range(order + 1)}, hi=order)


def laurent_invert(x: LaurentU, max_form_degree: int = 0, order: int = 12) -> LaurentU:
    """1/x for x = c u^k (1 + y), y of lower u-order.

    When every coefficient of y is nilpotent the geometric series stops after
    max_form_degree // 2 steps and the inverse is exact; otherwise it is
    expanded to ``order`` steps and the window is recorded in ``lo``.
    """
    if not x.terms:
        raise LocalizationError("cannot invert zero")
    k = x.max_power()
    c = _degree0(x.terms[k])
    lead = x.terms[k]
    if c == 0 or (isinstance(lead, (MixedForm, Graded)) and not _nilpotent(lead - c)):
        raise LocalizationError("leading coefficient is not a unit")
    cinv = 1 / _sym(c)
    y = LaurentU({j - k: _mul_coeff(v, cinv) for j, v in x.terms.items()}) - 1
    if x.hi is not None:
        y = LaurentU(y.terms, hi=x.hi - k)
    nil = all(_nilpotent(v) for v in y.terms.values())
    steps = max_form_degree // 2 if nil else order
    total = LaurentU.const(1)
    power = LaurentU.const(1)
    for _ in range(steps):
        power = power * (-y)
        if not power.terms:
            break
        total = total + power
    out = total * LaurentU.u(-k, cinv)
    lo = None
    if not nil and power.terms:
        lo = -k - steps
    if x.lo is not None:
        # terms of x below lo are unknown, so the inverse is known to the same relative depth
        lo = _max_opt(lo, -k - (k - x.lo))
    return LaurentU(out.terms, out.hi, lo) if lo is not None else out


def res0(x: LaurentU):
    """Coefficient of 1/u."""
    return x.coeff(-1)


# ---------------------------------------------------------------------------
# Euler classes and restriction to fixed components

def component_chart(fc: FixedComponent) -> Chart:
    if fc.region is None:
        return Chart(f"pt_{fc.label}", ())
    return Chart(f"fc_{fc.label}", fc.region.param_names)


def _c1_form(fc: FixedComponent, j: int, chart: Chart):
    if j >= len(fc.c1) or fc.c1[j] == 0:
        return None
    if chart.dim != 2:
        raise LocalizationError("c1 representatives are supported on two-dimensional components")
    return MixedForm(chart, {2: DForm(chart, 2, {(0, 1): fc.c1[j]})})


def equivariant_euler(fc: FixedComponent) -> LaurentU:
    """prod_j (m_j u + c1(L_j))."""
    if any(w == 0 for w in fc.weights):
        raise LocalizationError(f"component {fc.label} has a zero weight")
    chart = component_chart(fc)
    out = LaurentU.const(MixedForm.scalar(chart, 1)) if chart.dim else LaurentU.const(1)
    for j, w in enumerate(fc.weights):
        c1 = _c1_form(fc, j, chart)
        line = LaurentU.u(1, w) if c1 is None else LaurentU({1: MixedForm.scalar(chart, w), 0: c1})
        out = out * line
    return out


def pullback_to_component(w: DForm, fc: FixedComponent):
    """Symbolic pullback of a chart form to the component (MixedForm or number)."""
    if fc.region is None:
        if w.degree:
            return sympy.S.Zero
        return float(evaluate_exprs(w.chart, [w.comps.get((), 0)], [fc.point])[0, 0])
    reg = fc.region
    chart = component_chart(fc)
    sub = dict(zip(w.chart.symbols, reg.map_exprs))
    psyms = {n: s for n, s in zip(reg.param_names, chart.symbols)}
    jac = reg.jacobian_exprs()
    rename = {sympy.Symbol(n, real=True): psyms[n] for n in reg.param_names}
    out = {}
    if w.degree > chart.dim:
        return MixedForm(chart)
    for J in itertools.combinations(range(chart.dim), w.degree):
        acc = sympy.S.Zero
        for I, c in w.comps.items():
            minor = sympy.Matrix([[jac[i][j] for j in J] for i in I]).det() if I else 1
            acc += c.subs(sub) * minor
        out[J] = sympy.sympify(acc).subs(rename)
    return MixedForm(chart, {w.degree: DForm(chart, w.degree, out)})


def restrict(alpha: EqForm, fc: FixedComponent) -> LaurentU:
    """A torus-model form restricted to a fixed component, as a series in u."""
    if alpha.alg.dim != 1:
        raise LocalizationError("restrict expects a torus-model (u) form")
    out = LaurentU()
    chart = component_chart(fc)
    for (e, q), w in alpha.terms.items():
        c = pullback_to_component(w, fc)
        if chart.dim and not isinstance(c, MixedForm):
            c = MixedForm.scalar(chart, c)
        out = out + LaurentU({e[0]: c})
    return out


def integrate_component(c, fc: FixedComponent, order: int = 32):
    """Integral over the component of the top-degree part of a coefficient."""
    if fc.region is None:
        if isinstance(c, MixedForm):
            c = c.degree0()
        return c
    if not isinstance(c, MixedForm):
        return 0.0
    top = c.top()
    if not top.comps:
        return 0.0
    chart = component_chart(fc)
    nodes, weights = box_rule(fc.region.bounds, order)
    vals = evaluate_exprs(chart, [top.comps[tuple(range(chart.dim))]], nodes)[:, 0]
    return float(np.dot(weights, vals))


def fixed_point_term(alpha_u: LaurentU, fc: FixedComponent, extra_power: int, order: int = 32):
    """integral over P_k of [u^0 coefficient of alpha u^extra / eps]."""
    dim = 0 if fc.region is None else fc.region.dim
    inv = laurent_invert(equivariant_euler(fc), max_form_degree=dim)
    series = alpha_u * LaurentU.u(extra_power) * inv
    return integrate_component(series.coeff(0), fc, order)


# ---------------------------------------------------------------------------
# localization formulas

@dataclass
class Sides:
    lhs: float
    rhs: float
    error: float = 0.0
    extra: dict = field(default_factory=dict)


def torus_connection(omega: GValued1Form) -> GValued1Form:
    return GValued1Form(build_lie_algebra("u1"), omega.fields[:1], omega.chart, omega.comps[:1])


def _top_part(alpha: EqForm, degree: int) -> DForm:
    parts = alpha.form_part()
    return parts.get(degree, DForm(alpha.chart, degree))


def kalkman_sides(s: Scenario, alpha: EqForm, order: int = 32, connection: GValued1Form = None) -> Sides:
    """lhs = int_{dW} omega ^ r(alpha); rhs = sum_k int_{P_k} alpha u / eps(nu_k)."""
    n = s.dim
    if alpha.alg.dim != 1:
        raise LocalizationError("Kalkman's formula needs a circle-equivariant form")
    bad = [d for d in alpha.degrees() if d != n - 2]
    if bad:
        raise LocalizationError(f"alpha must have total degree {n - 2}, found {alpha.degrees()}")
    if not s.fixed:
        raise LocalizationError(f"scenario {s.name} has no fixed-point data")
    omega = connection or metric_connection(s)
    if omega.alg.dim != 1:
        omega = torus_connection(omega)
    base = EqForm(omega.alg, omega.fields, omega.chart)
    curv = curvature_from(base, omega.comps, 1)
    r = r_from_curvature(alpha, curv)
    integrand = wedge(omega.comps[0], _top_part(r, n - 2))
    lhs, err = integrate(s, "boundary", integrand, order)
    rhs = 0.0
    terms = []
    for fc in s.fixed:
        val = float(fixed_point_term(restrict(alpha, fc), fc, 1, order))
        terms.append(val)
        rhs += val
    return Sides(lhs, rhs, err, {"fixed_terms": terms})


def su2_boundary_sides(s: Scenario, alpha: EqForm, order: int = 32) -> Sides:
    """Both sides of the SU(2)/SO(3) boundary formula, plus the reduction through Kalkman's formula."""
    alg = s.alg
    if alg.kind not in ("su2", "so3"):
        raise LocalizationError(f"group must be SU(2) or SO(3), not {alg.kind}")
    n = s.dim
    bad = [d for d in alpha.degrees() if d != n - 4]
    if bad:
        raise LocalizationError(f"alpha must have total degree {n - 4}, found {alpha.degrees()}")
    a_const = float(alg.a_const)
    vol = float(alg.group_volume)
    c_const = float(alg.c_const)
    omega = metric_connection(s)
    base = EqForm(alg, s.fields, s.chart)
    curv1 = degenerate_curvature(omega, 1)
    r = r_from_curvature(alpha, curv1)
    rtop = _top_part(r, n - 4)
    w123 = wedge(wedge(omega.comps[0], omega.comps[1]), omega.comps[2])
    direct, err = integrate(s, "boundary", wedge(w123, rtop), order)
    lhs = direct / vol
    d1 = exterior_d(omega.comps[0])
    rewrite_int, err2 = integrate(s, "boundary", wedge(wedge(omega.comps[0], d1), rtop), order)
    rewrite_value = -rewrite_int / a_const

    p_alpha = project_to_torus(alpha)
    rhs = 0.0
    for fc in s.fixed:
        rhs += float(fixed_point_term(restrict(p_alpha, fc), fc, 2, order))
    rhs *= -1.0 / c_const

    # reduction to the circle: beta = (d(f w1) - (-1 + f) u) ^ p(r_f(r_f(alpha)))
    f = s.cutoff
    curv_f = degenerate_curvature(omega, f)
    rr = project_to_torus(r_from_curvature(r_from_curvature(alpha, curv_f), curv_f))
    tbase = EqForm(build_lie_algebra("u1"), s.fields[:1], s.chart)
    first = tbase.from_dform(exterior_d(omega.comps[0] * f)) + tbase.generator(0) * (1 - f)
    beta = first * rr
    k = kalkman_sides(s, beta, order, torus_connection(omega))
    extra = {
        "rewrite_lhs": direct, "rewrite_rhs": rewrite_value,
        "kalkman_beta_lhs": k.lhs, "kalkman_beta_rhs": k.rhs,
        "pipeline_lhs": -k.lhs / c_const, "pipeline_rhs": -k.rhs / c_const,
    }
    return Sides(lhs, rhs, max(err, err2, k.error) / vol, extra)


def _plus(fc: FixedComponent) -> bool:
    if fc.mu is not None and fc.mu == 0:
        raise LocalizationError(f"moment value vanishes on component {fc.label}")
    if fc.sign is None:
        raise LocalizationError(f"component {fc.label} carries no plus/minus label")
    return fc.sign == "plus"


def fixed_point_sum(fixed, alpha, alg, order: int = 32):
    """-(b/c) sum over F_+ of int [u^0 coefficient of u^3 p(alpha) / eps].

    ``alpha`` is a constant (number or sympy expression) or a callable
    fc -> LaurentU giving p(alpha) restricted to the component.
    """
    b = _sym(alg.b_const)
    c = _sym(alg.c_const)
    total = sympy.S.Zero
    for fc in fixed:
        if not _plus(fc):
            continue
        if callable(alpha):
            a_u = alpha(fc)
        else:
            chart = component_chart(fc)
            a_u = LaurentU.const(MixedForm.scalar(chart, alpha) if chart.dim else _sym(alpha))
        total += fixed_point_term(a_u, fc, 3, order)
    return sympy.simplify(-b / c * total)


# ---------------------------------------------------------------------------
# residue identity

@dataclass
class ResidueComponent:
    """Fixed-component data for the residue identity.

    ``pairings[(a, b, c)]`` is the integral of p(eta)_a varpi^b sigma_c over
    the component (a + b + c = l); ``mu`` the moment value.
    """
    l: int
    mu: object
    pairings: dict
    plus: bool = True


def jk_residue_check(components, n: int, s: int, alg):
    """(residue side, triple-sum side), both exact."""
    b_g = _sym(alg.b_const)
    c_g = _sym(alg.c_const)
    if n < s:
        raise LocalizationError("need deg(eta) = 2s <= 2n")
    res_total = LaurentU()
    triple = sympy.S.Zero
    for comp in components:
        l = comp.l
        for key in comp.pairings:
            a, bb, cc = key
            if a + bb + cc != l or min(key) < 0 or a > s:
                raise LocalizationError(f"pairing {key} is inconsistent with l = {l}, s = {s}")
        if l > n:
            raise LocalizationError(f"component dimension 2l = {2 * l} exceeds 2n = {2 * n}")
        if not comp.plus:
            continue
        cap = l
        eta = LaurentU({s - a: Graded({(a, 0, 0): 1}, cap) for a in range(0, min(s, l) + 1)})
        evp = LaurentU({0: Graded({(0, bb, 0): 1 / sympy.factorial(bb) for bb in range(cap + 1)}, cap)})
        sig = LaurentU({-(n - l + 3) - cc: Graded({(0, 0, cc): 1}, cap) for cc in range(cap + 1)})
        integrand = eta * evp * sig
        integrated = LaurentU({k: v.pair(comp.pairings) for k, v in integrand.terms.items()})
        series = LaurentU.u(2) * exp_u(comp.mu, n + l + 4) * integrated
        res_total = res_total + series
        for (a, bb, cc), p in comp.pairings.items():
            triple += sympy.binomial(n - s, bb) * _sym(p) * _sym(comp.mu) ** (n - s - bb) / sympy.factorial(n - s)
    residue = sympy.simplify(-b_g / c_g * res0(res_total)) if res_total.terms else sympy.S.Zero
    return residue, sympy.simplify(-b_g / c_g * triple)


def triangle_residue_components(s: Scenario, eta_value=1):
    """Residue data for point components: l = 0, pairing eta * sigma_0."""
    comps = []
    for fc in s.fixed:
        sigma0 = sympy.Rational(1, math.prod(fc.weights))
        comps.append(ResidueComponent(0, fc.mu, {(0, 0, 0): _sym(eta_value) * sigma0}, _plus(fc)))
    return comps
