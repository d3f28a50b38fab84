"""Cartan model: equivariant forms as Theta-polynomials with form coefficients."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import sympy

from .exprgeom.forms import DForm, contract_vf, evaluate_exprs, exterior_d, lie_vf, metric_flat, metric_inner, wedge
from .exprgeom.quadrature import average_over_circle
from .liealg import LieAlgebraSpec, build_lie_algebra
from .weil import WeilElement


def _sym(c):
    """Coerce PiPoly, Fraction and ints to sympy."""
    if hasattr(c, "to_sympy"):
        return c.to_sympy()
    if isinstance(c, Fraction):
        return sympy.Rational(c.numerator, c.denominator)
    return sympy.sympify(c)


class EqForm:
    """sum over (exps, q) of Theta^exps * (q-form).

    ``fields`` are the fundamental vector fields, one per basis element of
    ``alg``; the torus model uses ``u1`` with the single field V_1.
    """

    __slots__ = ("alg", "fields", "chart", "terms")

    def __init__(self, alg: LieAlgebraSpec, fields, chart, terms=None):
        self.alg = alg
        self.fields = tuple(fields)
        self.chart = chart
        self.terms = {}
        for (e, q), w in (terms or {}).items():
            if w.comps:
                self.terms[(tuple(e), q)] = w

    # construction -----------------------------------------------------
    def _new(self, terms):
        return EqForm(self.alg, self.fields, self.chart, terms)

    @classmethod
    def on(cls, s, torus=False):
        if torus:
            return cls(build_lie_algebra("u1"), s.fields[:1], s.chart)
        return cls(s.alg, s.fields, s.chart)

    def zero(self):
        return self._new({})

    def const(self, c):
        return self.from_dform(DForm.scalar(self.chart, _sym(c)))

    def from_dform(self, w: DForm, exps=None):
        exps = tuple(exps) if exps is not None else (0,) * self.alg.dim
        return self._new({(exps, w.degree): w})

    def theta(self, exps, coeff=1):
        return self.from_dform(DForm.scalar(self.chart, _sym(coeff)), exps)

    def generator(self, a):
        e = [0] * self.alg.dim
        e[a] = 1
        return self.theta(e)

    def from_terms(self, spec):
        """From (exps, coordinate index tuple, coefficient) triples."""
        out = self.zero()
        for exps, idx, coeff in spec:
            w = DForm.scalar(self.chart, 1)
            for i in idx:
                w = wedge(w, DForm.coord_differential(self.chart, i))
            out = out + self.from_dform(w * coeff, exps)
        return out

    def from_polynomial(self, F: WeilElement):
        """i^c: an element of S(g*) as an equivariant form with constant coefficients."""
        if not F.is_polynomial():
            raise ValueError("only Theta-polynomials embed into the Cartan model")
        out = self.zero()
        for (_th, exps), c in F.terms.items():
            out = out + self.theta(exps, c)
        return out

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, EqForm):
            other = self.const(other)
        out = dict(self.terms)
        for k, w in other.terms.items():
            out[k] = out[k] + w if k in out else w
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -w for k, w in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DForm):
            other = self.from_dform(other)
        if not isinstance(other, EqForm):
            c = _sym(other)
            return self._new({k: w * c for k, w in self.terms.items()})
        out = {}
        for (e1, q1), w1 in self.terms.items():
            for (e2, q2), w2 in other.terms.items():
                if q1 + q2 > self.chart.dim:
                    continue
                k = (tuple(a + b for a, b in zip(e1, e2)), q1 + q2)
                w = wedge(w1, w2)
                out[k] = out[k] + w if k in out else w
        return self._new(out)

    def __rmul__(self, other):
        if isinstance(other, DForm):
            return self.from_dform(other) * self
        return self * other

    def __pow__(self, n):
        out = self.const(1)
        for _ in range(n):
            out = out * self
        return out

    def map_forms(self, fn):
        out = {}
        for k, w in self.terms.items():
            w2 = fn(w)
            key = (k[0], w2.degree)
            out[key] = out[key] + w2 if key in out else w2
        return self._new(out)

    def subs(self, *args, **kw):
        return self.map_forms(lambda w: w.subs(*args, **kw))

    # structure ----------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def degrees(self):
        return sorted({2 * sum(e) + q for e, q in self.terms})

    def homogeneous_part(self, d):
        return self._new({k: w for k, w in self.terms.items() if 2 * sum(k[0]) + k[1] == d})

    def theta_part(self, exps):
        """Form coefficient (mixed degree allowed) of Theta^exps, as a dict q -> DForm."""
        return {q: w for (e, q), w in self.terms.items() if e == tuple(exps)}

    def form_part(self):
        return self.theta_part((0,) * self.alg.dim)

    def expand(self):
        return self.map_forms(lambda w: w.expand())

    def equals(self, other) -> bool:
        """Exact symbolic equality (after expansion and simplification)."""
        diff = self - other
        for w in diff.terms.values():
            for c in w.comps.values():
                if sympy.simplify(sympy.expand(c)) != 0:
                    return False
        return True

    # evaluation ---------------------------------------------------------
    def component_list(self):
        keys, exprs = [], []
        for (e, q), w in sorted(self.terms.items()):
            for I, c in sorted(w.comps.items()):
                keys.append((e, I))
                exprs.append(c)
        return keys, exprs

    def evaluate(self, points):
        keys, exprs = self.component_list()
        vals = evaluate_exprs(self.chart, exprs, points)
        return keys, vals

    def max_abs(self, points) -> float:
        _, vals = self.evaluate(points)
        if vals.size == 0:
            return 0.0
        return float(np.max(np.abs(vals)))

    def __repr__(self):
        parts = []
        for (e, q), w in sorted(self.terms.items()):
            mono = "*".join(f"T{a + 1}^{k}" if k > 1 else f"T{a + 1}" for a, k in enumerate(e) if k)
            parts.append((mono + "*" if mono else "") + f"[{w!r}]")
        return " + ".join(parts) or "0"


# ---------------------------------------------------------------------------
# operators

def contract(a: int, alpha: EqForm) -> EqForm:
    """1 (x) iota_{V_a}."""
    return alpha.map_forms(lambda w: contract_vf(alpha.fields[a], w))


def cartan_D(alpha: EqForm) -> EqForm:
    """D = 1 (x) d - Theta^a (x) iota_{V_a}."""
    out = alpha.map_forms(exterior_d)
    for a in range(alpha.alg.dim):
        ia = contract(a, alpha)
        if ia.terms:
            out = out - alpha.generator(a) * ia
    return out


def lie_algebraic(b: int, alpha: EqForm) -> EqForm:
    """L_b on the Theta-part: L_b Theta^c = -f^c_{bd} Theta^d."""
    alg = alpha.alg
    m = alg.dim
    out = {}
    for (e, q), w in alpha.terms.items():
        for c in range(m):
            if not e[c]:
                continue
            for d in range(m):
                fc = alg.f(b, d, c)
                if fc == 0:
                    continue
                e2 = list(e)
                e2[c] -= 1
                e2[d] += 1
                k = (tuple(e2), q)
                term = w * (-e[c] * _sym(fc))
                out[k] = out[k] + term if k in out else term
    return alpha._new(out)


def lie_geometric(b: int, alpha: EqForm) -> EqForm:
    return alpha.map_forms(lambda w: lie_vf(alpha.fields[b], w))


def lie_total(b: int, alpha: EqForm) -> EqForm:
    return lie_algebraic(b, alpha) + lie_geometric(b, alpha)


def check_invariance(alpha: EqForm, points) -> float:
    """max over b and points of |L_b^alg alpha + Lie_{V_b} alpha|."""
    return max((lie_total(b, alpha).max_abs(points) for b in range(alpha.alg.dim)), default=0.0)


def project_to_torus(alpha: EqForm) -> EqForm:
    """p: drop Theta^2.., rename Theta^1 -> u.

    On G-invariant input the circle average is the identity, so only the
    algebraic projection acts; ``torus_average_residual`` confirms this.
    """
    u1 = build_lie_algebra("u1")
    out = {}
    for (e, q), w in alpha.terms.items():
        if any(e[1:]):
            continue
        k = ((e[0],), q)
        out[k] = out[k] + w if k in out else w
    return EqForm(u1, alpha.fields[:1], alpha.chart, out)


def torus_average_residual(s, alpha: EqForm, points, tol=1e-10) -> float:
    """Largest change of a coefficient of p_1(alpha) under averaging over the circle flow."""
    worst = 0.0
    for w in project_to_torus(alpha).terms.values():
        avg = average_over_circle(s, w, 0, tol)(points)
        combos = list(itertools.combinations(range(w.chart.dim), w.degree))
        direct = evaluate_exprs(w.chart, [w.comps.get(J, 0) for J in combos], points)
        worst = max(worst, float(np.max(np.abs(avg - direct), initial=0.0)))
    return worst


# ---------------------------------------------------------------------------
# symmetric coefficients and the identities they satisfy

def _multisets(m, q):
    return list(itertools.combinations_with_replacement(range(m), q))


def symmetric_coefficients(alpha: EqForm) -> dict:
    """(J nondecreasing, form degree) -> alpha_J with alpha = Theta^I alpha_I over ordered I."""
    out = {}
    for (e, q), w in alpha.terms.items():
        J = tuple(i for i, k in enumerate(e) for _ in range(k))
        scale = sympy.Rational(math.prod(math.factorial(k) for k in e), math.factorial(len(J)))
        out[(J, q)] = w * scale
    return out


def _coef(sym, J, q, chart):
    return sym.get((tuple(sorted(J)), q), DForm(chart, q))


def coefficient_identity_residuals(alpha: EqForm, points) -> dict:
    """Residuals of Lie_b a_J = sum_i f^p_{b j_i} a_{J, j_i -> p} and
    d a_J = (1/q) sum_i iota_{j_i} a_{J minus j_i} for invariant D-closed alpha."""
    alg, chart = alpha.alg, alpha.chart
    m = alg.dim
    sym = symmetric_coefficients(alpha)
    qmax = max((len(J) for J, _ in sym), default=0)
    degs = sorted({q for _, q in sym})
    r4 = r5 = 0.0
    exprs4, exprs5 = [], []
    for qlen in range(qmax + 2):
        for J in _multisets(m, qlen):
            for q in degs:
                if qlen <= qmax:
                    for b in range(m):
                        lhs = lie_vf(alpha.fields[b], _coef(sym, J, q, chart))
                        rhs = DForm(chart, q)
                        for i in range(qlen):
                            for p in range(m):
                                fc = alg.f(b, J[i], p)
                                if fc != 0:
                                    J2 = J[:i] + (p,) + J[i + 1:]
                                    rhs = rhs + _coef(sym, J2, q, chart) * _sym(fc)
                        exprs4.extend((lhs - rhs).comps.values())
            for q in set(degs) | {d + 1 for d in degs}:
                lhs = exterior_d(_coef(sym, J, q - 1, chart)) if q >= 1 else DForm(chart, 0)
                rhs = DForm(chart, q)
                for i in range(qlen):
                    rest = J[:i] + J[i + 1:]
                    rhs = rhs + contract_vf(alpha.fields[J[i]], _coef(sym, rest, q + 1, chart)) * sympy.Rational(1, qlen)
                exprs5.extend((lhs - rhs).comps.values())
    if exprs4:
        r4 = float(np.max(np.abs(evaluate_exprs(chart, exprs4, points))))
    if exprs5:
        r5 = float(np.max(np.abs(evaluate_exprs(chart, exprs5, points))))
    return {"lie": r4, "exterior": r5}


# ---------------------------------------------------------------------------
# invariant test forms

def invariant_generators(s) -> list:
    """Equivariant forms invariant by construction: 1, invariant functions and
    their differentials, Theta^a g(V_a, .), Theta^a Theta^b g(V_a, V_b), the Casimir."""
    base = EqForm.on(s)
    m = s.alg.dim
    # normalize by the size of the fundamental fields so test forms stay O(1)
    pts = s.sample_points(50)
    kappa = max(float(np.max(np.linalg.norm(V.evaluate(pts), axis=1))) for V in s.fields)
    inv_k = sympy.Rational(1, max(1, math.ceil(kappa)))
    gens = [base.const(1)]
    for h in s.invariant_functions:
        gens.append(base.from_dform(DForm.scalar(s.chart, h)))
        gens.append(base.from_dform(exterior_d(DForm.scalar(s.chart, h))))
    phi = base.zero()
    quad = base.zero()
    cas = base.zero()
    for a in range(m):
        phi = phi + base.generator(a) * (metric_flat(s.metric, s.fields[a]) * inv_k)
        cas = cas + base.generator(a) * base.generator(a)
        for b in range(m):
            quad = quad + base.generator(a) * base.generator(b) * DForm.scalar(
                s.chart, metric_inner(s.metric, s.fields[a], s.fields[b]) * inv_k ** 2)
    gens += [phi, phi.map_forms(exterior_d), quad, cas]
    return gens


def random_invariant(s, rng, n_terms=3, max_factors=2, max_degree=None) -> EqForm:
    gens = invariant_generators(s)
    base = EqForm.on(s)
    out = base.zero()
    for _ in range(n_terms):
        term = base.const(sympy.Rational(int(rng.integers(-5, 6)) or 1, int(rng.integers(1, 4))))
        for _ in range(int(rng.integers(1, max_factors + 1))):
            term = term * gens[int(rng.integers(len(gens)))]
        if max_degree is not None:
            term = sum((term.homogeneous_part(d) for d in term.degrees() if d <= max_degree), base.zero())
        out = out + term
    return out


def random_closed_invariant(s, rng, **kw) -> EqForm:
    return cartan_D(random_invariant(s, rng, **kw))
