"""Degenerate connections, their equivariant curvature, the chain map r_f
and the two transgression operators."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import sympy

from .cartan import EqForm, _sym, cartan_D, contract
from .exprgeom.forms import DForm, contract_vf, evaluate_exprs, exterior_d, lie_vf, metric_flat, metric_inner, wedge
from .exprgeom.quadrature import gauss_legendre
from .weil import WeilElement, symmetric_tensor, weil_lie

T_PATH = sympy.Symbol("_tpath", real=True)


class SingularGramError(ValueError):
    pass


class NotInvariantError(ValueError):
    pass


# ---------------------------------------------------------------------------
# connections

@dataclass
class GValued1Form:
    """omega = omega^a xi_a; ``gram`` is the Gram matrix of the fundamental fields."""
    alg: object
    fields: tuple
    chart: object
    comps: list
    gram: object = None

    def evaluate(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.gram is not None:
            m = self.alg.dim
            H = evaluate_exprs(self.chart, list(self.gram), pts).reshape(len(pts), m, m)
            dets = np.linalg.det(H)
            scale = np.max(np.abs(H), axis=(1, 2)) ** m
            for p, d, sc in zip(pts, dets, scale):
                if abs(d) <= 1e-12 * max(sc, 1.0):
                    raise SingularGramError(f"Gram matrix of the fundamental fields is singular at {tuple(p)}")
        exprs = [w.comps.get((i,), 0) for w in self.comps for i in range(self.chart.dim)]
        return evaluate_exprs(self.chart, exprs, pts).reshape(len(pts), len(self.comps), self.chart.dim)

    def __add__(self, other):
        return GValued1Form(self.alg, self.fields, self.chart,
                            [a + b for a, b in zip(self.comps, other.comps)], self.gram)

    def scaled(self, f):
        return GValued1Form(self.alg, self.fields, self.chart, [w * f for w in self.comps], self.gram)


def metric_connection(s) -> GValued1Form:
    """omega^a = (H^{-1})^{ab} g(V_b, .), H_ab = g(V_a, V_b)."""
    m = s.alg.dim
    H = sympy.Matrix(m, m, lambda a, b: sympy.expand(metric_inner(s.metric, s.fields[a], s.fields[b])))
    if H.det() == 0:
        raise SingularGramError(f"fundamental fields of {s.name} are linearly dependent everywhere")
    Hinv = H.inv().applyfunc(sympy.cancel) if m > 1 else sympy.Matrix([[1 / H[0, 0]]])
    flats = [metric_flat(s.metric, V) for V in s.fields]
    comps = []
    for a in range(m):
        w = DForm(s.chart, 1)
        for b in range(m):
            if Hinv[a, b] != 0:
                w = w + flats[b] * Hinv[a, b]
        comps.append(w)
    return GValued1Form(s.alg, tuple(s.fields), s.chart, comps, tuple(H))


def perturbed_connection(s, omega: GValued1Form, scale=1) -> GValued1Form:
    """omega + scale * eta, eta the scenario's horizontal equivariant 1-forms."""
    if s.perturbation is None:
        raise ValueError(f"scenario {s.name} declares no connection perturbation")
    eta = [DForm(s.chart, 1, {(i,): c * _sym(scale) for i, c in enumerate(row)}) for row in s.perturbation]
    return GValued1Form(omega.alg, omega.fields, omega.chart, [w + e for w, e in zip(omega.comps, eta)],
                        omega.gram)


def connection_residuals(omega: GValued1Form, points) -> dict:
    """iota_{V_a} omega^b - delta_ab and Lie_{V_b} omega^a + f^a_{bc} omega^c at points."""
    alg, chart = omega.alg, omega.chart
    m = alg.dim
    omega.evaluate(points)
    vert, equi = [], []
    for a in range(m):
        for b in range(m):
            vert.append(contract_vf(omega.fields[a], omega.comps[b]).comps.get((), 0) - (1 if a == b else 0))
    for b in range(m):
        for a in range(m):
            w = lie_vf(omega.fields[b], omega.comps[a])
            for c in range(m):
                fc = alg.f(b, c, a)
                if fc != 0:
                    w = w + omega.comps[c] * _sym(fc)
            equi.extend(w.comps.values())
    r1 = float(np.max(np.abs(evaluate_exprs(chart, vert, points)), initial=0.0))
    r2 = float(np.max(np.abs(evaluate_exprs(chart, equi, points)), initial=0.0)) if equi else 0.0
    return {"vertical": r1, "equivariant": r2}


# ---------------------------------------------------------------------------
# curvature

@dataclass
class GValuedEqCurv:
    comps: list          # EqForm per basis element
    omega_f: list        # DForm per basis element
    f: object


def _bracket_forms(alg, A, B):
    """[A, B]^a = f^a_{bc} A^b ^ B^c for lists of DForm/EqForm."""
    m = alg.dim
    out = []
    for a in range(m):
        acc = None
        for b in range(m):
            for c in range(m):
                fc = alg.f(b, c, a)
                if fc == 0:
                    continue
                term = (A[b] * B[c]) * _sym(fc) if isinstance(A[b], EqForm) else \
                    _wedge_any(A[b], B[c]) * _sym(fc)
                acc = term if acc is None else acc + term
        out.append(acc)
    return out


def _wedge_any(x, y):
    if isinstance(x, DForm) and isinstance(y, DForm):
        return wedge(x, y)
    if isinstance(x, DForm):
        return y.from_dform(x) * y
    return x * y


def curvature_from(base: EqForm, omega_f: list, f) -> GValuedEqCurv:
    """Omega^a = d omega_f^a + 1/2 [omega_f, omega_f]^a + (1 - f) Theta^a."""
    alg = base.alg
    m = alg.dim
    brk = _bracket_forms(alg, omega_f, omega_f)
    comps = []
    for a in range(m):
        form = exterior_d(omega_f[a])
        if brk[a] is not None:
            form = form + brk[a] * sympy.Rational(1, 2)
        comps.append(base.from_dform(form) + base.generator(a) * (1 - _sym(f)))
    return GValuedEqCurv(comps, omega_f, f)


def degenerate_curvature(omega: GValued1Form, f) -> GValuedEqCurv:
    f = _sym(f)
    base = EqForm(omega.alg, omega.fields, omega.chart)
    return curvature_from(base, [w * f for w in omega.comps], f)


def curvature_identity_residual(curv: GValuedEqCurv, points) -> float:
    """D Omega_f - [Omega_f, omega_f]."""
    alg = curv.comps[0].alg
    brk = _bracket_forms(alg, curv.comps, curv.omega_f)
    worst = 0.0
    for a in range(alg.dim):
        diff = cartan_D(curv.comps[a])
        if brk[a] is not None:
            diff = diff - brk[a]
        worst = max(worst, diff.max_abs(points))
    return worst


# ---------------------------------------------------------------------------
# substitution of curvature into polynomials

def _check_invariant_polynomial(F: WeilElement):
    if not F.is_polynomial():
        raise NotInvariantError("F must be a polynomial in Theta (no theta factors)")
    for b in range(F.alg.dim):
        if weil_lie(b, F):
            raise NotInvariantError(f"F is not invariant: L_{b + 1} F = {weil_lie(b, F)}")


class _PowerCache:
    def __init__(self, comps):
        self.comps = comps
        self.base = comps[0]
        self.cache = {}

    def monomial(self, exps):
        exps = tuple(exps)
        if exps not in self.cache:
            if not any(exps):
                self.cache[exps] = self.base.const(1)
            else:
                a = max(i for i, e in enumerate(exps) if e)
                lower = list(exps)
                lower[a] -= 1
                self.cache[exps] = self.monomial(lower) * self.comps[a]
        return self.cache[exps]


def substitute(F: WeilElement, curv: GValuedEqCurv) -> EqForm:
    pc = _PowerCache(curv.comps)
    out = curv.comps[0].zero()
    for (_th, exps), c in F.terms.items():
        out = out + pc.monomial(exps) * _sym(c)
    return out


def apply_cw_f(F: WeilElement, curv: GValuedEqCurv) -> EqForm:
    """CW_f(F) = F(Omega_f^G)."""
    _check_invariant_polynomial(F)
    return substitute(F, curv)


def polarized(F: WeilElement, args) -> EqForm:
    """F(X_1, ..., X_q) = a_I X_1^{i_1} ... X_q^{i_q} with a_I symmetric."""
    a = symmetric_tensor(F)
    out = None
    for I, c in a.items():
        term = None
        for X, i in zip(args, I):
            term = X[i] if term is None else _wedge_any(term, X[i])
        term = term * _sym(c)
        out = term if out is None else out + term
    return out


def polarized_invariance_residual(F: WeilElement, curv: GValuedEqCurv, points) -> float:
    """q F([Omega, omega_f], Omega, ..., Omega)."""
    q = max(sum(e) for _, e in F.terms)
    alg = curv.comps[0].alg
    brk = _bracket_forms(alg, curv.comps, curv.omega_f)
    brk = [b if b is not None else curv.comps[0].zero() for b in brk]
    val = polarized(F, [brk] + [curv.comps] * (q - 1)) * q
    return val.max_abs(points)


def polarized_bracket_residual(F: WeilElement, curv: GValuedEqCurv, alpha: list, points) -> float:
    """q(q-1) F(alpha, [omega_f, Omega], Omega, ...) - q F([alpha, omega_f], Omega, ...)
    for a g-valued 1-form alpha (list of DForm)."""
    q = max(sum(e) for _, e in F.terms)
    alg = curv.comps[0].alg
    base = curv.comps[0]
    zero = base.zero()
    w_om = _bracket_forms(alg, [base.from_dform(w) for w in curv.omega_f], curv.comps)
    w_om = [b if b is not None else zero for b in w_om]
    a_w = _bracket_forms(alg, [base.from_dform(w) for w in alpha], [base.from_dform(w) for w in curv.omega_f])
    a_w = [b if b is not None else zero for b in a_w]
    A = [base.from_dform(w) for w in alpha]
    lhs = polarized(F, [A, w_om] + [curv.comps] * (q - 2)) * (q * (q - 1))
    rhs = polarized(F, [a_w] + [curv.comps] * (q - 1)) * q
    return (lhs - rhs).max_abs(points)


# ---------------------------------------------------------------------------
# the chain map r_f

def _iterated_contract(fields, A, w: DForm) -> DForm:
    """iota_{a_1} ... iota_{a_j} w, with iota_{a_j} applied first."""
    for a in reversed(A):
        if not w.comps:
            break
        w = contract_vf(fields[a], w)
    return w


def _omega_wedge(omega_f, A, chart):
    w = DForm.scalar(chart, 1)
    for a in A:
        w = wedge(w, omega_f[a])
    return w


def r_from_curvature(alpha: EqForm, curv: GValuedEqCurv) -> EqForm:
    """sum_j (-1)^{j(j+1)/2} sum_{a_1<..<a_j} omega_f^A ^ Omega^I ^ iota_A alpha_I."""
    m = alpha.alg.dim
    pc = _PowerCache(curv.comps)
    out = alpha.zero()
    for j in range(m + 1):
        sign = -1 if (j * (j + 1) // 2) % 2 else 1
        for A in itertools.combinations(range(m), j):
            wA = _omega_wedge(curv.omega_f, A, alpha.chart)
            if not wA.comps:
                continue
            for (e, _q), w in alpha.terms.items():
                iw = _iterated_contract(alpha.fields, A, w)
                if not iw.comps:
                    continue
                piece = wedge(wA, iw)
                if not piece.comps and piece.degree <= alpha.chart.dim:
                    continue
                out = out + pc.monomial(e) * (piece * sign)
    return out


def apply_r_f(alpha: EqForm, omega: GValued1Form, f) -> EqForm:
    return r_from_curvature(alpha, degenerate_curvature(omega, f))


def horizontality_residual(beta: EqForm, points) -> float:
    """Largest contraction by a fundamental field, together with any Theta-part."""
    worst = 0.0
    for a in range(beta.alg.dim):
        worst = max(worst, contract(a, beta).max_abs(points))
    theta_free = (0,) * beta.alg.dim
    rest = beta._new({k: w for k, w in beta.terms.items() if k[0] != theta_free})
    return max(worst, rest.max_abs(points))


# ---------------------------------------------------------------------------
# transgression

class TransgressionForm:
    """A form integral_0^1 beta(t) dt, kept as the t-dependent integrand."""

    def __init__(self, integrand: EqForm):
        self.integrand = integrand

    def D(self) -> "TransgressionForm":
        return TransgressionForm(cartan_D(self.integrand))

    def evaluate(self, points, order=32):
        """dict (exps, index tuple) -> values, integrated over t; plus error estimate."""
        keys, exprs = self.integrand.component_list()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not exprs:
            return {}, 0.0
        chart = self.integrand.chart
        syms = list(chart.symbols) + [T_PATH]
        fn = _t_evaluator(tuple(syms), tuple(exprs))

        def run(n):
            x, w = gauss_legendre(n)
            t = 0.5 * (x + 1.0)
            grid = np.repeat(pts, n, axis=0)
            tt = np.tile(t, len(pts))
            with np.errstate(all="ignore"):
                vals = fn(*grid.T, tt)
            vals = np.stack([np.broadcast_to(np.asarray(v, dtype=float), tt.shape) for v in vals], axis=1)
            vals = vals.reshape(len(pts), n, len(exprs))
            return np.einsum("pnk,n->pk", vals, 0.5 * w)

        fine = run(order)
        coarse = run(max(16, order // 2)) if order > 16 else run(order + 8)
        err = float(np.max(np.abs(fine - coarse)))
        return {k: fine[:, i] for i, k in enumerate(keys)}, err


_T_CACHE = {}


def _t_evaluator(syms, exprs):
    key = (syms, exprs)
    if key not in _T_CACHE:
        from .exprgeom.dsl import lambdify
        if len(_T_CACHE) > 512:
            _T_CACHE.clear()
        _T_CACHE[key] = lambdify(syms, list(exprs))
    return _T_CACHE[key]


def eqform_values(alpha: EqForm, points) -> dict:
    keys, vals = alpha.evaluate(points)
    return {k: vals[:, i] for i, k in enumerate(keys)}


def dict_residual(a: dict, b: dict) -> float:
    worst = 0.0
    for k in set(a) | set(b):
        va = a.get(k)
        vb = b.get(k)
        if va is None:
            d = np.abs(vb)
        elif vb is None:
            d = np.abs(va)
        else:
            d = np.abs(va - vb)
        worst = max(worst, float(np.max(d, initial=0.0)))
    return worst


@dataclass
class ConnectionPath:
    omega0: GValued1Form
    omega1: GValued1Form
    f: object

    def at_t(self):
        f = _sym(self.f)
        om = [(w0 * (1 - T_PATH) + w1 * T_PATH) * f for w0, w1 in zip(self.omega0.comps, self.omega1.comps)]
        delta = [(w1 - w0) * f for w0, w1 in zip(self.omega0.comps, self.omega1.comps)]
        return om, delta, f

    def endpoints(self):
        return degenerate_curvature(self.omega0, self.f), degenerate_curvature(self.omega1, self.f)

    @property
    def base(self):
        return EqForm(self.omega0.alg, self.omega0.fields, self.omega0.chart)


@dataclass
class CutoffPath:
    omega: GValued1Form
    f0: object
    f1: object

    def at_t(self):
        f0, f1 = _sym(self.f0), _sym(self.f1)
        ft = f0 * (1 - T_PATH) + f1 * T_PATH
        om = [w * ft for w in self.omega.comps]
        delta = [w * (f1 - f0) for w in self.omega.comps]
        return om, delta, ft

    def endpoints(self):
        return degenerate_curvature(self.omega, self.f0), degenerate_curvature(self.omega, self.f1)

    @property
    def base(self):
        return EqForm(self.omega.alg, self.omega.fields, self.omega.chart)


def _partial(F: WeilElement, a: int) -> WeilElement:
    out = WeilElement(F.alg)
    for (th, exps), c in F.terms.items():
        if exps[a]:
            e = list(exps)
            e[a] -= 1
            out = out + WeilElement.monomial(F.alg, (), e, c * exps[a])
    return out


def transgress_invariant_poly(path, F: WeilElement) -> TransgressionForm:
    """integral_0^1 sum_a delta^a ^ (d_a F)(Omega^t) dt."""
    _check_invariant_polynomial(F)
    om, delta, ft = path.at_t()
    curv = curvature_from(path.base, om, ft)
    out = path.base.zero()
    for a in range(F.alg.dim):
        dF = _partial(F, a)
        if not dF.terms or not delta[a].comps:
            continue
        out = out + path.base.from_dform(delta[a]) * substitute(dF, curv)
    return TransgressionForm(out)


def transgress_form(omega0: GValued1Form, omega1: GValued1Form, f, alpha: EqForm) -> TransgressionForm:
    """dt-coefficient of r_f on W x I along omega(t) = (1-t) omega0 + t omega1, as an integrand."""
    path = ConnectionPath(omega0, omega1, f)
    om, delta, ft = path.at_t()
    curv = curvature_from(path.base, om, ft)
    pc = _PowerCache(curv.comps)
    m = alpha.alg.dim
    out = alpha.zero()
    for j in range(m + 1):
        sign = -1 if (j * (j + 1) // 2) % 2 else 1
        sign *= -1 if j % 2 else 1
        for A in itertools.combinations(range(m), j):
            wA = _omega_wedge(om, A, alpha.chart)
            if not wA.comps:
                continue
            for (e, _q), w in alpha.terms.items():
                if not any(e):
                    continue
                iw = _iterated_contract(alpha.fields, A, w)
                if not iw.comps:
                    continue
                for a in range(m):
                    if not e[a] or not delta[a].comps:
                        continue
                    lower = list(e)
                    lower[a] -= 1
                    piece = wedge(wedge(wA, delta[a]), iw)
                    if not piece.comps:
                        continue
                    out = out + pc.monomial(lower) * (piece * (sign * e[a]))
    return TransgressionForm(out)


def transgression_residual(T: TransgressionForm, target: EqForm, points, order=32, correction=None):
    """max |D T (+ correction) - target| at points, with the quadrature error estimate."""
    DT, err = T.D().evaluate(points, order)
    if correction is not None:
        corr, err2 = correction.evaluate(points, order)
        err = max(err, err2)
        for k, v in corr.items():
            DT[k] = DT[k] + v if k in DT else v
    return dict_residual(DT, eqform_values(target, points)), err
