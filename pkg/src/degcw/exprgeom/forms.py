"""Differential forms with symbolic coefficients on a coordinate chart."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import sympy

from .dsl import coordinate_symbols, lambdify


@dataclass(frozen=True)
class Chart:
    name: str
    coord_names: tuple
    symbols: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        syms = coordinate_symbols(self.coord_names)
        object.__setattr__(self, "symbols", tuple(syms[n] for n in self.coord_names))

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    @property
    def symbol_map(self) -> dict:
        return dict(zip(self.coord_names, self.symbols))


def _sorted_sign(seq):
    """(sign, sorted tuple) of a sequence of distinct indices; sign 0 on repeats."""
    if len(set(seq)) != len(seq):
        return 0, None
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s, tuple(sorted(seq))


_LAMBDA_CACHE = {}


def _evaluator(chart, exprs):
    key = (chart.coord_names, tuple(exprs))
    fn = _LAMBDA_CACHE.get(key)
    if fn is None:
        if len(_LAMBDA_CACHE) > 4096:
            _LAMBDA_CACHE.clear()
        fn = lambdify(chart.symbols, exprs)
        _LAMBDA_CACHE[key] = fn
    return fn


def evaluate_exprs(chart: Chart, exprs, points) -> np.ndarray:
    """Evaluate expressions at points of shape (npts, dim); returns (npts, len)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if not exprs:
        return np.zeros((n, 0))
    fn = _evaluator(chart, list(exprs))
    with np.errstate(all="ignore"):
        vals = fn(*points.T)
    return np.stack([np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in vals], axis=1)


class DForm:
    """Degree-q form: increasing index tuple -> sympy coefficient."""

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart: Chart, degree: int, comps=None):
        self.chart = chart
        self.degree = degree
        self.comps = {}
        for k, v in (comps or {}).items():
            v = sympy.sympify(v)
            if v != 0:
                if len(k) != degree or list(k) != sorted(set(k)):
                    raise ValueError(f"bad index tuple {k} for a {degree}-form")
                self.comps[tuple(k)] = v

    @classmethod
    def scalar(cls, chart, expr):
        return cls(chart, 0, {(): expr})

    @classmethod
    def coord_differential(cls, chart, i):
        return cls(chart, 1, {(i,): 1})

    @classmethod
    def from_components(cls, chart, degree, comps_in_order):
        return cls(chart, degree, dict(zip(itertools.combinations(range(chart.dim), degree),
                                           comps_in_order)))

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def _check(self, other):
        if other.chart != self.chart:
            raise ValueError("forms live on different charts")

    def __add__(self, other):
        if isinstance(other, DForm):
            self._check(other)
            if self.degree != other.degree:
                if not other.comps:
                    return self
                if not self.comps:
                    return other
                raise ValueError(f"cannot add a {self.degree}-form and a {other.degree}-form")
            out = dict(self.comps)
            for k, v in other.comps.items():
                out[k] = out.get(k, 0) + v
            return DForm(self.chart, self.degree, out)
        return self + DForm.scalar(self.chart, other)

    __radd__ = __add__

    def __neg__(self):
        return DForm(self.chart, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DForm):
            return wedge(self, other)
        other = sympy.sympify(other)
        return DForm(self.chart, self.degree, {k: v * other for k, v in self.comps.items()})

    def __rmul__(self, other):
        if isinstance(other, DForm):
            return wedge(other, self)
        return self * other

    def __xor__(self, other):
        return wedge(self, other)

    def map_coeffs(self, fn):
        return DForm(self.chart, self.degree, {k: fn(v) for k, v in self.comps.items()})

    def expand(self):
        return self.map_coeffs(sympy.expand)

    def subs(self, *args, **kw):
        return self.map_coeffs(lambda v: v.subs(*args, **kw))

    def index_tuples(self):
        return list(itertools.combinations(range(self.chart.dim), self.degree))

    def evaluate(self, points) -> np.ndarray:
        """Components at points, columns ordered like ``index_tuples()``."""
        tuples = self.index_tuples()
        exprs = [self.comps.get(t, sympy.S.Zero) for t in tuples]
        return evaluate_exprs(self.chart, exprs, points)

    def __repr__(self):
        names = self.chart.coord_names
        if not self.comps:
            return f"DForm(0, degree={self.degree})"
        parts = []
        for k, v in sorted(self.comps.items()):
            basis = "^".join("d" + names[i] for i in k)
            parts.append(f"({v})" + (f"*{basis}" if basis else ""))
        return " + ".join(parts)


def zero_form(chart, degree=0):
    return DForm(chart, degree)


def wedge(a: DForm, b: DForm) -> DForm:
    """Graded product; returns the zero form of degree p+q on overflow."""
    a._check(b)
    deg = a.degree + b.degree
    out = {}
    if deg <= a.chart.dim:
        for I, u in a.comps.items():
            for J, v in b.comps.items():
                s, K = _sorted_sign(I + J)
                if s:
                    out[K] = out.get(K, 0) + s * u * v
    return DForm(a.chart, deg, out)


def exterior_d(w: DForm) -> DForm:
    chart = w.chart
    out = {}
    if w.degree < chart.dim:
        for I, c in w.comps.items():
            for i, x in enumerate(chart.symbols):
                if i in I:
                    continue
                dc = sympy.diff(c, x)
                if dc == 0:
                    continue
                s, K = _sorted_sign((i,) + I)
                out[K] = out.get(K, 0) + s * dc
    return DForm(chart, w.degree + 1, out)


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    comps: tuple

    def __post_init__(self):
        object.__setattr__(self, "comps", tuple(sympy.sympify(c) for c in self.comps))
        if len(self.comps) != self.chart.dim:
            raise ValueError("vector field has wrong number of components")

    def apply(self, fn):
        """Directional derivative V(fn)."""
        return sum((c * sympy.diff(fn, x) for c, x in zip(self.comps, self.chart.symbols)
                    if c != 0), sympy.S.Zero)

    def evaluate(self, points):
        return evaluate_exprs(self.chart, list(self.comps), points)

    def __add__(self, other):
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __mul__(self, s):
        return VectorField(self.chart, tuple(a * s for a in self.comps))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1


def vf_bracket(U: VectorField, V: VectorField) -> VectorField:
    """[U, V]^i = U(V^i) - V(U^i)."""
    return VectorField(U.chart, tuple(U.apply(v) - V.apply(u) for u, v in zip(U.comps, V.comps)))


def contract_vf(V: VectorField, w: DForm) -> DForm:
    """Interior product, inserting V into the first slot."""
    if w.degree == 0:
        return DForm(w.chart, 0)
    out = {}
    for I, c in w.comps.items():
        for s, i in enumerate(I):
            vi = V.comps[i]
            if vi == 0:
                continue
            K = I[:s] + I[s + 1:]
            out[K] = out.get(K, 0) + (-1) ** s * vi * c
    return DForm(w.chart, w.degree - 1, out)


def lie_vf(V: VectorField, w: DForm) -> DForm:
    """Lie derivative via the Cartan formula d i_V + i_V d."""
    a = exterior_d(contract_vf(V, w)) if w.degree > 0 else DForm(w.chart, w.degree)
    return a + contract_vf(V, exterior_d(w))


def metric_flat(metric, V: VectorField) -> DForm:
    """g(V, .) as a 1-form; metric is an n x n nested sequence of expressions."""
    n = V.chart.dim
    comps = {}
    for j in range(n):
        c = sum((metric[i][j] * V.comps[i] for i in range(n) if metric[i][j] != 0 and V.comps[i] != 0),
                sympy.S.Zero)
        comps[(j,)] = c
    return DForm(V.chart, 1, comps)


def metric_inner(metric, U: VectorField, V: VectorField):
    n = U.chart.dim
    return sum((metric[i][j] * U.comps[i] * V.comps[j] for i in range(n) for j in range(n)
                if metric[i][j] != 0 and U.comps[i] != 0 and V.comps[j] != 0), sympy.S.Zero)


def lie_metric(metric, V: VectorField):
    """(L_V g)_{ij} = V(g_ij) + g_kj d_i V^k + g_ik d_j V^k."""
    chart = V.chart
    n = chart.dim
    xs = chart.symbols
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            e = V.apply(metric[i][j])
            for k in range(n):
                e += metric[k][j] * sympy.diff(V.comps[k], xs[i]) + metric[i][k] * sympy.diff(V.comps[k], xs[j])
            out[i][j] = e
    return out
