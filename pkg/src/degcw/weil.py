"""The Weil algebra W(g) = Lambda(g*) (x) S(g*) with exact coefficients.

Generators: ``theta(a)`` in degree 1 and ``Theta(a)`` in degree 2.  A term is
keyed by (sorted tuple of theta indices, exponent vector of Theta) and every
sign coming from reordering thetas is folded into the coefficient.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import lru_cache
from math import factorial

import sympy

from .liealg import LieAlgebraSpec
from .pipoly import ONE, ZERO, PiPoly


def _merge_sign(A, B):
    """Sign of sorting the concatenation A+B (0 if they share an index)."""
    if set(A) & set(B):
        return 0
    inversions = sum(1 for a in A for b in B if a > b)
    return -1 if inversions % 2 else 1


class WeilElement:
    __slots__ = ("alg", "terms")

    def __init__(self, alg: LieAlgebraSpec, terms=None):
        self.alg = alg
        self.terms = {}
        if terms:
            for key, c in terms.items():
                c = PiPoly.coerce(c)
                if c:
                    self.terms[key] = c

    # -- constructors -------------------------------------------------
    @classmethod
    def scalar(cls, alg, c=1):
        return cls(alg, {((), (0,) * alg.dim): PiPoly.coerce(c)})

    @classmethod
    def theta(cls, alg, a: int):
        _check_index(alg, a)
        return cls(alg, {((a,), (0,) * alg.dim): ONE})

    @classmethod
    def Theta(cls, alg, a: int):
        _check_index(alg, a)
        e = [0] * alg.dim
        e[a] = 1
        return cls(alg, {((), tuple(e)): ONE})

    @classmethod
    def monomial(cls, alg, thetas=(), exps=None, coeff=1):
        thetas = tuple(thetas)
        key = tuple(sorted(thetas))
        if len(set(key)) != len(key):
            return cls(alg)
        perm_sign = _perm_sign(thetas)
        exps = tuple(exps) if exps is not None else (0,) * alg.dim
        return cls(alg, {(key, exps): PiPoly.coerce(coeff) * perm_sign})

    # -- algebra ------------------------------------------------------
    def copy(self):
        return WeilElement(self.alg, self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, PiPoly)):
            other = WeilElement.scalar(self.alg, other)
        return isinstance(other, WeilElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, WeilElement):
            other = WeilElement.scalar(self.alg, other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return WeilElement(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return WeilElement(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, WeilElement):
            c = PiPoly.coerce(other)
            return WeilElement(self.alg, {k: v * c for k, v in self.terms.items()})
        out = {}
        for (A, e), c1 in self.terms.items():
            for (B, h), c2 in other.terms.items():
                s = _merge_sign(A, B)
                if not s:
                    continue
                key = (tuple(sorted(A + B)), tuple(x + y for x, y in zip(e, h)))
                out[key] = out.get(key, ZERO) + c1 * c2 * s
        return WeilElement(self.alg, out)

    def __rmul__(self, other):
        return self * other

    # -- grading ------------------------------------------------------
    @staticmethod
    def term_degree(key) -> int:
        A, e = key
        return len(A) + 2 * sum(e)

    def degrees(self) -> set:
        return {self.term_degree(k) for k in self.terms}

    def homogeneous_part(self, q: int) -> "WeilElement":
        return WeilElement(self.alg, {k: v for k, v in self.terms.items() if self.term_degree(k) == q})

    def is_polynomial(self) -> bool:
        """True when no theta appears (element of S(g*))."""
        return all(not A for A, _ in self.terms)

    def __repr__(self):
        return f"WeilElement({self})"

    def __str__(self):
        return format_weil(self)


def _perm_sign(seq):
    seq = list(seq)
    s = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def _check_index(alg, a):
    if not 0 <= a < alg.dim:
        raise IndexError(f"basis index {a} out of range for {alg.kind} (dim {alg.dim})")


def format_weil(x: WeilElement) -> str:
    """Render as e.g. ``-4*pi*t2^t3 + T1`` (t = theta, T = Theta, 1-based)."""
    if not x.terms:
        return "0"
    parts = []
    order = lambda kv: (WeilElement.term_degree(kv[0]), -len(kv[0][0]), kv[0])
    for (A, e), c in sorted(x.terms.items(), key=order):
        factors = []
        if A:
            factors.append("^".join(f"t{a + 1}" for a in A))
        for b, n in enumerate(e):
            if n:
                factors.append(f"T{b + 1}" + (f"**{n}" if n > 1 else ""))
        mono = "*".join(factors)
        cs = str(c)
        if len(c.terms) > 1:
            cs = f"({cs})"
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append("-" + mono)
        else:
            parts.append(f"{cs}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


# -- derivations -------------------------------------------------------

def _derivation(x: WeilElement, theta_img, Theta_img, odd: bool) -> WeilElement:
    alg = x.alg
    zero_e = (0,) * alg.dim
    out = WeilElement(alg)
    for (A, e), c in x.terms.items():
        for pos, a in enumerate(A):
            img = theta_img[a]
            if not img:
                continue
            sign = -1 if (odd and pos % 2) else 1
            left = WeilElement(alg, {(A[:pos], zero_e): ONE})
            right = WeilElement(alg, {(A[pos + 1:], e): ONE})
            out = out + left * img * right * (c * sign)
        sgnA = -1 if (odd and len(A) % 2) else 1
        for b, n in enumerate(e):
            if not n or not Theta_img[b]:
                continue
            rest = list(e)
            rest[b] -= 1
            left = WeilElement(alg, {(A, zero_e): ONE})
            right = WeilElement(alg, {((), tuple(rest)): ONE})
            out = out + left * Theta_img[b] * right * (c * sgnA * n)
    return out


@lru_cache(maxsize=None)
def _d_images(alg: LieAlgebraSpec):
    m = alg.dim
    th = []
    Th = []
    for a in range(m):
        t = WeilElement.Theta(alg, a)
        T = WeilElement(alg)
        for b in range(m):
            for c in range(m):
                f = alg.f(b, c, a)
                if f:
                    t = t + WeilElement.monomial(alg, (b, c), coeff=f * Fraction(-1, 2))
                    T = T + WeilElement.theta(alg, b) * WeilElement.Theta(alg, c) * (-f)
        th.append(t)
        Th.append(T)
    return tuple(th), tuple(Th)


def weil_d(x: WeilElement) -> WeilElement:
    """Weil differential: degree +1 derivation with
    d theta^a = -1/2 f^a_bc theta^b theta^c + Theta^a and
    d Theta^a = -f^a_bc theta^b Theta^c."""
    th, Th = _d_images(x.alg)
    return _derivation(x, th, Th, odd=True)


def weil_contract(a: int, x: WeilElement) -> WeilElement:
    """i_a: degree -1 derivation, i_a theta^b = delta, i_a Theta^b = 0."""
    alg = x.alg
    _check_index(alg, a)
    th = [WeilElement.scalar(alg, 1) if b == a else WeilElement(alg) for b in range(alg.dim)]
    Th = [WeilElement(alg)] * alg.dim
    return _derivation(x, th, Th, odd=True)


@lru_cache(maxsize=None)
def _lie_images(alg: LieAlgebraSpec, a: int):
    m = alg.dim
    th, Th = [], []
    for b in range(m):
        t = WeilElement(alg)
        T = WeilElement(alg)
        for c in range(m):
            f = alg.f(a, c, b)
            if f:
                t = t + WeilElement.theta(alg, c) * (-f)
                T = T + WeilElement.Theta(alg, c) * (-f)
        th.append(t)
        Th.append(T)
    return tuple(th), tuple(Th)


def weil_lie(a: int, x: WeilElement) -> WeilElement:
    """L_a: degree 0 derivation, L_a theta^b = -f^b_ac theta^c (same on Theta)."""
    _check_index(x.alg, a)
    th, Th = _lie_images(x.alg, a)
    return _derivation(x, th, Th, odd=False)


# -- linear algebra on graded pieces -----------------------------------

def monomial_basis(alg: LieAlgebraSpec, q: int, polynomial_only: bool = False) -> list:
    """Keys (thetas, exps) of all monomials of degree q."""
    m = alg.dim
    keys = []
    for k in range(0, min(m, q) + 1):
        if (q - k) % 2 or (polynomial_only and k):
            continue
        p = (q - k) // 2
        for A in itertools.combinations(range(m), k):
            for e in _exponents(m, p):
                keys.append((A, e))
    return keys


def _exponents(m, p):
    if m == 0:
        if p == 0:
            yield ()
        return
    for first in range(p, -1, -1):
        for rest in _exponents(m - 1, p - first):
            yield (first,) + rest


def _matrix(op, alg, keys):
    """Rows: output monomials; cols: input keys."""
    cols = []
    row_keys = {}
    for key in keys:
        img = op(WeilElement(alg, {key: ONE}))
        cols.append(img.terms)
        for k in img.terms:
            row_keys.setdefault(k, len(row_keys))
    rows = [[ZERO] * len(keys) for _ in row_keys]
    for j, col in enumerate(cols):
        for k, v in col.items():
            rows[row_keys[k]][j] = v
    return rows


def _nullspace(rows, n):
    """Exact kernel of a matrix with PiPoly entries."""
    rat_rows = []
    symbolic = False
    for row in rows:
        powers = {k for v in row if v for k in v.terms}
        if not powers:
            continue
        if len(powers) == 1 and all(len(v.terms) <= 1 for v in row):
            (k,) = powers
            rat_rows.append([(v / PiPoly.pi(k)).rational() if v else Fraction(0) for v in row])
        else:
            symbolic = True
            break
    if symbolic:
        M = sympy.Matrix([[v.to_sympy() for v in row] for row in rows])
        vecs = M.nullspace(simplify=True)
        return [[PiPoly.from_sympy(sympy.simplify(c)) for c in v] for v in vecs]
    if not rat_rows:
        return [[PiPoly.const(int(i == j)) for i in range(n)] for j in range(n)]
    M = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in r] for r in rat_rows])
    out = []
    for v in M.nullspace():
        # clear denominators for tidy output
        den = sympy.ilcm(*[sympy.fraction(c)[1] for c in v]) if len(v) else 1
        out.append([PiPoly.const(Fraction(int((c * den).p), int((c * den).q))) for c in v])
    return out


def _kernel(alg, keys, ops):
    if not keys:
        return []
    rows = []
    for op in ops:
        rows.extend(_matrix(op, alg, keys))
    return [WeilElement(alg, {k: c for k, c in zip(keys, vec)}) for vec in _nullspace(rows, len(keys))]


def invariant_polynomials(alg: LieAlgebraSpec, q: int) -> list:
    """Basis of ad-invariant polynomials of polynomial degree q in S^q(g*)."""
    keys = monomial_basis(alg, 2 * q, polynomial_only=True)
    ops = [lambda x, b=b: weil_lie(b, x) for b in range(alg.dim)]
    return _kernel(alg, keys, ops)


def basic_basis(alg: LieAlgebraSpec, q: int) -> list:
    """Basis of the degree-q basic subspace {L_a x = 0, i_a x = 0 for all a}."""
    keys = monomial_basis(alg, q)
    ops = [lambda x, b=b: weil_lie(b, x) for b in range(alg.dim)]
    ops += [lambda x, b=b: weil_contract(b, x) for b in range(alg.dim)]
    return _kernel(alg, keys, ops)


def casimir(alg: LieAlgebraSpec) -> WeilElement:
    """Sum_a (Theta^a)^2, the quadratic invariant for the identity metric."""
    out = WeilElement(alg)
    for a in range(alg.dim):
        out = out + WeilElement.Theta(alg, a) * WeilElement.Theta(alg, a)
    return out


def in_span(x: WeilElement, basis: list) -> bool:
    """Exact membership test of x in span(basis)."""
    keys = sorted({k for b in basis for k in b.terms} | set(x.terms))
    if not basis:
        return not x
    M = sympy.Matrix([[b.terms.get(k, ZERO).to_sympy() for b in basis] for k in keys])
    rhs = sympy.Matrix([x.terms.get(k, ZERO).to_sympy() for k in keys])
    aug = M.row_join(rhs)
    return M.rank(simplify=True) == aug.rank(simplify=True)


def symmetric_tensor(F: WeilElement) -> dict:
    """Coefficients a_{i1..iq}, symmetric, with F = a_I Theta^{i1}...Theta^{iq}."""
    if not F.is_polynomial():
        raise ValueError("symmetric_tensor needs a polynomial element")
    out = {}
    for (_, e), c in F.terms.items():
        q = sum(e)
        idx = [b for b, n in enumerate(e) for _ in range(n)]
        mult = factorial(q)
        for n in e:
            mult //= factorial(n)
        for perm in set(itertools.permutations(idx)):
            out[perm] = out.get(perm, ZERO) + c / mult
    return out


def invariance_tensor_residual(F: WeilElement) -> list:
    """Nonzero entries of q f^{i1}_{b(c} a_{|i1| i2..iq)} (symmetrized over
    c, i2..iq); empty iff the polynomial is invariant."""
    alg = F.alg
    a = symmetric_tensor(F)
    if not a:
        return []
    q = len(next(iter(a)))
    m = alg.dim
    bad = []
    for b in range(m):
        for J in itertools.combinations_with_replacement(range(m), q):
            total = ZERO
            perms = set(itertools.permutations(J))
            for P in perms:
                c, rest = P[0], P[1:]
                for i1 in range(m):
                    f = alg.f(b, c, i1)
                    if f:
                        total = total + f * a.get((i1,) + rest, ZERO)
            if total:
                bad.append((b, J, total * q / len(perms)))
    return bad


# -- random elements for property checks --------------------------------

def random_element(alg: LieAlgebraSpec, rng: random.Random, max_degree: int = 6,
                   n_terms: int = 4, degree: int | None = None) -> WeilElement:
    out = WeilElement(alg)
    for _ in range(n_terms):
        q = degree if degree is not None else rng.randint(0, max_degree)
        keys = monomial_basis(alg, q)
        if not keys:
            continue
        key = rng.choice(keys)
        c = PiPoly({rng.randint(-1, 1): Fraction(rng.randint(-5, 5), rng.randint(1, 3))})
        out = out + WeilElement(alg, {key: c})
    return out
