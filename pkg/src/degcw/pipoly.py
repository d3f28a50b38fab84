"""Exact coefficients in Q[pi, 1/pi].

Every structure constant and normalization we need is a rational multiple of
an integer power of pi, so a Laurent polynomial in pi with Fraction
coefficients is closed under everything the Weil algebra does.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import sympy


class PiPoly:
    """Immutable Laurent polynomial in pi with rational coefficients."""

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v:
                    c[int(k)] = v
        self._c = c
        self._hash = None

    @classmethod
    def const(cls, value) -> "PiPoly":
        return cls({0: value})

    @classmethod
    def pi(cls, power: int = 1, coeff=1) -> "PiPoly":
        return cls({power: coeff})

    @classmethod
    def coerce(cls, value) -> "PiPoly":
        if isinstance(value, PiPoly):
            return value
        if isinstance(value, (int, Fraction, Rational)):
            return cls({0: value})
        raise TypeError(f"cannot coerce {type(value).__name__} to PiPoly")

    @property
    def terms(self) -> dict:
        return dict(self._c)

    def __bool__(self):
        return bool(self._c)

    def is_rational(self) -> bool:
        return set(self._c) <= {0}

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._c.get(0, Fraction(0))

    def __add__(self, other):
        try:
            other = PiPoly.coerce(other)
        except TypeError:
            return NotImplemented
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return PiPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return PiPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        try:
            other = PiPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return PiPoly.coerce(other) - self

    def __mul__(self, other):
        try:
            other = PiPoly.coerce(other)
        except TypeError:
            return NotImplemented
        c = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                c[k1 + k2] = c.get(k1 + k2, 0) + v1 * v2
        return PiPoly(c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = PiPoly.coerce(other)
        if len(other._c) != 1:
            raise ZeroDivisionError("can only divide by a monomial c*pi^k")
        (k, v), = other._c.items()
        return PiPoly({kk - k: vv / v for kk, vv in self._c.items()})

    def __pow__(self, n: int):
        if n < 0:
            return PiPoly.const(1) / self ** (-n)
        out = PiPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = PiPoly.coerce(other)
        except TypeError:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self._c.items())))
        return self._hash

    def __float__(self):
        return float(sum(float(v) * math.pi ** k for k, v in self._c.items()))

    def to_sympy(self):
        return sympy.Add(*[sympy.Rational(v.numerator, v.denominator) * sympy.pi ** k
                           for k, v in sorted(self._c.items())])

    @classmethod
    def from_sympy(cls, expr) -> "PiPoly":
        expr = sympy.expand(sympy.sympify(expr))
        out = {}
        for term in sympy.Add.make_args(expr):
            if term == 0:
                continue
            coeff, rest = term.as_coeff_Mul()
            if rest == 1:
                k = 0
            elif rest == sympy.pi:
                k = 1
            elif rest.is_Pow and rest.base == sympy.pi and rest.exp.is_Integer:
                k = int(rest.exp)
            else:
                raise ValueError(f"not a Laurent polynomial in pi: {expr}")
            if not coeff.is_Rational:
                raise ValueError(f"non-rational coefficient in {expr}")
            out[k] = out.get(k, 0) + Fraction(int(coeff.p), int(coeff.q))
        return cls(out)

    def __repr__(self):
        return f"PiPoly({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for k in sorted(self._c, reverse=True):
            v = self._c[k]
            if k == 0:
                parts.append(str(v))
            else:
                unit = "pi" if k == 1 else f"pi^{k}"
                parts.append(unit if v == 1 else ("-" + unit if v == -1 else f"{v}*{unit}"))
        s = " + ".join(parts)
        return s.replace("+ -", "- ")


ZERO = PiPoly()
ONE = PiPoly.const(1)
PI = PiPoly.pi()
