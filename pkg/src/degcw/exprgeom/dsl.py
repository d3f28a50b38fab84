"""Scalar expression DSL.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;            (* right associative, integer exponent *)
    atom    = number | name | name "(" expr { ("," | ";") expr } ")" | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "-" ] digits ] ;

Functions: sin, cos, exp, sqrt (one argument) and bump(r, r0, r1), the smooth
step that is 0 for r <= r0 and 1 for r >= r1.  ``pi`` is reserved.  A rational
literal is simply ``p/q``.  Decimals are converted to exact rationals.
"""
from __future__ import annotations

import re

import numpy as np
import sympy


class DSLError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}" + (f" in {text!r}" if text else ""))
        self.offset = offset


class DSLSyntaxError(DSLError):
    pass


class UnknownSymbolError(DSLError):
    pass


class Hexp(sympy.Function):
    """Hexp(n, x): n-th derivative of exp(-1/x) (x > 0), extended by 0.

    Smooth and flat at 0.  The n-th derivative is P_n(1/x) exp(-1/x) with
    P_0 = 1 and P_{n+1}(y) = y^2 (P_n(y) - P_n'(y)).
    """

    nargs = 2

    @classmethod
    def eval(cls, n, x):
        if x.is_Number and x <= 0:
            return sympy.S.Zero
        return None

    def fdiff(self, argindex=2):
        if argindex != 2:
            raise sympy.ArgumentIndexError(self, argindex)
        n, x = self.args
        return Hexp(n + 1, x)


_HEXP_POLYS = [np.polynomial.Polynomial([1.0])]


def _hexp_poly(n):
    y2 = np.polynomial.Polynomial([0.0, 0.0, 1.0])
    while len(_HEXP_POLYS) <= n:
        p = _HEXP_POLYS[-1]
        _HEXP_POLYS.append(y2 * (p - p.deriv()))
    return _HEXP_POLYS[n]


def _hexp_numpy(n, x):
    x = np.asarray(x, dtype=float)
    ok = x > 1e-3
    y = np.where(ok, 1.0 / np.where(ok, x, 1.0), 0.0)
    val = _hexp_poly(int(n))(y) * np.exp(-y)
    # below x = 1e-3 every derivative is smaller than 1e-400
    return np.where(ok, val, 0.0)


def smooth_step(x):
    """h(x) / (h(x) + h(1 - x)) with h(x) = exp(-1/x) for x > 0."""
    return Hexp(0, x) / (Hexp(0, x) + Hexp(0, 1 - x))


class Bump(sympy.Function):
    """Bump(n, r, r0, r1): n-th r-derivative of the step from 0 (r <= r0) to 1 (r >= r1).

    Kept as a single node so that differentiated expressions stay small.
    """

    nargs = 4

    @classmethod
    def eval(cls, n, r, r0, r1):
        if r.is_Number and r0.is_Number and r1.is_Number:
            if r <= r0:
                return sympy.S.Zero
            if r >= r1:
                return sympy.S.One if n == 0 else sympy.S.Zero
        return None

    def fdiff(self, argindex=2):
        if argindex != 2:
            raise sympy.ArgumentIndexError(self, argindex)
        n, r, r0, r1 = self.args
        return Bump(n + 1, r, r0, r1)


_STEP_DERIVS = {}


def _bump_numpy(n, r, r0, r1):
    n = int(n)
    if n not in _STEP_DERIVS:
        x = sympy.Symbol("x", real=True)
        _STEP_DERIVS[n] = sympy.lambdify([x], sympy.diff(smooth_step(x), x, n),
                                         modules=[{"Hexp": _hexp_numpy}, "numpy"])
    width = float(r1) - float(r0)
    x = (np.asarray(r, dtype=float) - float(r0)) / width
    with np.errstate(all="ignore"):
        val = np.asarray(_STEP_DERIVS[n](x), dtype=float) / width ** n
    inner = (x > 0) & (x < 1)
    outer = 1.0 if n == 0 else 0.0
    return np.where(inner, np.nan_to_num(val), np.where(x >= 1, outer, 0.0))


NUMPY_MODULES = [{"Hexp": _hexp_numpy, "Bump": _bump_numpy}, "numpy"]


def bump(r, r0, r1):
    """Smooth monotone step: 0 for r <= r0, 1 for r >= r1."""
    r, r0, r1 = map(sympy.sympify, (r, r0, r1))
    return Bump(0, r, r0, r1)


_FUNCS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp, "sqrt": sympy.sqrt}
_ARITY = {"sin": 1, "cos": 1, "exp": 1, "sqrt": 1, "bump": 3}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE]-?\d+)?|\.\d+)|(?P<name>[A-Za-z_]\w*)"
                    r"|(?P<op>[-+*/^(),;]))")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise DSLSyntaxError(f"unexpected character {text[start]!r}", start, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, symbols, constants):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.symbols = symbols
        self.constants = constants

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise DSLSyntaxError(f"expected {value!r}, found {what}", pos, self.text)

    def error_here(self, msg):
        kind, val, pos = self.peek()
        what = "end of input" if kind == "end" else repr(val)
        raise DSLSyntaxError(f"{msg}, found {what}", pos, self.text)

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            self.error_here("unexpected token")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            pos = self.take()[2]
            exp = self.unary()
            if not (exp.is_Integer):
                raise DSLSyntaxError("exponent must be an integer constant", pos, self.text)
            return base ** exp
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return sympy.Rational(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            self.take()
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in _ARITY:
                    raise UnknownSymbolError(f"unknown function {val!r}", pos, self.text)
                self.take()
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] in (",", ";"):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _ARITY[val]:
                    raise DSLSyntaxError(f"{val} takes {_ARITY[val]} argument(s), got {len(args)}",
                                         pos, self.text)
                return bump(*args) if val == "bump" else _FUNCS[val](*args)
            if val == "pi":
                return sympy.pi
            if val in self.symbols:
                return self.symbols[val]
            if val in self.constants:
                return self.constants[val]
            raise UnknownSymbolError(f"unknown symbol {val!r}", pos, self.text)
        self.error_here("expected a number, name or '('")


def coordinate_symbols(names) -> dict:
    return {n: sympy.Symbol(n, real=True) for n in names}


def parse_scalar_expr(text: str, coords, constants=None) -> sympy.Expr:
    """Parse ``text`` into a sympy expression over the given coordinates.

    ``coords`` is a list of names or a dict name -> Symbol; ``constants`` maps
    extra names to exact values (scenario parameters).
    """
    symbols = coords if isinstance(coords, dict) else coordinate_symbols(coords)
    consts = {k: sympy.sympify(v) for k, v in (constants or {}).items()}
    return _Parser(text, symbols, consts).parse()


def lambdify(symbols, exprs):
    """Vectorized numpy evaluator for a list of expressions."""
    return sympy.lambdify(list(symbols), list(exprs), modules=NUMPY_MODULES, cse=True)
