"""Supported Lie algebras: u(1), t^2, su(2), so(3).

Basis indices are 0-based throughout the package; the pretty printers show
them 1-based (``t1``, ``T1``) to match the usual notation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .pipoly import ONE, PI, ZERO, PiPoly

KIND_NAMES = {"U1": "u1", "Torus2": "torus2", "SU2": "su2", "SO3": "so3"}


class UnsupportedGroupError(ValueError):
    pass


def _levi_civita(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2


@dataclass(frozen=True)
class LieAlgebraSpec:
    kind: str
    dim: int
    # (a, b, c) -> f^c_{ab}; zero entries omitted
    struct: dict = field(repr=False)
    a_const: PiPoly
    b_const: int | None
    c_const: PiPoly | None
    group_volume: PiPoly
    torus_volume: PiPoly = ONE

    @property
    def is_abelian(self) -> bool:
        return not self.struct

    @property
    def metric(self):
        return tuple(tuple(Fraction(int(i == j)) for j in range(self.dim)) for i in range(self.dim))

    def f(self, a: int, b: int, c: int) -> PiPoly:
        """Structure constant f^c_{ab}."""
        return self.struct.get((a, b, c), ZERO)

    def f_float(self):
        import numpy as np
        out = np.zeros((self.dim, self.dim, self.dim))
        for (a, b, c), v in self.struct.items():
            out[a, b, c] = float(v)
        return out

    def __hash__(self):
        return hash((self.kind, self.dim))

    def __eq__(self, other):
        return isinstance(other, LieAlgebraSpec) and (self.kind, self.dim) == (other.kind, other.dim)


def build_lie_algebra(kind: str) -> LieAlgebraSpec:
    """Return the algebra for ``kind`` (``u1``, ``torus2``, ``su2``, ``so3``,
    or the scenario-file names ``U1``, ``Torus2``, ``SU2``, ``SO3``)."""
    kind = KIND_NAMES.get(kind, kind)
    if kind == "u1":
        return LieAlgebraSpec("u1", 1, {}, ZERO, None, None, ONE)
    if kind in ("torus2", "torus(2)"):
        return LieAlgebraSpec("torus2", 2, {}, ZERO, None, None, ONE)
    if kind in ("su2", "so3"):
        a = PI * (4 if kind == "su2" else 2)
        struct = {}
        for i, j, k in itertools.permutations(range(3)):
            struct[(i, j, k)] = a * _levi_civita(i, j, k)
        if kind == "su2":
            vol, b = PiPoly.pi(-1, Fraction(1, 4)), 2
        else:
            vol, b = PiPoly.pi(-1), 1
        return LieAlgebraSpec(kind, 3, struct, a, b, a * vol, vol)
    raise UnsupportedGroupError(
        f"unsupported group kind {kind!r}; expected one of u1, torus2, su2, so3")


def bracket(x, y, alg: LieAlgebraSpec) -> list:
    """[x, y]^c = f^c_{ab} x^a y^b for coefficient vectors of length dim."""
    if len(x) != alg.dim or len(y) != alg.dim:
        raise ValueError(f"expected vectors of length {alg.dim}, got {len(x)} and {len(y)}")
    out = [ZERO] * alg.dim
    for (a, b, c), v in alg.struct.items():
        out[c] = out[c] + v * x[a] * y[b]
    return out


def jacobi_residual(alg: LieAlgebraSpec, x, y, z) -> list:
    xy_z = bracket(bracket(x, y, alg), z, alg)
    yz_x = bracket(bracket(y, z, alg), x, alg)
    zx_y = bracket(bracket(z, x, alg), y, alg)
    return [p + q + r for p, q, r in zip(xy_z, yz_x, zx_y)]


def check_invariants(alg: LieAlgebraSpec) -> None:
    """Raise AssertionError unless antisymmetry, Jacobi, ad-invariance of the
    identity metric and c = a * vol all hold exactly."""
    m = alg.dim
    r = range(m)
    for a, b, c in itertools.product(r, r, r):
        assert alg.f(a, b, c) == -alg.f(b, a, c), (a, b, c)
        # identity metric: f^c_{ab} g_{cd} + f^c_{ad} g_{cb} = f^d_{ab} + f^b_{ad}
    for a, b, d in itertools.product(r, r, r):
        assert alg.f(a, b, d) + alg.f(a, d, b) == ZERO
    for a, b, c, d in itertools.product(r, r, r, r):
        s = ZERO
        for e in r:
            s = s + alg.f(a, b, e) * alg.f(e, c, d) + alg.f(b, c, e) * alg.f(e, a, d) \
                + alg.f(c, a, e) * alg.f(e, b, d)
        assert s == ZERO, (a, b, c, d)
    if alg.c_const is not None:
        assert alg.c_const == alg.a_const * alg.group_volume
