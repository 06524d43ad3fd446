"""Nested forward-mode dual numbers over the complex field.

A level-``L`` dual in ``n`` variables is stored as a complex array whose
trailing ``L`` axes have length ``n + 1``.  Along each of those axes index 0
is the "primal" part and index ``k + 1`` the coefficient of the
infinitesimal ``eps_k`` of that nesting level (``eps_j * eps_k = 0`` within a
level).  Leading axes are batch axes, so one evaluation can carry many points.

Seeding every variable with one infinitesimal per level, the coefficient at
``[a+1, b+1, c+1]`` of a level-3 result is the holomorphic third partial
``d^3 f / dz_a dz_b dz_c``; lower orders sit at the entries padded with 0.
"""

from __future__ import annotations

import numpy as np

from .expr import DomainError

# |z| below this counts as a pole / branch point
DOMAIN_EPS = 1e-300


def _lead(a: np.ndarray, level: int, idx):
    return a[(Ellipsis, idx) + (slice(None),) * (level - 1)]


def _assemble(c0, c1, level: int):
    c0 = np.expand_dims(c0, -level)
    shape = np.broadcast_shapes(c0.shape[: c0.ndim - level], c1.shape[: c1.ndim - level])
    c0 = np.broadcast_to(c0, shape + c0.shape[c0.ndim - level:])
    c1 = np.broadcast_to(c1, shape + c1.shape[c1.ndim - level:])
    return np.concatenate([c0, c1], axis=-level)


class Dual:
    """Immutable nested dual number (``level`` >= 0)."""

    __slots__ = ("data", "level")
    __array_priority__ = 1000

    def __init__(self, data, level: int):
        self.data = np.asarray(data, dtype=complex)
        self.level = level

    # convenience wrappers so hand-written formulas read naturally
    def __add__(self, other):
        return add(self, _lift(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _lift(other, self))

    def __rsub__(self, other):
        return sub(_lift(other, self), self)

    def __mul__(self, other):
        return mul(self, _lift(other, self))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _lift(other, self))

    def __rtruediv__(self, other):
        return div(_lift(other, self), self)

    def __neg__(self):
        return Dual(-self.data, self.level)

    @property
    def primal(self):
        """Value with every infinitesimal set to zero."""
        return self.data[(Ellipsis,) + (0,) * self.level]

    def __repr__(self) -> str:
        return f"Dual(level={self.level}, primal={self.primal!r})"


def _nvars(a: Dual) -> int:
    return a.data.shape[-1] - 1 if a.level else 0


def _lift(x, like: Dual) -> Dual:
    if isinstance(x, Dual):
        return x
    return constant(x, like.level, _nvars(like))


def constant(value, level: int, n: int) -> Dual:
    value = np.asarray(value, dtype=complex)
    data = np.zeros(value.shape + (n + 1,) * level, dtype=complex)
    data[(Ellipsis,) + (0,) * level] = value
    return Dual(data, level)


def variable(values, index: int, level: int, n: int) -> Dual:
    """Seed variable ``index`` at ``values`` with one infinitesimal per level."""
    d = constant(values, level, n)
    for lv in range(level):
        idx = [0] * level
        idx[lv] = index + 1
        d.data[(Ellipsis,) + tuple(idx)] = 1.0
    return d


def seed_point(p, level: int) -> list[Dual]:
    p = np.asarray(p, dtype=complex)
    n = p.shape[-1]
    return [variable(p[..., i], i, level, n) for i in range(n)]


# -- raw array kernels ------------------------------------------------------

def _mul(a, b, level):
    if level == 0:
        return a * b
    a0, a1 = _lead(a, level, 0), _lead(a, level, slice(1, None))
    b0, b1 = _lead(b, level, 0), _lead(b, level, slice(1, None))
    c0 = _mul(a0, b0, level - 1)
    c1 = _mul(np.expand_dims(a0, -level), b1, level - 1) + _mul(
        a1, np.expand_dims(b0, -level), level - 1
    )
    return _assemble(c0, c1, level)


def _apply(f, fprime, a, level):
    """Lift a scalar function with known derivative through all levels."""
    if level == 0:
        return f(a)
    a0, a1 = _lead(a, level, 0), _lead(a, level, slice(1, None))
    c0 = _apply(f, fprime, a0, level - 1)
    d0 = fprime(a0, c0, level - 1)
    c1 = _mul(np.expand_dims(d0, -level), a1, level - 1)
    return _assemble(c0, c1, level)


def _check_nonzero(x, what):
    if np.any(np.abs(x) <= DOMAIN_EPS):
        raise DomainError(what)


def _recip0(x):
    _check_nonzero(x, "division by zero")
    return 1.0 / x


def _recip_prime(x, fx, level):
    return -_mul(fx, fx, level)


def _exp_prime(x, fx, level):
    return fx


def _log0(x):
    _check_nonzero(x, "log evaluated at its branch point 0")
    return np.log(x)


def _log_prime(x, fx, level):
    return _apply(_recip0, _recip_prime, x, level)


def _sqrt0(x):
    _check_nonzero(x, "sqrt evaluated at its branch point 0")
    return np.sqrt(x)


def _sqrt_prime(x, fx, level):
    return 0.5 * _apply(_recip0, _recip_prime, fx, level)


def _sin_prime(x, fx, level):
    return _apply(np.cos, _cos_prime, x, level)


def _cos_prime(x, fx, level):
    return -_apply(np.sin, _sin_prime, x, level)


# -- public operations ---------------------------------------------------------

def add(a: Dual, b: Dual) -> Dual:
    return Dual(a.data + b.data, a.level)


def sub(a: Dual, b: Dual) -> Dual:
    return Dual(a.data - b.data, a.level)


def neg(a: Dual) -> Dual:
    return Dual(-a.data, a.level)


def mul(a: Dual, b: Dual) -> Dual:
    return Dual(_mul(a.data, b.data, a.level), a.level)


def recip(a: Dual) -> Dual:
    return Dual(_apply(_recip0, _recip_prime, a.data, a.level), a.level)


def div(a: Dual, b: Dual) -> Dual:
    return mul(a, recip(b))


def powi(a: Dual, k: int) -> Dual:
    if k < 0:
        return recip(powi(a, -k))
    result = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    if result is None:
        return constant(np.ones(a.primal.shape), a.level, _nvars(a))
    return result


def exp(a: Dual) -> Dual:
    return Dual(_apply(np.exp, _exp_prime, a.data, a.level), a.level)


def log(a: Dual) -> Dual:
    return Dual(_apply(_log0, _log_prime, a.data, a.level), a.level)


def sqrt(a: Dual) -> Dual:
    return Dual(_apply(_sqrt0, _sqrt_prime, a.data, a.level), a.level)


def sin(a: Dual) -> Dual:
    return Dual(_apply(np.sin, _sin_prime, a.data, a.level), a.level)


def cos(a: Dual) -> Dual:
    return Dual(_apply(np.cos, _cos_prime, a.data, a.level), a.level)


class DualAlgebra:
    """Adapter used by :func:`holoconf.expr.evaluate`."""

    def __init__(self, level: int, n: int, batch_shape=()):
        self.level = level
        self.n = n
        self.batch_shape = tuple(batch_shape)

    def const(self, c):
        return constant(np.full(self.batch_shape, c, dtype=complex), self.level, self.n)

    add = staticmethod(add)
    sub = staticmethod(sub)
    mul = staticmethod(mul)
    div = staticmethod(div)
    neg = staticmethod(neg)
    powi = staticmethod(powi)
    exp = staticmethod(exp)
    log = staticmethod(log)
    sqrt = staticmethod(sqrt)
    sin = staticmethod(sin)
    cos = staticmethod(cos)


class ComplexAlgebra:
    """Plain (vectorised) complex evaluation with domain checks."""

    @staticmethod
    def const(c):
        return np.complex128(c)

    add = staticmethod(np.add)
    sub = staticmethod(np.subtract)
    mul = staticmethod(np.multiply)
    neg = staticmethod(np.negative)

    @staticmethod
    def div(a, b):
        _check_nonzero(b, "division by zero")
        return a / b

    @staticmethod
    def powi(a, k):
        if k < 0:
            _check_nonzero(a, "division by zero")
        return np.asarray(a, dtype=complex) ** k if k >= 0 else 1.0 / np.asarray(a, dtype=complex) ** (-k)

    exp = staticmethod(np.exp)
    log = staticmethod(_log0)
    sqrt = staticmethod(_sqrt0)
    sin = staticmethod(np.sin)
    cos = staticmethod(np.cos)
