"""Jets of holomorphic expressions: AD route and finite-difference oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import dual
from .expr import HoloExpr, evaluate


@dataclass(frozen=True)
class Jet3:
    """Value and holomorphic partials up to order 3 at a point."""

    value: complex
    first: np.ndarray
    second: np.ndarray
    third: np.ndarray

    def as_tuple(self):
        return (self.value, self.first, self.second, self.third)


def symmetrize(t: np.ndarray, k: int) -> np.ndarray:
    """Average the last ``k`` axes over all permutations."""
    if k < 2:
        return t
    lead = t.ndim - k
    perms = list(itertools.permutations(range(lead, t.ndim)))
    acc = np.zeros_like(t)
    for p in perms:
        acc = acc + np.transpose(t, tuple(range(lead)) + p)
    return acc / len(perms)


def dual_derivatives(d: dual.Dual, order: int) -> list[np.ndarray]:
    """Unpack a level-``order`` dual into ``[value, D1, D2, ...]``.

    Derivative axes come last and are symmetrized, so the returned tensors are
    symmetric by construction.
    """
    out = []
    for k in range(order + 1):
        idx = (slice(1, None),) * k + (0,) * (order - k)
        out.append(symmetrize(d.data[(Ellipsis,) + idx], k))
    return out


def eval_dual(e: HoloExpr, p, level: int):
    p = np.asarray(p, dtype=complex)
    if p.shape[-1] != e.n:
        raise ValueError(f"point has {p.shape[-1]} coordinates, chart has {e.n}")
    inputs = dual.seed_point(p, level)
    alg = dual.DualAlgebra(level, e.n, p.shape[:-1])
    return evaluate(e.ast, inputs, alg)


def eval_jet3(e: HoloExpr, p) -> Jet3:
    """Value and derivatives to order 3 by nested dual propagation."""
    d = eval_dual(e, p, 3)
    v, d1, d2, d3 = dual_derivatives(d, 3)
    return Jet3(complex(v), d1, d2, d3)


def eval_values(e: HoloExpr, pts) -> np.ndarray:
    """Plain complex evaluation, vectorised over the leading axes of ``pts``."""
    pts = np.asarray(pts, dtype=complex)
    inputs = [pts[..., i] for i in range(e.n)]
    out = evaluate(e.ast, inputs, dual.ComplexAlgebra)
    return np.broadcast_to(np.asarray(out, dtype=complex), pts.shape[:-1]).copy()


# -- finite-difference oracle ---------------------------------------------------

def stencil(n: int, step: float, points_per_axis: int = 8):
    """Offsets on a polycircle: ``step * w^k`` per axis, ``w`` a root of unity."""
    w = step * np.exp(2j * np.pi * np.arange(points_per_axis) / points_per_axis)
    grids = np.meshgrid(*([w] * n), indexing="ij")
    return np.stack(grids, axis=-1)


def fd_taylor(values: np.ndarray, n: int, step: float, order: int = 3) -> list[np.ndarray]:
    """Recover partial derivatives from samples on :func:`stencil`.

    With ``N`` samples per axis the discrete Fourier transform returns the
    Taylor coefficients ``c_alpha * step^|alpha|`` up to aliasing of order
    ``step^N``.  For ``N = 2`` this is the ordinary central difference.
    Trailing axes of ``values`` beyond the first ``n`` are carried along; the
    derivative axes are appended after them.
    """
    N = values.shape[0]
    extra = values.shape[n:]
    coef = np.fft.fftn(values, axes=tuple(range(n))) / N**n
    out = []
    for k in range(order + 1):
        t = np.zeros(extra + (n,) * k, dtype=complex)
        for idx in itertools.product(range(n), repeat=k):
            alpha = [0] * n
            for i in idx:
                alpha[i] += 1
            fact = math.prod(math.factorial(a) for a in alpha)
            t[(Ellipsis,) + idx] = coef[tuple(alpha)] * fact / step**k
        out.append(t)
    return out


def fd_oracle_jet(e: HoloExpr, p, step: float = 1e-3, points_per_axis: int = 8) -> Jet3:
    """Complex finite-difference approximation of :func:`eval_jet3`.

    Samples ``e`` on a small polycircle of radius ``step`` around ``p``; it only
    uses function values, so it is independent of the dual-number path.
    """
    if not 1e-6 <= step <= 1e-2:
        raise ValueError("step must lie in [1e-6, 1e-2]")
    p = np.asarray(p, dtype=complex)
    pts = p + stencil(e.n, step, points_per_axis)
    vals = eval_values(e, pts)
    v, d1, d2, d3 = fd_taylor(vals, e.n, step)
    return Jet3(complex(v), d1, d2, d3)
