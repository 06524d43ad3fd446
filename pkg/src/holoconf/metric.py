"""Holomorphic metrics on a chart and the jets needed by the curvature code.

Two kinds of metric share one interface:

* :class:`MetricField` -- components ``g_ij`` given as expressions, with an
  optional conformal factor ``f`` meaning ``e^{2f} g``;
* :class:`InducedMetric` -- the pullback of an ambient metric along a
  holomorphic embedding given by expressions.

Both provide ``values`` (vectorised evaluation), ``jets`` (exact derivatives
by nested duals) and ``fd_jets`` (the finite-difference oracle).  Jet tensors
keep the metric indices first and put derivative indices last:
``jets(p)[2][i, j, a, b] = d_a d_b g_ij``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dual
from .expr import Call, DomainError, HoloExpr, Mul, Num, evaluate, parse
from .jets import dual_derivatives, fd_taylor, stencil

# |det g| below this (relative to the entry scale^n) counts as singular
SINGULAR_TOL = 1e-12
# number of segments used to continue sqrt(det g) from the basepoint
BRANCH_STEPS = 32


class SingularMetricError(ArithmeticError):
    """The metric is degenerate (or undefined) at the requested point."""


class FrameError(ArithmeticError):
    """Orthonormal frame construction kept hitting isotropic pivots."""


def check_nondegenerate(g: np.ndarray) -> None:
    scale = max(float(np.max(np.abs(g))), 1e-300)
    d = np.linalg.det(g)
    if not np.isfinite(d) or abs(d) <= SINGULAR_TOL * scale ** g.shape[0]:
        raise SingularMetricError(f"metric is singular (|det g| = {abs(d):.3e})")


class _MetricBase:
    """Shared derived operations; subclasses provide the dual matrix."""

    n: int
    orientation: int
    basepoint: np.ndarray

    # subclasses implement these two
    def _dual_matrix(self, p, level: int):  # pragma: no cover - interface
        raise NotImplementedError

    def values(self, pts) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def at(self, p) -> np.ndarray:
        g = self.values(np.asarray(p, dtype=complex))
        check_nondegenerate(g)
        return g

    def jets(self, p, order: int = 3) -> list[np.ndarray]:
        """``[g, dg, ddg, ...]`` at ``p`` by nested dual numbers."""
        p = np.asarray(p, dtype=complex)
        try:
            mat = self._dual_matrix(p, order)
        except DomainError as exc:
            raise SingularMetricError(str(exc)) from exc
        n = self.n
        out = [np.zeros((n, n) + (n,) * k, dtype=complex) for k in range(order + 1)]
        for i in range(n):
            for j in range(i, n):
                parts = dual_derivatives(mat[i][j], order)
                for k in range(order + 1):
                    out[k][i, j] = parts[k]
                    out[k][j, i] = parts[k]
        check_nondegenerate(out[0])
        return out

    def fd_jets(self, p, step: float = 1e-2, points_per_axis: int = 8, order: int = 3):
        """Finite-difference counterpart of :meth:`jets` (values only)."""
        p = np.asarray(p, dtype=complex)
        pts = p + stencil(self.n, step, points_per_axis)
        try:
            vals = self.values(pts)
        except DomainError as exc:
            raise SingularMetricError(str(exc)) from exc
        out = fd_taylor(vals, self.n, step, order)
        check_nondegenerate(out[0])
        return out

    def sqrt_det(self, p) -> complex:
        """``sqrt(det g)`` continued from the basepoint along a straight path.

        The principal branch is taken at the basepoint; along the segment
        to ``p`` the sign is chosen to stay continuous.  ``orientation`` is
        not applied here.
        """
        p = np.asarray(p, dtype=complex)
        t = np.linspace(0.0, 1.0, BRANCH_STEPS + 1)[:, None]
        path = self.basepoint[None, :] * (1 - t) + p[None, :] * t
        try:
            dets = np.linalg.det(self.values(path))
        except DomainError as exc:
            raise SingularMetricError(f"branch path leaves the domain: {exc}") from exc
        roots = np.sqrt(dets)
        prev = roots[0]
        for r in roots[1:]:
            if abs(r - prev) > abs(r + prev):
                r = -r
            prev = r
        return complex(prev)

    def frame(self, p, seed: int = 0) -> np.ndarray:
        """Positively oriented orthonormal frame at ``p`` (columns)."""
        g = self.at(p)
        E = orthonormal_frame(g, seed=seed)
        vol = self.orientation * self.sqrt_det(p) * np.linalg.det(E)
        if abs(vol + 1) < abs(vol - 1):
            E[:, -1] = -E[:, -1]
        return E


@dataclass(frozen=True, eq=False)
class MetricField(_MetricBase):
    """A holomorphic metric on a coordinate chart of ``C^n``.

    ``entries`` maps index pairs ``(i, j)`` with ``i <= j`` (0-based) to
    expressions; missing pairs are zero.  ``conformal_factor`` ``f`` means the
    metric actually used is ``e^{2f} g``.
    """

    n: int
    entries: dict
    conformal_factor: HoloExpr | None = None
    basepoint: np.ndarray = field(default=None)
    orientation: int = 1
    name: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("chart dimension must be at least 2")
        norm = {}
        for (i, j), e in self.entries.items():
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"entry ({i},{j}) outside a {self.n}x{self.n} metric")
            if e.n != self.n:
                raise ValueError("entry expression has the wrong chart dimension")
            key = (min(i, j), max(i, j))
            if key in norm:
                raise ValueError(f"entry {key} given twice")
            norm[key] = e
        object.__setattr__(self, "entries", norm)
        bp = np.zeros(self.n, complex) if self.basepoint is None else np.asarray(self.basepoint, complex)
        object.__setattr__(self, "basepoint", bp)
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    @classmethod
    def from_strings(cls, n: int, entries: dict, conformal_factor: str | None = None, **kw):
        parsed = {k: parse(v, n) for k, v in entries.items()}
        f = parse(conformal_factor, n) if conformal_factor else None
        return cls(n, parsed, f, **kw)

    def _effective(self):
        out = {}
        for key, e in self.entries.items():
            node = e.ast
            if self.conformal_factor is not None:
                node = Mul(Call("exp", Mul(Num(2), self.conformal_factor.ast)), node)
            out[key] = node
        return out

    def _dual_matrix(self, p, level):
        inputs = dual.seed_point(p, level)
        alg = dual.DualAlgebra(level, self.n, p.shape[:-1])
        zero = alg.const(0)
        eff = self._effective()
        mat = [[zero] * self.n for _ in range(self.n)]
        for (i, j), node in eff.items():
            mat[i][j] = mat[j][i] = evaluate(node, inputs, alg)
        return mat

    def values(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        inputs = [pts[..., i] for i in range(self.n)]
        out = np.zeros(pts.shape[:-1] + (self.n, self.n), dtype=complex)
        for (i, j), node in self._effective().items():
            v = evaluate(node, inputs, dual.ComplexAlgebra)
            out[..., i, j] = v
            out[..., j, i] = v
        return out

    def rescaled(self, f: HoloExpr) -> "MetricField":
        """``e^{2f}`` times this metric (factors compose additively)."""
        if self.conformal_factor is not None:
            from .expr import Add

            f = HoloExpr(Add(self.conformal_factor.ast, f.ast), self.n)
        return MetricField(self.n, self.entries, f, self.basepoint, self.orientation, self.name)

    def with_orientation(self, orientation: int) -> "MetricField":
        return MetricField(
            self.n, self.entries, self.conformal_factor, self.basepoint, orientation, self.name
        )


@dataclass(frozen=True, eq=False)
class InducedMetric(_MetricBase):
    """Pullback ``G = d(iota)^T g d(iota)`` of ``ambient`` along ``embedding``.

    ``embedding`` lists one expression per ambient coordinate, each over the
    ``n`` parameters of the submanifold.
    """

    ambient: MetricField
    embedding: tuple
    basepoint: np.ndarray = field(default=None)
    orientation: int = 1

    def __post_init__(self):
        if len(self.embedding) != self.ambient.n:
            raise ValueError("embedding needs one expression per ambient coordinate")
        ns = {e.n for e in self.embedding}
        if len(ns) != 1:
            raise ValueError("embedding expressions must share one parameter space")
        bp = self.basepoint
        bp = np.zeros(self.n, complex) if bp is None else np.asarray(bp, complex)
        object.__setattr__(self, "basepoint", bp)

    @property
    def n(self) -> int:
        return self.embedding[0].n

    def embed(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=complex)
        inputs = [q[..., i] for i in range(self.n)]
        return np.stack(
            [np.broadcast_to(evaluate(e.ast, inputs, dual.ComplexAlgebra), q.shape[:-1]) for e in self.embedding],
            axis=-1,
        )

    def embedding_jets(self, q, order: int = 2) -> list[np.ndarray]:
        """``[iota, d iota, dd iota, ...]``; ambient index first, derivatives last."""
        q = np.asarray(q, dtype=complex)
        inputs = dual.seed_point(q, order)
        alg = dual.DualAlgebra(order, self.n, q.shape[:-1])
        parts = [dual_derivatives(evaluate(e.ast, inputs, alg), order) for e in self.embedding]
        return [np.stack([pt[k] for pt in parts]) for k in range(order + 1)]

    def _dual_matrix(self, q, level):
        inputs = dual.seed_point(q, level + 1)
        alg = dual.DualAlgebra(level + 1, self.n, q.shape[:-1])
        iota = [evaluate(e.ast, inputs, alg) for e in self.embedding]

        def trunc(d, k):
            # drop the innermost nesting level, keeping component k of it
            return dual.Dual(d.data[(Ellipsis,) + (slice(None),) * level + (k,)], level)

        base = [trunc(d, 0) for d in iota]
        tang = [[trunc(d, a + 1) for a in range(self.n)] for d in iota]
        amb = self.ambient
        gm = [[None] * amb.n for _ in range(amb.n)]
        alg_l = dual.DualAlgebra(level, self.n, q.shape[:-1])
        zero = alg_l.const(0)
        for i in range(amb.n):
            for j in range(amb.n):
                gm[i][j] = zero
        for (i, j), node in amb._effective().items():
            gm[i][j] = gm[j][i] = evaluate(node, base, alg_l)
        out = [[None] * self.n for _ in range(self.n)]
        for a in range(self.n):
            for b in range(a, self.n):
                acc = zero
                for i in range(amb.n):
                    for j in range(amb.n):
                        acc = acc + gm[i][j] * tang[i][a] * tang[j][b]
                out[a][b] = out[b][a] = acc
        return out

    def values(self, qs) -> np.ndarray:
        qs = np.asarray(qs, dtype=complex)
        x, dx = self.embedding_jets(qs, 1)
        # x: (N_amb, ...) ; dx: (N_amb, ..., n)
        x = np.moveaxis(x, 0, -1)
        dx = np.moveaxis(dx, 0, -2)
        g = self.ambient.values(x)
        return np.einsum("...ia,...ij,...jb->...ab", dx, g, dx)


def orthonormal_frame(g: np.ndarray, seed: int = 0, max_attempts: int = 8) -> np.ndarray:
    """Gram-Schmidt over C with pivoting on ``|g(v, v)|``.

    Returns a matrix whose columns ``e_k`` satisfy ``g(e_i, e_j) = delta_ij``.
    When every remaining candidate is (nearly) isotropic the candidates are
    mixed by a random shear and pivoting is retried.
    """
    n = g.shape[0]
    rng = np.random.default_rng(seed)
    cand = [np.eye(n, dtype=complex)[:, k] for k in range(n)]
    frame = []
    for _ in range(n):
        for attempt in range(max_attempts + 1):
            scores = [abs(v @ g @ v) / max(np.vdot(v, v).real, 1e-300) for v in cand]
            k = int(np.argmax(scores))
            if scores[k] >= 1e-10:
                break
            if attempt == max_attempts:
                raise FrameError("isotropic pivot persisted after randomized shears")
            mix = np.eye(len(cand)) + rng.standard_normal((len(cand), len(cand)))
            mix = mix + 1j * rng.standard_normal((len(cand), len(cand)))
            cand = [sum(mix[r, c] * cand[c] for c in range(len(cand))) for r in range(len(cand))]
        v = cand.pop(k)
        e = v / np.sqrt(v @ g @ v)
        frame.append(e)
        cand = [w - (w @ g @ e) * e for w in cand]
    return np.stack(frame, axis=1)
