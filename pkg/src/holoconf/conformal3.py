"""Dimension-3 conformal geometry and hypersurfaces of 4-manifolds.

Frames along a hypersurface ``Q`` are written ``(X, Y, Z, nu)`` with ``nu``
the unit normal; ``(X, Y, Z)`` is taken positively oriented on ``Q`` exactly
when ``(X, Y, Z, nu)`` is positively oriented in the ambient manifold.  The
bracket ``<R(A, B) C, D>`` below is ``riem[A, B, C, D]`` in the conventions
of :mod:`holoconf.curvature`, and likewise for ``W+`` and ``W-``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import christoffel, contract, curvature, norm, rel_err
from .expr import HoloExpr, parse
from .metric import InducedMetric, MetricField, orthonormal_frame

PAIRS3 = [(0, 1), (0, 2), (1, 2)]
FRAME_TOL = 1e-10
UMBILIC_TOL = 1e-8
SELF_DUAL_TOL = 1e-7
WITNESS_STATUS = "unverified — no desk-scale witness metric"


class DegenerateHypersurfaceError(ValueError):
    """The induced metric is degenerate: ``TQ`` is tangent to the isotropy cone."""


class PreconditionError(ValueError):
    """A hypothesis of the identity fails at the sample; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


# -- dimension 3 ----------------------------------------------------------------

def cotton3(m3, p, method: str = "ad") -> np.ndarray:
    """``C(X, Y)(Z) = (nabla_X h)(Y, Z) - (nabla_Y h)(X, Z)`` with ``h = Ric - Scal g / 4``."""
    if m3.n != 3:
        raise ValueError("cotton3 needs a 3-dimensional metric")
    return curvature(m3, p, method=method).cotton


def star_r_matrices(m3, p):
    """``(*R*, -h + tr(h) I)`` as 3x3 matrices in an orthonormal frame."""
    if m3.n != 3:
        raise ValueError("the identity is specific to dimension 3")
    r = curvature(m3, p)
    E = orthonormal_frame(r.g)
    Rf = contract("ia,jb,kc,ld,ijkl->abcd", E, E, E, E, r.riem)
    M = np.empty((3, 3), dtype=complex)
    for I, (a, b) in enumerate(PAIRS3):
        for J, (c, d) in enumerate(PAIRS3):
            M[I, J] = Rf[a, b, d, c]
    # Hodge star Lambda^2 -> Lambda^1: *(e1^e2) = e3, *(e1^e3) = -e2, *(e2^e3) = e1
    S = np.zeros((3, 3))  # S[k, I]: component k of *e_I
    S[2, 0], S[1, 1], S[0, 2] = 1.0, -1.0, 1.0
    star_r = S @ M.T @ S.T  # endomorphism of Lambda^1 in the frame
    hf = E.T @ r.h @ E
    return star_r, -hf + np.trace(hf) * np.eye(3)


def star_r_identity(m3, p) -> float:
    """Relative residual of ``*R* = -h + (tr h) I``."""
    a, b = star_r_matrices(m3, p)
    return rel_err(a, b)


# -- 4-manifolds: Weyl components in an adapted frame ---------------------------

def check_frame(g, frame, sqrt_det=None, orientation=1):
    """Raise unless ``frame`` (columns) is orthonormal and, if given, oriented."""
    gram = frame.T @ g @ frame
    err = float(np.max(np.abs(gram - np.eye(len(g)))))
    if err > FRAME_TOL * max(1.0, float(np.max(np.abs(g)))):
        raise ValueError(f"frame is not orthonormal (error {err:.3e})")
    if sqrt_det is not None:
        vol = orientation * sqrt_det * np.linalg.det(frame)
        if abs(vol - 1) > 1e-8:
            raise ValueError("frame is not positively oriented")


def w_components(r, X, Y, Z, nu):
    """lhs and rhs of the two frame formulas for ``<W+-(X,Y)Z, X>``."""
    R = r.riem

    def q(T, a, b, c, d):
        return complex(np.einsum("ijkl,i,j,k,l->", T, a, b, c, d))

    base = q(R, X, Y, Z, X) + q(R, Z, nu, Y, nu)
    mixed = q(R, X, Y, Y, nu) + q(R, Z, nu, Z, X)
    return (
        q(r.weyl_plus, X, Y, Z, X), 0.25 * (base + mixed),
        q(r.weyl_minus, X, Y, Z, X), 0.25 * (base - mixed),
    )


def w_component_formulas(m4, p, frame, orientation=None):
    """``(lhs+, rhs+, lhs-, rhs-)`` for the oriented orthonormal frame ``(X, Y, Z, nu)``."""
    orientation = m4.orientation if orientation is None else orientation
    r = curvature(m4, p, orientation)
    check_frame(r.g, frame, r.sqrt_det, orientation)
    return w_components(r, *frame.T)


def random_oriented_frame(m4, p, rng, orientation=None):
    """A random positively oriented orthonormal frame at ``p``."""
    orientation = m4.orientation if orientation is None else orientation
    E = m4.frame(p)
    if orientation != m4.orientation:
        E[:, -1] = -E[:, -1]
    # a random complex rotation: Cayley transform of a skew matrix
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    A = 0.3 * (A - A.T)
    Q = np.linalg.solve(np.eye(4) - A, np.eye(4) + A)
    return E @ Q


def w_plus_riemann_identity(r, X, Y, Z, nu):
    """``<W+(X,Y)Z,X>`` vs ``1/2 (<R(X,Y)Y,nu> + <R(Z,X)Z,nu>)`` (needs ``W- = 0``)."""
    def q(T, a, b, c, d):
        return complex(np.einsum("ijkl,i,j,k,l->", T, a, b, c, d))

    return q(r.weyl_plus, X, Y, Z, X), 0.5 * (q(r.riem, X, Y, Y, nu) + q(r.riem, Z, X, Z, nu))


def tangential_riemann_sum(r, X, Y, Z, nu) -> complex:
    """``<R(X,Y)Z,X> + <R(Z,nu)Y,nu>`` (zero on a totally geodesic ``Q`` of a self-dual ``M``)."""
    return complex(
        np.einsum("ijkl,i,j,k,l->", r.riem, X, Y, Z, X) + np.einsum("ijkl,i,j,k,l->", r.riem, Z, nu, Y, nu)
    )


# -- hypersurfaces ----------------------------------------------------------------

@dataclass(frozen=True)
class Hypersurface:
    """``iota : C^3 -> C^4`` inside ``ambient``; ``level_set`` optionally gives ``F``
    with ``Q = {F = 0}``, used for the normal ``grad F``."""

    ambient: MetricField
    embedding: tuple
    level_set: HoloExpr | None = None
    name: str = ""

    @classmethod
    def from_strings(cls, ambient, exprs, level_set: str | None = None, name: str = ""):
        emb = tuple(parse(e, 3, prefix="q") for e in exprs)
        F = parse(level_set, 4) if level_set else None
        return cls(ambient, emb, F, name)

    def induced(self) -> InducedMetric:
        return InducedMetric(self.ambient, self.embedding, orientation=1)

    def point(self, q) -> np.ndarray:
        return self.induced().embed(np.asarray(q, dtype=complex))

    def tangent(self, q) -> np.ndarray:
        return self.induced().embedding_jets(q, 1)[1]

    def normal(self, q) -> np.ndarray:
        """Unit normal ``nu = g^{-1} n / sqrt(n g^{-1} n)`` (principal root)."""
        x = self.point(q)
        g = self.ambient.at(x)
        if self.level_set is not None:
            from .jets import eval_jet3

            n = eval_jet3(self.level_set, x).first
        else:
            T = self.tangent(q)
            _, _, vh = np.linalg.svd(T.T)
            n = np.conj(vh[-1])
        gn = np.linalg.solve(g, n)
        nn = n @ gn
        if abs(nn) < 1e-12 * max(1.0, float(np.vdot(n, n).real)):
            raise DegenerateHypersurfaceError("normal is isotropic: Q is tangent to the isotropy cone")
        return gn / np.sqrt(nn)

    def adapted_frame(self, q, orientation=None):
        """``(X, Y, Z, nu)`` with ``(X, Y, Z)`` orthonormal on ``Q`` and the whole frame oriented.

        Returns the 4x4 ambient frame and the 3x3 frame in parameter space.
        """
        orientation = self.ambient.orientation if orientation is None else orientation
        ind = self.induced()
        G = ind.at(q)
        Eq = orthonormal_frame(G)
        T = self.tangent(q)
        nu = self.normal(q)
        F = np.column_stack([T @ Eq, nu])
        x = self.point(q)
        vol = orientation * self.ambient.sqrt_det(x) * np.linalg.det(F)
        if abs(vol + 1) < abs(vol - 1):
            Eq[:, 2] = -Eq[:, 2]
            F[:, 2] = -F[:, 2]
        return F, Eq


def second_fundamental_form(Q: Hypersurface, q):
    """``(II, G)``: ``II_ab = g(nabla_a d_b, nu)`` and the induced metric."""
    ind = Q.induced()
    x, T, H = ind.embedding_jets(q, 2)
    G = ind.at(q)
    if abs(np.linalg.det(G)) < 1e-12 * max(1.0, float(np.max(np.abs(G)))) ** 3:
        raise DegenerateHypersurfaceError("induced metric is degenerate")
    gam = christoffel(Q.ambient, x)
    acc = H + np.einsum("kij,ia,jb->kab", gam, T, T)
    nu = Q.normal(q)
    g = Q.ambient.at(x)
    II = np.einsum("kab,kl,l->ab", acc, g, nu)
    return II, G


def umbilic_check(m4, Q: Hypersurface, q, tol: float = UMBILIC_TOL):
    """``(II, umbilic, totally_geodesic, lam)`` with ``II = lam G`` when umbilic."""
    if Q.ambient is not m4:
        Q = Hypersurface(m4, Q.embedding, Q.level_set, Q.name)
    II, G = second_fundamental_form(Q, q)
    lam = np.trace(np.linalg.solve(G, II)) / 3
    scale = max(norm(II), norm(G) * abs(lam), 1e-300)
    umb = norm(II - lam * G) <= tol * max(scale, 1.0)
    tg = norm(II) <= tol * max(1.0, norm(G))
    return II, bool(umb), bool(tg), complex(lam)


# -- the normal-derivative identity ---------------------------------------------------

def theorem8_sides(Q: Hypersurface, q, orientation=None):
    """``<nabla_nu W+(X,Y)Z, X>`` and ``-C_Q(X,Y)(Y)`` in the adapted frame."""
    F, Eq = Q.adapted_frame(q, orientation)
    x = Q.point(q)
    r = curvature(Q.ambient, x, orientation)
    X, Y, Z, nu = F.T
    lhs = complex(np.einsum("ijklf,i,j,k,l,f->", r.nabla_weyl_plus, X, Y, Z, X, nu))
    CQ = cotton3(Q.induced(), q)
    a, b = Eq[:, 0], Eq[:, 1]
    rhs = -complex(np.einsum("xyz,x,y,z->", CQ, a, b, b))
    return lhs, rhs, r, F


def check_hypotheses(Q: Hypersurface, q, orientation=None, radius: float = 1e-2,
                     samples: int = 4, seed: int = 0):
    """Residuals of ``W- = 0`` near ``q`` and of total geodesy at ``q``."""
    rng = np.random.default_rng(seed)
    pts = [np.asarray(q, dtype=complex)]
    for _ in range(samples):
        pts.append(pts[0] + radius * (rng.standard_normal(3) + 1j * rng.standard_normal(3)))
    wm = 0.0
    for qq in pts:
        r = curvature(Q.ambient, Q.point(qq), orientation)
        wm = max(wm, norm(r.blocks["Wminus"]) / max(norm(r.blocks["R"]), 1.0))
    II, G = second_fundamental_form(Q, q)
    return wm, norm(II) / max(1.0, norm(G))


def theorem8_identity(m4, Q: Hypersurface, q, orientation=None):
    """``(lhs, rhs, residual)``; raises :class:`PreconditionError` when a hypothesis fails."""
    if Q.ambient is not m4:
        Q = Hypersurface(m4, Q.embedding, Q.level_set, Q.name)
    wm, tg = check_hypotheses(Q, q, orientation)
    if wm > SELF_DUAL_TOL:
        raise PreconditionError("ambient is not self-dual near the sample", wm)
    if tg > 1e-6:
        raise PreconditionError("Q is not totally geodesic for this metric", tg)
    lhs, rhs, _, _ = theorem8_sides(Q, q, orientation)
    return lhs, rhs, abs(lhs - rhs)


def restricted_cotton_residual(Q: Hypersurface, q, orientation=None) -> float:
    """``max |C+(A,B)(C) - C_Q(A,B)(C)|`` over the adapted frame of ``Q``."""
    F, Eq = Q.adapted_frame(q, orientation)
    x = Q.point(q)
    r = curvature(Q.ambient, x, orientation)
    T = F[:, :3]
    cplus = contract("xyz,xa,yb,zc->abc", r.cotton_plus, T, T, T)
    cq = contract("xyz,xa,yb,zc->abc", cotton3(Q.induced(), q), Eq, Eq, Eq)
    return float(np.max(np.abs(cplus - cq)))


def corollary_cumb_check(m4, Q: Hypersurface, q, orientation=None) -> float:
    """Residual of ``C+ = C_Q`` on ``TQ``; enforces the same hypotheses as above."""
    if Q.ambient is not m4:
        Q = Hypersurface(m4, Q.embedding, Q.level_set, Q.name)
    wm, tg = check_hypotheses(Q, q, orientation)
    if wm > SELF_DUAL_TOL:
        raise PreconditionError("ambient is not self-dual near the sample", wm)
    if tg > 1e-6:
        raise PreconditionError("Q is not totally geodesic for this metric", tg)
    return restricted_cotton_residual(Q, q, orientation)


def perturbed_flat(eps: float) -> MetricField:
    """``(1 + 2 eps phi) flat + eps^2 k`` with ``phi`` and ``k`` even under ``z4 -> -z4``.

    The first-order term is conformally flat, so ``W-`` is ``O(eps^2)``; the
    reflection symmetry keeps ``z4 = 0`` totally geodesic for every ``eps``.
    """
    e, e2 = repr(float(eps)), repr(float(eps) ** 2)
    phi = "(z1*z2 + 0.5*z3^2 - 0.3*z4^2 + 0.2*z1^3)"
    k = {
        (0, 0): "z2*z3 + z4^2",
        (0, 1): "0.5*z1*z3 - 0.2*z2^2",
        (0, 3): "0.7*z4*z2",
        (1, 2): "0.3*z1^2 + 0.4*z3*z2",
        (2, 2): "z1*z2 - 0.5*z4^2",
        (2, 3): "0.4*z4*z1",
        (3, 3): "0.6*z2*z3",
    }
    entries = {}
    for i in range(4):
        for j in range(i, 4):
            parts = []
            if i == j:
                parts.append(f"1 + 2*{e}*{phi}")
            if (i, j) in k:
                parts.append(f"{e2}*({k[(i, j)]})")
            if parts:
                entries[(i, j)] = " + ".join(parts)
    return MetricField.from_strings(4, entries, name=f"perturbed_flat({eps})")


def hyperplane(m4, normal=(0, 0, 0, 1), name: str = "") -> Hypersurface:
    """The hyperplane ``{c . z = 0}`` for the covector ``c = normal``.

    It is parameterized by a basis of ``ker c``; for ``c = e4`` the parameters
    are ``(z1, z2, z3)`` themselves.
    """
    c = np.asarray(normal, dtype=float)
    k = int(np.argmax(np.abs(c)))
    basis = []
    for i in range(4):
        if i == k:
            continue
        b = np.zeros(4)
        b[i] = 1.0
        b[k] = -c[i] / c[k]
        basis.append(b)
    exprs = []
    for row in np.array(basis).T:
        terms = [f"{float(x)!r}*q{a + 1}" for a, x in enumerate(row) if x != 0]
        exprs.append(" + ".join(terms) if terms else "0")
    level = " + ".join(f"{float(x)!r}*z{i + 1}" for i, x in enumerate(c) if x != 0)
    return Hypersurface.from_strings(m4, exprs, level_set=level, name=name or f"{level} = 0")


def perturbation_study(eps_values=(1e-2, 1e-3), q=(0.1, -0.05, 0.08)):
    """Restricted-Cotton residuals for :func:`perturbed_flat` and the fitted order in ``eps``."""
    res = []
    for eps in eps_values:
        Q = hyperplane(perturbed_flat(eps))
        res.append(restricted_cotton_residual(Q, np.asarray(q, dtype=complex)))
    e = np.log(np.asarray(eps_values, float))
    r = np.log(np.maximum(res, 1e-300))
    order = float((r[0] - r[-1]) / (e[0] - e[-1])) if len(res) > 1 else float("nan")
    return {"eps": list(eps_values), "residual": res, "order": order}


def scaling_check(Q: Hypersurface, q, lam: complex, orientation=None):
    """Both sides for ``g`` and for ``g' = lam^-2 g`` (so ``nu' = lam nu``).

    Each side must pick up ``s lam^3``.  The adapted frame of ``g'`` is
    ``lam`` times that of ``g`` up to a sign per vector; orientation ties the
    four signs together and ``s = +-1`` is the sign of ``X' / (lam X)``.
    Returns ``(lhs, rhs, lhs', rhs', s)``.
    """
    lhs, rhs, _, _ = theorem8_sides(Q, q, orientation)
    m = Q.ambient
    f = parse(repr(-complex(np.log(complex(lam)))), m.n)
    m2 = m.rescaled(f)
    # keep the orientation continuous: vol' = lam^-4 vol, whichever branch sqrt_det picks
    orientation = m.orientation if orientation is None else orientation
    x = Q.point(q)
    ratio = m2.sqrt_det(x) / (complex(lam) ** -4 * m.sqrt_det(x))
    o2 = orientation if ratio.real > 0 else -orientation
    Q2 = Hypersurface(m2, Q.embedding, Q.level_set, Q.name)
    lhs2, rhs2, _, F2 = theorem8_sides(Q2, q, o2)
    F = Q.adapted_frame(q, orientation)[0]
    s = 1 if (F2[:, 0] @ np.conj(complex(lam) * F[:, 0])).real > 0 else -1
    return lhs, rhs, lhs2, rhs2, s
