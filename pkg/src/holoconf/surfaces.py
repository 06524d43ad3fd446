"""Totally geodesic surfaces, their projective structure and cross-ratios.

For a totally geodesic surface ``S`` the ambient Levi-Civita connection
restricts to a torsion-free connection on ``TS``, and ``TS`` is parallel
along ``S``.  Consequently the surface curvature and its covariant
derivative are the ambient ``R`` and ``nabla R`` restricted to ``TS``, and the
traces below are traces of endomorphisms of ``TS`` written in the
coordinate basis ``d sigma / d s_a``.

Sign convention: with ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`` we take

    K(Y) X = tr(Z -> R(Z, Y) X)        (the Ricci contraction of S)

which equals ``tr R(Y, .) X`` for the opposite curvature sign.  With it the
identity ``K(Y) X = h(X, Y)`` holds on beta-surfaces of self-dual manifolds.
The Thomas tensor is

    T(X,Y,Z) = -2 (nabla_Z K)(Y) X + 2 (nabla_Y K)(Z) X
               - (nabla_Z K)(X) Y + (nabla_Y K)(X) Z.

Some references use a different overall sign or ordering; the projective
flatness test ``T = 0`` is insensitive to that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dual
from .curvature import christoffel, contract, curvature, norm
from .expr import evaluate, parse
from .isotropic import classify_plane
from .jets import dual_derivatives

TOTALLY_GEODESIC_TOL = 1e-6


class NotTotallyGeodesicError(ValueError):
    """The surface bends out of itself at the requested point."""


class CoincidentPointsError(ValueError):
    """Cross-ratio of points that are not four distinct collinear points."""


@dataclass(frozen=True)
class EmbeddedSurface:
    """``sigma : C^2 -> C^n`` given by one expression per ambient coordinate."""

    sigma: tuple
    domain: tuple = ((-0.5, 0.5), (-0.5, 0.5))
    name: str = ""

    @classmethod
    def from_strings(cls, exprs, **kw):
        return cls(tuple(parse(e, 2, prefix="s") for e in exprs), **kw)

    def jets(self, q, order: int = 2):
        """``[sigma, d sigma, dd sigma]`` with ambient index first."""
        q = np.asarray(q, dtype=complex)
        inputs = dual.seed_point(q, order)
        alg = dual.DualAlgebra(order, 2)
        parts = [dual_derivatives(evaluate(e.ast, inputs, alg), order) for e in self.sigma]
        return [np.stack([p[k] for p in parts]) for k in range(order + 1)]

    def point(self, q) -> np.ndarray:
        return self.jets(q, 0)[0]

    def sample(self, rng, k: int) -> np.ndarray:
        (a0, a1), (b0, b1) = self.domain
        re = rng.uniform([a0, b0], [a1, b1], size=(k, 2))
        im = rng.uniform([a0, b0], [a1, b1], size=(k, 2))
        return re + 0.3j * im

    def rank_check(self, q) -> float:
        """Smallest singular value of ``d sigma`` divided by the largest."""
        s = np.linalg.svd(self.jets(q, 1)[1], compute_uv=False)
        return float(s[-1] / s[0])


def _tangent_coords(T, vecs):
    """Least-squares coordinates of ``vecs`` (columns) in the basis ``T``."""
    coef, *_ = np.linalg.lstsq(T, vecs, rcond=None)
    resid = np.linalg.norm(T @ coef - vecs, axis=0)
    return coef, resid


@dataclass
class SurfaceGeometry:
    point: np.ndarray
    tangent: np.ndarray  # n x 2
    christoffel: np.ndarray  # [c, a, b]
    geodesic_residual: float
    k: np.ndarray  # k[y, x] = K(Y) X
    nabla_k: np.ndarray  # nabla_k[d, y, x] = (nabla_D K)(Y) X
    invariance_residual: float  # how far R and nabla R leave TS
    report: object


def induced_connection(m, S: EmbeddedSurface, q, check: bool = True):
    """Christoffel symbols of the connection induced on ``S`` at ``q``.

    Returns ``(gamma_S, residual)`` where ``gamma_S[c, a, b]`` are the surface
    coordinates of ``nabla_{d_a} d_b`` and ``residual`` measures the part of
    ``nabla_{d_a} d_b`` outside ``TS`` relative to its size.
    """
    x, T, H = S.jets(q, 2)
    gam = christoffel(m, x)
    acc = H + np.einsum("kij,ia,jb->kab", gam, T, T)
    flat = acc.reshape(len(x), 4)
    coef, res = _tangent_coords(T, flat)
    residual = float(np.max(res) / max(1.0, norm(flat)))
    if check and residual > TOTALLY_GEODESIC_TOL:
        raise NotTotallyGeodesicError(f"normal part of nabla_X Y is {residual:.3e}")
    return coef.reshape(2, 2, 2), residual


def surface_geometry(m, S: EmbeddedSurface, q, orientation=None) -> SurfaceGeometry:
    x, T, _ = S.jets(q, 2)
    gS, res = induced_connection(m, S, q)
    r = curvature(m, x, orientation)
    # R(Z, Y) X as vectors for Z, Y, X in the tangent basis: riem[z, y, x, l]
    R = contract("ijkl,ia,jb,kc,lm->abcm", r.riem, T, T, T, r.ginv)
    nR = contract("ijklf,ia,jb,kc,lm,fd->abcmd", r.nabla_riem, T, T, T, r.ginv, T)
    Rc, r1 = _tangent_coords(T, R.reshape(-1, len(x)).T)
    nRc, r2 = _tangent_coords(T, np.moveaxis(nR, 3, -1).reshape(-1, len(x)).T)
    scale = max(1.0, norm(R), norm(nR))
    inv_res = float(max(np.max(r1), np.max(r2)) / scale)
    Rc = Rc.T.reshape(2, 2, 2, 2)  # [z, y, x, component]
    nRc = nRc.T.reshape(2, 2, 2, 2, 2)  # [z, y, x, d, component]
    k = np.einsum("zyxz->yx", Rc)
    nk = np.einsum("zyxdz->dyx", nRc)
    return SurfaceGeometry(x, T, gS, res, k, nk, inv_res, r)


def k_tensor(m, S: EmbeddedSurface, q, orientation=None) -> np.ndarray:
    """``k[y, x] = K(Y) X`` in the surface coordinate basis."""
    return surface_geometry(m, S, q, orientation).k


def thomas_from_nabla_k(nk: np.ndarray) -> np.ndarray:
    """``T[x, y, z]`` from ``nk[d, y, x] = (nabla_D K)(Y) X``.

    The coefficient pattern is ``(-2, +2, -1, +1)``.  Other references use the
    opposite overall sign or swap the roles of ``Y`` and ``Z``; vanishing, and
    hence projective flatness, does not depend on the variant.
    """
    return (
        -2 * np.einsum("zyx->xyz", nk)
        + 2 * np.einsum("yzx->xyz", nk)
        - np.einsum("zxy->xyz", nk)
        + np.einsum("yxz->xyz", nk)
    )


def thomas_tensor(m, S: EmbeddedSurface, q, orientation=None) -> np.ndarray:
    """Thomas tensor ``T[x, y, z] = T(X, Y, Z)`` in surface coordinates."""
    return thomas_from_nabla_k(surface_geometry(m, S, q, orientation).nabla_k)


def restricted_cotton(m, S: EmbeddedSurface, q, orientation=None) -> np.ndarray:
    """Ambient ``C(Y, Z)(X)`` on tangent vectors of ``S``, as ``c[x, y, z]``."""
    x, T = S.jets(q, 1)
    r = curvature(m, x, orientation)
    return contract("yzx,ya,zb,xc->cab", r.cotton, T, T, T)


def _ratio(a: float, ref: float) -> float:
    # a flat ambient gives ref == 0 and then every numerator is 0 as well
    return a / ref if ref > 0 else a


def beta_surface_check(m, S: EmbeddedSurface, q, orientation=None) -> dict:
    """Residuals for one sample point of a beta-surface fixture."""
    x, T = S.jets(q, 1)
    pc = classify_plane(m, x, T[:, 0], T[:, 1], orientation)
    geo = surface_geometry(m, S, q, orientation)
    r = geo.report
    h = np.einsum("ab,ax,by->xy", r.h, T, T)
    Tt = thomas_from_nabla_k(geo.nabla_k)
    C3 = 3 * contract("yzx,ya,zb,xc->cab", r.cotton, T, T, T)
    # residuals are measured against the ambient curvature scale seen by TS,
    # since on Einstein ambients both K and h vanish on isotropic planes
    tn = norm(T)
    ref_k = max(norm(geo.k), norm(h), norm(r.riem) * tn**2)
    ref_t = max(norm(geo.nabla_k), norm(r.nabla_riem) * tn**3, norm(r.riem) * tn**3)
    return {
        "label": pc.label,
        "geodesic_residual": geo.geodesic_residual,
        "invariance_residual": geo.invariance_residual,
        "k_minus_h": _ratio(norm(geo.k - h.T), ref_k),
        "thomas_norm": _ratio(norm(Tt), ref_t),
        "thomas_minus_3c": _ratio(norm(Tt - C3), ref_t),
    }


# -- beta-surfaces of the projective-plane example ----------------------------

def cp2_beta_surface(L=(1.0, 0.3, -0.2), d=(1.0, -0.4, 0.5), nb_dir=(0.2, 1.0, 0.7)):
    """The surface ``{(A, a) : A in l, L in a}`` for the flag ``(L, l = L v d)``.

    Parameters ``(s1, s2) = (t, s)``: ``A = d + t L`` runs over ``l`` (with
    ``L`` at ``t = infinity``) and ``a = ker(n_b + s m)`` runs over the pencil
    of lines through ``L`` (with ``l = ker m`` at ``s = infinity``).  Here
    ``m = L x d`` and ``n_b = L x nb_dir``.  Because ``(n_b + s m) . (d + t L)
    = n_b . d`` is constant the surface never meets the incidence divisor.

    Returns ``(surface, data)``; ``data`` holds ``L``, ``d``, ``m``, ``n_b``.
    """
    L, d, nb_dir = (np.asarray(v, dtype=float) for v in (L, d, nb_dir))
    m_ = np.cross(L, d)
    nb = np.cross(L, nb_dir)
    if abs(nb @ d) < 1e-6:
        raise ValueError("degenerate flag data: n_b . d = 0")

    def lin(a, b, var):
        return f"({float(a)!r} + {float(b)!r}*{var})"

    x = [f"{lin(d[k], L[k], 's1')}/{lin(d[0], L[0], 's1')}" for k in (1, 2)]
    y = [f"{lin(nb[k], m_[k], 's2')}/{lin(nb[0], m_[0], 's2')}" for k in (1, 2)]
    S = EmbeddedSurface.from_strings(x + y, domain=((-0.4, 0.4), (-0.4, 0.4)), name="cp2_beta")
    return S, {"L": L, "d": d, "m": m_, "nb": nb}


def cp2_beta_parameters(z, data):
    """Recover ``(t, s)`` of a chart point lying on :func:`cp2_beta_surface`."""
    z = np.asarray(z, dtype=complex)
    A = np.concatenate([[1.0], z[:2]])
    n = np.concatenate([[1.0], z[2:]])
    # lambda * A = d + t L   ->  [A, -L] (lambda, t) = d
    (lam, t), *_ = np.linalg.lstsq(np.stack([A, -data["L"]], axis=1), data["d"].astype(complex), rcond=None)
    (mu, s), *_ = np.linalg.lstsq(np.stack([n, -data["m"]], axis=1), data["nb"].astype(complex), rcond=None)
    return complex(t), complex(s)


def cross_ratio(p1, p2, p3, p4, tol: float = 1e-12) -> complex:
    """``(p1, p2; p3, p4) = [p1 p3][p2 p4] / ([p1 p2][p3 p4])``.

    Points may be affine numbers (``None`` or ``inf`` meaning infinity),
    homogeneous pairs in ``C^2``, or collinear points of ``P^2`` given as
    vectors in ``C^3`` (lines through a point are handled by passing their
    covectors).  The normalization gives ``(0, 1; lam, inf) = lam``.
    """
    pts = [_homog(p) for p in (p1, p2, p3, p4)]
    dim = {len(p) for p in pts}
    if len(dim) != 1:
        raise ValueError("mixed point representations")
    if dim == {2}:
        def br(a, b):
            return a[0] * b[1] - a[1] * b[0]
    else:
        a, b = pts[0], pts[1]
        ref = np.conj(np.cross(a, b))
        if np.linalg.norm(ref) <= tol * np.linalg.norm(a) * np.linalg.norm(b):
            raise CoincidentPointsError("first two points coincide")
        for c in pts[2:]:
            if abs(np.linalg.det(np.stack([a, b, c]))) > 1e-8 * np.linalg.norm(ref) * np.linalg.norm(c):
                raise ValueError("points are not collinear")

        def br(u, w):
            return np.linalg.det(np.stack([u, w, ref]))
    num = br(pts[0], pts[2]) * br(pts[1], pts[3])
    den = br(pts[0], pts[1]) * br(pts[2], pts[3])
    scale = np.prod([np.linalg.norm(p) for p in pts])
    if abs(den) <= tol * scale * (1 if dim == {2} else np.linalg.norm(ref) ** 2):
        raise CoincidentPointsError("cross-ratio of coincident points")
    return complex(num / den)


def _homog(p):
    if p is None:
        return np.array([1.0, 0.0], dtype=complex)
    if np.ndim(p) == 0:
        if np.isinf(abs(p)):
            return np.array([1.0, 0.0], dtype=complex)
        return np.array([p, 1.0], dtype=complex)
    return np.asarray(p, dtype=complex)
