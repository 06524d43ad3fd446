"""Curvature of a holomorphic metric at a point.

Conventions (fixed here and pinned by the tests):

* ``R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``;
* ``rup[a, b, c, d] = R^a_{bcd}`` is the component of ``R(d_c, d_d) d_b``;
* ``riem[i, j, k, l] = g(R(d_i, d_j) d_k, d_l)``;
* ``Ric(X, Y) = tr(Z -> R(Z, X) Y)``, positive on spheres;
* covariant derivatives carry the differentiating index last:
  ``nabla_riem[i, j, k, l, f] = (nabla_f Riem)_{ijkl}``;
* ``C(X, Y)(Z) = (nabla_X h)(Y, Z) - (nabla_Y h)(X, Z)``, stored as
  ``cotton[x, y, z]``.

With ``h = Ric/(n-2) - Scal g / (2(n-1)(n-2))`` one has
``Riem = KN(h, g) + W`` where ``KN`` is :func:`kulkarni_nomizu`.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@functools.lru_cache(maxsize=256)
def _path(subscripts: str, shapes: tuple):
    ops = [np.empty(sh) for sh in shapes]
    return np.einsum_path(subscripts, *ops, optimize="greedy")[0]


def contract(subscripts: str, *operands):
    """``np.einsum`` with a contraction order planned once per shape signature."""
    shapes = tuple(np.shape(o) for o in operands)
    return np.einsum(subscripts, *operands, optimize=_path(subscripts, shapes))


def levi_civita_symbol(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


def kulkarni_nomizu(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``(h wedge I)`` as a (0,4) tensor in the ``riem`` slot convention.

    ``KN[i,j,k,l] = h_il g_jk - h_ik g_jl + g_il h_jk - g_ik h_jl``; for the
    unit sphere ``Riem = KN(g/2, g)``.  Extra trailing axes of ``h`` (for
    instance a derivative index) are carried along.
    """
    return (
        np.einsum("il...,jk->ijkl...", h, g)
        - np.einsum("ik...,jl->ijkl...", h, g)
        + np.einsum("il,jk...->ijkl...", g, h)
        - np.einsum("ik,jl...->ijkl...", g, h)
    )


def _inverse_jets(g, dg, ddg):
    G = np.linalg.inv(g)
    dG = -contract("km,mna,nl->kla", G, dg, G)
    ddG = (
        -contract("km,mnab,nl->klab", G, ddg, G)
        + contract("km,mna,np,pqb,ql->klab", G, dg, G, dg, G)
        + contract("km,mnb,np,pqa,ql->klab", G, dg, G, dg, G)
    )
    return G, dG, ddG


def _lower_christoffel(dg):
    # low[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij); trailing axes kept
    return 0.5 * (
        np.einsum("jli...->lij...", dg)
        + np.einsum("ilj...->lij...", dg)
        - np.einsum("ijl...->lij...", dg)
    )


@dataclass
class CurvatureReport:
    """Everything computed at one point.  Arrays follow the module conventions."""

    point: np.ndarray
    n: int
    orientation: int
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    rup: np.ndarray
    riem: np.ndarray
    nabla_riem: np.ndarray
    ric: np.ndarray
    scal: complex
    h: np.ndarray
    nabla_h: np.ndarray
    cotton: np.ndarray
    weyl: np.ndarray
    nabla_weyl: np.ndarray
    sqrt_det: complex
    frame: np.ndarray | None = None
    # dimension 4 only
    star: np.ndarray | None = None  # acting on covariant 2-forms, 4 indices
    proj_plus: np.ndarray | None = None
    proj_minus: np.ndarray | None = None
    weyl_plus: np.ndarray | None = None  # (0,4)
    weyl_minus: np.ndarray | None = None
    nabla_weyl_plus: np.ndarray | None = None
    nabla_weyl_minus: np.ndarray | None = None
    cotton_plus: np.ndarray | None = None
    cotton_minus: np.ndarray | None = None
    div_weyl: np.ndarray | None = None
    div_weyl_plus: np.ndarray | None = None
    div_weyl_minus: np.ndarray | None = None
    blocks: dict = field(default_factory=dict)  # 6x6 endomorphisms of Lambda^2

    def to_json(self) -> dict:
        """JSON-ready dict; complex numbers become ``[re, im]`` pairs."""
        out = {
            "point": _cjson(self.point),
            "n": self.n,
            "orientation": self.orientation,
            "christoffel": _cjson(self.gamma),
            "riemann": _cjson(self.riem),
            "ricci": _cjson(self.ric),
            "scalar": _cjson(self.scal),
            "h": _cjson(self.h),
            "cotton_york": _cjson(self.cotton),
        }
        if self.n == 4:
            out["Wplus"] = _cjson(self.blocks["Wplus"])
            out["Wminus"] = _cjson(self.blocks["Wminus"])
            out["Cplus"] = _cjson(self.cotton_plus)
            out["Cminus"] = _cjson(self.cotton_minus)
            out["norms"] = {
                k: float(np.linalg.norm(self.blocks[k])) for k in ("R", "Wplus", "Wminus")
            }
        return out


def _cjson(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_cjson(x) for x in a]


def curvature_from_jets(jets, n: int, point=None, sqrt_det=None, orientation: int = 1,
                        frame=None) -> CurvatureReport:
    """Run the whole pipeline from ``[g, dg, ddg, dddg]``."""
    g, dg, ddg, dddg = jets
    G, dG, ddG = _inverse_jets(g, dg, ddg)
    low = _lower_christoffel(dg)
    dlow = _lower_christoffel(ddg)
    ddlow = _lower_christoffel(dddg)
    gam = np.einsum("kl,lij->kij", G, low)
    dgam = np.einsum("kla,lij->kija", dG, low) + np.einsum("kl,lija->kija", G, dlow)
    ddgam = (
        np.einsum("klab,lij->kijab", ddG, low)
        + np.einsum("kla,lijb->kijab", dG, dlow)
        + np.einsum("klb,lija->kijab", dG, dlow)
        + np.einsum("kl,lijab->kijab", G, ddlow)
    )

    rup = (
        np.einsum("adbc->abcd", dgam)
        - np.einsum("acbd->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    drup = (
        np.einsum("adbcf->abcdf", ddgam)
        - np.einsum("acbdf->abcdf", ddgam)
        + np.einsum("acef,edb->abcdf", dgam, gam)
        + np.einsum("ace,edbf->abcdf", gam, dgam)
        - np.einsum("adef,ecb->abcdf", dgam, gam)
        - np.einsum("ade,ecbf->abcdf", gam, dgam)
    )
    riem = np.einsum("la,akij->ijkl", g, rup)
    driem = np.einsum("laf,akij->ijklf", dg, rup) + np.einsum("la,akijf->ijklf", g, drup)
    nabla_riem = (
        driem
        - np.einsum("mfi,mjkl->ijklf", gam, riem)
        - np.einsum("mfj,imkl->ijklf", gam, riem)
        - np.einsum("mfk,ijml->ijklf", gam, riem)
        - np.einsum("mfl,ijkm->ijklf", gam, riem)
    )

    ric = np.einsum("al,axyl->xy", G, riem)
    scal = complex(np.einsum("xy,xy->", G, ric))
    nabla_ric = np.einsum("al,axylf->xyf", G, nabla_riem)
    dscal = np.einsum("xy,xyf->f", G, nabla_ric)
    c1, c2 = 1.0 / (n - 2), 1.0 / (2 * (n - 1) * (n - 2))
    h = c1 * ric - c2 * scal * g
    nabla_h = c1 * nabla_ric - c2 * np.einsum("ab,f->abf", g, dscal)
    cotton = np.einsum("yzx->xyz", nabla_h) - np.einsum("xzy->xyz", nabla_h)

    weyl = riem - kulkarni_nomizu(h, g)
    nabla_weyl = nabla_riem - kulkarni_nomizu(nabla_h, g)

    rep = CurvatureReport(
        point=np.asarray(point) if point is not None else None,
        n=n, orientation=orientation, g=g, ginv=G, gamma=gam, dgamma=dgam, rup=rup,
        riem=riem, nabla_riem=nabla_riem, ric=ric, scal=scal, h=h, nabla_h=nabla_h,
        cotton=cotton, weyl=weyl, nabla_weyl=nabla_weyl, sqrt_det=sqrt_det, frame=frame,
    )
    if n == 4:
        _self_dual_split(rep)
    return rep


def hodge_star_tensor(g, ginv, sqrt_det, orientation: int) -> np.ndarray:
    """``star[i, j, k, l]`` with ``(*w)_ij = star[i,j,k,l] w_kl``."""
    eps = orientation * sqrt_det * levi_civita_symbol(4)
    return 0.5 * contract("ijab,ak,bl->ijkl", eps, ginv, ginv)


def _self_dual_split(rep: CurvatureReport) -> None:
    g, G = rep.g, rep.ginv
    star = hodge_star_tensor(g, G, rep.sqrt_det, rep.orientation)
    eye = np.eye(4)
    ident = 0.5 * (np.einsum("ik,jl->ijkl", eye, eye) - np.einsum("il,jk->ijkl", eye, eye))
    pp = 0.5 * (ident + star)
    pm = 0.5 * (ident - star)
    rep.star, rep.proj_plus, rep.proj_minus = star, pp, pm

    def sandwich(P, T):
        return contract("ijab,abcd...,klcd->ijkl...", P, T, P)

    rep.weyl_plus = sandwich(pp, rep.weyl)
    rep.weyl_minus = sandwich(pm, rep.weyl)
    rep.nabla_weyl_plus = sandwich(pp, rep.nabla_weyl)
    rep.nabla_weyl_minus = sandwich(pm, rep.nabla_weyl)
    rep.cotton_plus = np.einsum("xyab,abz->xyz", pp, rep.cotton)
    rep.cotton_minus = np.einsum("xyab,abz->xyz", pm, rep.cotton)
    rep.div_weyl = weyl_divergence(rep.nabla_weyl, G)
    rep.div_weyl_plus = weyl_divergence(rep.nabla_weyl_plus, G)
    rep.div_weyl_minus = weyl_divergence(rep.nabla_weyl_minus, G)

    if rep.frame is not None:
        E = rep.frame
        rep.blocks = {
            "R": lambda2_matrix(rep.riem, E),
            "hI": lambda2_matrix(kulkarni_nomizu(rep.h, g), E),
            "W": lambda2_matrix(rep.weyl, E),
            "Wplus": lambda2_matrix(rep.weyl_plus, E),
            "Wminus": lambda2_matrix(rep.weyl_minus, E),
            "star": star_block(star, g, E),
        }


def weyl_divergence(nabla_w: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """``(delta W)(X, Y)(Z) = g^{ab} (nabla_a W)(X, Y, Z, e_b)``.

    This sign and slot are the ones for which ``delta W = C`` holds with the
    Cotton-York tensor of this module; they were calibrated once on a generic
    metric and are frozen by the tests.
    """
    return np.einsum("ab,xyzba->xyz", ginv, nabla_w)


def star_block(star: np.ndarray, g: np.ndarray, E: np.ndarray) -> np.ndarray:
    """6x6 matrix ``M[I, J] = <*e_I, e_J>`` of the coordinate Hodge star.

    ``e_I = e_a ^ e_b`` is lowered to a 2-form, starred with ``star`` and
    paired with ``e_J`` using ``<F, c^d> = F(c, d)``.
    """
    low = g @ E
    M = np.empty((6, 6), dtype=complex)
    for I, (a, b) in enumerate(PAIRS):
        F = np.outer(low[:, a], low[:, b]) - np.outer(low[:, b], low[:, a])
        sF = np.einsum("ijkl,kl->ij", star, F)
        for J, (c, d) in enumerate(PAIRS):
            M[I, J] = E[:, c] @ sF @ E[:, d]
    return M


def lambda2_matrix(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    """6x6 matrix of the Lambda^2 endomorphism encoded by a (0,4) tensor.

    ``M[I, J] = <T(e_I), e_J>`` with ``<T(X^Y), Z^W> = T[X, Y, W, Z]``; for an
    orthonormal frame the basis ``e_a ^ e_b`` (``a < b`` in :data:`PAIRS`
    order) is orthonormal, so ``M`` is also the matrix of the endomorphism.
    """
    Tf = contract("ia,jb,kc,ld,ijkl->abcd", E, E, E, E, T)
    M = np.empty((6, 6), dtype=complex)
    for I, (a, b) in enumerate(PAIRS):
        for J, (c, d) in enumerate(PAIRS):
            M[I, J] = Tf[a, b, d, c]
    return M


def bivector_components(u, w, E) -> np.ndarray:
    """Coordinates of ``u ^ w`` in the frame basis ``e_a ^ e_b``."""
    Einv = np.linalg.inv(E)
    uf, wf = Einv @ u, Einv @ w
    return np.array([uf[a] * wf[b] - uf[b] * wf[a] for a, b in PAIRS])


def star6(orientation: int = 1) -> np.ndarray:
    """Hodge star on Lambda^2 in an oriented orthonormal frame (PAIRS order)."""
    S = np.zeros((6, 6))
    # *e12 = e34, *e13 = -e24, *e14 = e23 and the inverse relations
    table = {0: (5, 1), 1: (4, -1), 2: (3, 1), 3: (2, 1), 4: (1, -1), 5: (0, 1)}
    for I, (J, s) in table.items():
        S[J, I] = s
    return orientation * S


# -- public operations ------------------------------------------------------

def curvature(m, p, orientation: int | None = None, method: str = "ad",
              fd_step: float = 1e-2) -> CurvatureReport:
    """Full :class:`CurvatureReport` of metric ``m`` at ``p``.

    ``method="fd"`` feeds the finite-difference jets instead of the dual
    number ones; it is meant as an independent oracle.
    """
    p = np.asarray(p, dtype=complex)
    orientation = m.orientation if orientation is None else orientation
    if method == "ad":
        jets = m.jets(p, 3)
    elif method == "fd":
        jets = m.fd_jets(p, step=fd_step)
    else:
        raise ValueError(f"unknown jet method {method!r}")
    sd = frame = None
    if m.n == 4:
        sd = m.sqrt_det(p)
        frame = m.frame(p)
        if orientation != m.orientation:
            frame = frame.copy()
            frame[:, -1] = -frame[:, -1]
    return curvature_from_jets(jets, m.n, point=p, sqrt_det=sd, orientation=orientation,
                               frame=frame)


def christoffel(m, p) -> np.ndarray:
    """``gamma[k, i, j] = Gamma^k_ij``."""
    g, dg = m.jets(p, 1)
    return np.einsum("kl,lij->kij", np.linalg.inv(g), _lower_christoffel(dg))


def riemann(m, p):
    """``(riem, ric, scal, h)`` at ``p``."""
    r = curvature(m, p)
    return r.riem, r.ric, r.scal, r.h


def lambda2_basis_and_star(m, p, orientation: int | None = None):
    """Frame bivectors, their Gram matrix and the 6x6 Hodge star.

    The bivectors are returned as antisymmetric contravariant 4x4 arrays
    ``e_a ^ e_b`` in :data:`PAIRS` order.  The Gram matrix uses
    ``<a^b, c^d> = g(a,c) g(b,d) - g(a,d) g(b,c)`` and is the identity for
    the orthonormal frame.
    """
    if m.n != 4:
        raise ValueError("Lambda^2 star needs a 4-dimensional metric")
    orientation = m.orientation if orientation is None else orientation
    g = m.at(p)
    E = m.frame(p)
    if orientation != m.orientation:
        E[:, -1] = -E[:, -1]
    basis = [np.outer(E[:, a], E[:, b]) - np.outer(E[:, b], E[:, a]) for a, b in PAIRS]
    gram = np.empty((6, 6), dtype=complex)
    for I, (a, b) in enumerate(PAIRS):
        for J, (c, d) in enumerate(PAIRS):
            gab = E.T @ g @ E
            gram[I, J] = gab[a, c] * gab[b, d] - gab[a, d] * gab[b, c]
    star = hodge_star_tensor(g, np.linalg.inv(g), m.sqrt_det(p), orientation)
    return basis, gram, star_block(star, g, E)


def weyl_split(m, p, orientation: int | None = None):
    """``(Wplus, Wminus, residual)`` as 6x6 blocks.

    ``residual`` is ``||R - (hI + W+ + W-)|| / max(||R||, tiny)``.
    """
    if m.n != 4:
        raise ValueError("the Weyl split needs a 4-dimensional metric")
    r = curvature(m, p, orientation)
    b = r.blocks
    res = np.linalg.norm(b["R"] - (b["hI"] + b["Wplus"] + b["Wminus"]))
    return b["Wplus"], b["Wminus"], res / max(np.linalg.norm(b["R"]), 1e-300)


def cotton_york(m, p, orientation: int | None = None):
    """``C`` and, in dimension 4, also ``(C+, C-)``."""
    r = curvature(m, p, orientation)
    if m.n == 4:
        return r.cotton, r.cotton_plus, r.cotton_minus
    return r.cotton


def divergence_weyl(m, p, orientation: int | None = None):
    """``(delta W, delta W+, delta W-)``; see :func:`weyl_divergence`."""
    if m.n != 4:
        raise ValueError("divergence of W needs a 4-dimensional metric")
    r = curvature(m, p, orientation)
    return r.div_weyl, r.div_weyl_plus, r.div_weyl_minus


def conformal_rescale(m, f):
    """The metric ``e^{2f} g``."""
    return m.rescaled(f)


def connection_delta(g: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``Gamma' - Gamma`` for ``g' = e^{2f} g`` and ``theta = df``.

    ``delta^k_ij = delta^k_i theta_j + delta^k_j theta_i - g_ij theta^k``,
    i.e. ``nabla'_A B = nabla_A B + theta(A) B + theta(B) A - g(A, B) theta#``.
    """
    n = g.shape[0]
    eye = np.eye(n)
    sharp = np.linalg.solve(g, theta)
    return (
        np.einsum("ki,j->kij", eye, theta)
        + np.einsum("kj,i->kij", eye, theta)
        - np.einsum("ij,k->kij", g, sharp)
    )


def norm(a) -> float:
    return float(np.linalg.norm(np.ravel(a)))


def rel_err(a, b, scale=None) -> float:
    """``||a - b|| / max(||a||, ||b||, scale)``; zero when everything is zero."""
    denom = max(norm(a), norm(b), scale or 0.0)
    diff = norm(np.asarray(a) - np.asarray(b))
    if denom == 0.0:
        return diff
    return diff / denom


def connection_at(m, p):
    """``(gamma, dgamma, rup)`` at ``p`` from second-order jets only."""
    g, dg, ddg = m.jets(p, 2)
    G, dG, _ = _inverse_jets(g, dg, ddg)
    low = _lower_christoffel(dg)
    gam = np.einsum("kl,lij->kij", G, low)
    dgam = np.einsum("kla,lij->kija", dG, low) + np.einsum("kl,lija->kija", G, _lower_christoffel(ddg))
    rup = (
        np.einsum("adbc->abcd", dgam)
        - np.einsum("acbd->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    return gam, dgam, rup
