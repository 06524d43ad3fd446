"""Null geodesics, Jacobi fields and the alpha-cone curvature.

All integrations use a real parameter ``t`` and fixed-step RK4, so results are
deterministic.  A Jacobi field is integrated together with its geodesic as the
first-order system

    x' = v,            v' = -Gamma(v, v),
    J' = DJ - Gamma(v, J),
    DJ' = R(v, J) v - Gamma(v, DJ),

where ``DJ`` is the covariant derivative of ``J`` along the curve.  Parallel
fields obey ``E' = -Gamma(v, E)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .curvature import connection_at, christoffel, curvature
from .isotropic import classify_plane

DEFAULT_STEPS_PER_UNIT = 256
NULL_TOL = 1e-10
DRIFT_TOL = 1e-5


class IsotropyDriftError(ArithmeticError):
    """A null geodesic drifted off the isotropy cone."""


class NotAlphaPlaneError(ValueError):
    """The supplied plane is not an alpha-plane."""


@dataclass(frozen=True)
class GeodesicState:
    t: float
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class JacobiState:
    J: np.ndarray
    DJ: np.ndarray


@dataclass
class GeodesicPath:
    """Samples of an integrated curve; ``a`` is the coordinate acceleration."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    isotropy: np.ndarray

    def states(self) -> list[GeodesicState]:
        return [GeodesicState(float(t), x, v) for t, x, v in zip(self.t, self.x, self.v)]

    def __len__(self):
        return len(self.t)


def _gamma_vv(gam, a, b):
    return np.einsum("kij,i,j->k", gam, a, b)


def _scale(m, x, v):
    return max(1.0, float(np.linalg.norm(m.at(x))) * float(np.vdot(v, v).real))


def integrate_geodesic(m, x0, v0, t_end: float = 1.0, steps: int | None = None,
                       null: bool = True) -> GeodesicPath:
    """RK4 integration of ``x'' + Gamma(x', x') = 0`` on ``[0, t_end]``.

    With ``null=True`` the initial velocity must be isotropic and the
    isotropy ``g(v, v)`` is monitored; drift above ``DRIFT_TOL`` (relative to
    ``|g| |v|^2``) aborts with :class:`IsotropyDriftError`.
    """
    x0 = np.asarray(x0, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    if steps is None:
        steps = max(16, int(round(DEFAULT_STEPS_PER_UNIT * abs(t_end))))
    if steps < 16:
        raise ValueError("at least 16 steps are required")
    scale = _scale(m, x0, v0)
    iso0 = v0 @ m.at(x0) @ v0
    if null and abs(iso0) > NULL_TOL * scale:
        raise ValueError(f"initial velocity is not isotropic: g(v, v) = {iso0:.3e}")
    h = t_end / steps

    def rhs(x, v):
        return v, -_gamma_vv(christoffel(m, x), v, v)

    xs, vs, acc, iso = [x0], [v0], [], []
    x, v = x0, v0
    for _ in range(steps):
        k1x, k1v = rhs(x, v)
        acc.append(k1v)
        iso.append(v @ m.at(x) @ v)
        if null and abs(iso[-1]) > DRIFT_TOL * scale:
            raise IsotropyDriftError(f"isotropy drift {abs(iso[-1]):.3e} at t = {len(iso) * h:.4f}")
        k2x, k2v = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = rhs(x + h * k3x, v + h * k3v)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        xs.append(x)
        vs.append(v)
    acc.append(rhs(x, v)[1])
    iso.append(v @ m.at(x) @ v)
    if null and abs(iso[-1]) > DRIFT_TOL * scale:
        raise IsotropyDriftError(f"isotropy drift {abs(iso[-1]):.3e} at t = {t_end:.4f}")
    return GeodesicPath(
        np.linspace(0.0, t_end, steps + 1), np.array(xs), np.array(vs), np.array(acc), np.array(iso)
    )


def _flow(m, x0, v0, t_end, steps, jacobi=(), parallel=()):
    """Joint RK4 for the geodesic, Jacobi pairs and parallel vectors."""
    n = len(x0)
    nj, npar = len(jacobi), len(parallel)
    y = np.concatenate(
        [x0, v0] + [np.concatenate([j, dj]) for j, dj in jacobi] + list(parallel)
    ).astype(complex)

    def rhs(y):
        x, v = y[:n], y[n:2 * n]
        gam, _, rup = connection_at(m, x) if nj else (christoffel(m, x), None, None)
        out = [v, -_gamma_vv(gam, v, v)]
        off = 2 * n
        for _ in range(nj):
            J, DJ = y[off:off + n], y[off + n:off + 2 * n]
            RvJv = np.einsum("abcd,b,c,d->a", rup, v, v, J)
            out += [DJ - _gamma_vv(gam, v, J), RvJv - _gamma_vv(gam, v, DJ)]
            off += 2 * n
        for _ in range(npar):
            E = y[off:off + n]
            out.append(-_gamma_vv(gam, v, E))
            off += n
        return np.concatenate(out)

    h = t_end / steps
    ys = [y]
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys.append(y)
    ys = np.array(ys)
    x, v = ys[:, :n], ys[:, n:2 * n]
    jac = [(ys[:, 2 * n + 2 * n * k: 3 * n + 2 * n * k], ys[:, 3 * n + 2 * n * k: 4 * n + 2 * n * k])
           for k in range(nj)]
    base = 2 * n + 2 * n * nj
    par = [ys[:, base + n * k: base + n * (k + 1)] for k in range(npar)]
    return x, v, jac, par


def integrate_jacobi(m, path: GeodesicPath, J0, DJ0):
    """Jacobi field along ``path`` with ``J(0) = J0`` and ``DJ(0) = DJ0``.

    The geodesic is re-integrated jointly with the field on the same grid;
    returns ``(J, DJ)`` arrays of shape ``(len(path), n)``.
    """
    steps = len(path) - 1
    x, _, jac, _ = _flow(m, path.x[0], path.v[0], path.t[-1], steps,
                         jacobi=[(np.asarray(J0, complex), np.asarray(DJ0, complex))])
    if np.max(np.abs(x - path.x)) > 1e-8 * max(1.0, np.max(np.abs(path.x))):
        raise ValueError("path does not match a geodesic of this metric")
    return jac[0]


def jacobi_states(J, DJ) -> list[JacobiState]:
    return [JacobiState(a, b) for a, b in zip(J, DJ)]


def parallel_transport(m, path: GeodesicPath, vectors):
    """Parallel transport of each vector in ``vectors`` along ``path``."""
    steps = len(path) - 1
    _, _, _, par = _flow(m, path.x[0], path.v[0], path.t[-1], steps,
                         parallel=[np.asarray(e, complex) for e in vectors])
    return par


def normal_complement(m, x, v):
    """Two vectors completing ``v`` to a basis of ``v^perp``.

    Together with ``v`` they fix a concrete model of ``N = v^perp / v``.
    """
    g = m.at(x)
    gv = g @ v
    # basis of v^perp (3-dimensional) from the SVD of the covector
    _, _, vh = np.linalg.svd(gv[None, :])
    perp = vh.conj().T[:, 1:]
    # drop the direction closest to v
    coef, *_ = np.linalg.lstsq(perp, v, rcond=None)
    k = int(np.argmax(np.abs(coef)))
    return [perp[:, i] for i in range(3) if i != k]


def transported_normal_frame(m, path: GeodesicPath):
    """Parallel transport of :func:`normal_complement` at ``t = 0``."""
    return parallel_transport(m, path, normal_complement(m, path.x[0], path.v[0]))


def normal_part(vec, v, frame_pair):
    """Coordinates of ``vec`` in ``N = v^perp / v`` w.r.t. the frame pair.

    ``vec`` must lie in ``v^perp``; the residual of the fit is returned too.
    """
    B = np.stack([v, frame_pair[0], frame_pair[1]], axis=1)
    coef, *_ = np.linalg.lstsq(B, vec, rcond=None)
    resid = float(np.linalg.norm(B @ coef - vec))
    return coef[1:], resid


def jacobi_operator_P(m, path: GeodesicPath, Y) -> np.ndarray:
    """``P(Y) = nabla_X nabla_X Y - nabla_{nabla_X X} Y - R(X, Y) X`` along ``path``.

    ``X`` is the velocity of ``path``.  ``Y`` holds the field at every path
    sample; it is interpolated by a cubic spline (at least 9 samples) to get
    its first and second derivatives.  ``m`` may differ from the metric the
    path was integrated for (the curve need not be affinely parametrized
    for ``m``).
    """
    Y = np.asarray(Y, dtype=complex)
    if len(path) < 9:
        raise ValueError("need at least 9 samples for second differences")
    sp = CubicSpline(path.t, Y, axis=0)
    Yd, Ydd = sp(path.t, 1), sp(path.t, 2)
    out = np.empty_like(Y)
    for k in range(len(path)):
        x, X, A = path.x[k], path.v[k], path.a[k]
        gam, dgam, rup = connection_at(m, x)
        dgam_dt = np.einsum("kija,a->kij", dgam, X)
        nXY = Yd[k] + _gamma_vv(gam, X, Y[k])
        # d/dt (nabla_X Y)
        d_nXY = Ydd[k] + _gamma_vv(dgam_dt, X, Y[k]) + _gamma_vv(gam, A, Y[k]) + _gamma_vv(gam, X, Yd[k])
        nXnXY = d_nXY + _gamma_vv(gam, X, nXY)
        nXX = A + _gamma_vv(gam, X, X)
        # nabla_{nXX} Y needs the directional derivative of Y along nXX; on a
        # curve this is only defined when nXX is tangent, nXX = c X
        c = _tangent_coefficient(nXX, X)
        n_nXX_Y = c * nXY
        RXYX = np.einsum("abcd,b,c,d->a", rup, X, X, Y[k])
        out[k] = nXnXY - n_nXX_Y - RXYX
    return out


def _tangent_coefficient(w, X):
    nx = np.vdot(X, X)
    c = np.vdot(X, w) / nx
    if np.linalg.norm(w - c * X) > 1e-6 * max(1.0, np.linalg.norm(w)):
        raise ValueError("nabla_X X is not tangent to the curve: not a pregeodesic")
    return c


# -- alpha-cone curvature --------------------------------------------------------

@dataclass(frozen=True)
class AlphaConeCurvature:
    """``<W+(v, X) v, X>`` for the alpha-plane ``span(v, X)`` at ``point``.

    ``vector`` is ``W+(v, X) v`` (a tangent vector); its class in
    ``v^perp / F`` is represented by pairing with ``X``, which gives the
    1x1 matrix ``quotient_map``.
    """

    point: np.ndarray
    v: np.ndarray
    X: np.ndarray
    value: complex
    vector: np.ndarray
    quotient_map: np.ndarray


def _check_alpha(m, p, v, X, orientation):
    pc = classify_plane(m, p, v, X, orientation)
    if pc.label != "alpha":
        raise NotAlphaPlaneError(f"span(v, X) is {pc.label}, not an alpha-plane")
    iso = abs(v @ m.at(p) @ v)
    if iso > 1e-8 * _scale(m, p, v):
        raise NotAlphaPlaneError("v is not isotropic")


def alpha_cone_curvature_formula(m, p, v, X, orientation: int | None = None) -> AlphaConeCurvature:
    """Curvature of the alpha-cone through ``span(v, X)`` from the ``W+`` block."""
    p, v, X = (np.asarray(a, dtype=complex) for a in (p, v, X))
    _check_alpha(m, p, v, X, orientation)
    r = curvature(m, p, orientation)
    val = complex(np.einsum("ijkl,i,j,k,l->", r.weyl_plus, v, X, v, X))
    # W+(v, X) v as a vector: W+[v, X, v, .] raised
    vec = r.ginv @ np.einsum("ijkl,i,j,k->l", r.weyl_plus, v, X, v)
    return AlphaConeCurvature(p, v, X, val, vec, np.array([[val]]))


def alpha_cone_curvature_oracle(m, p, v, X, orientation: int | None = None,
                                method: str = "direct", t_end: float = 0.1,
                                steps: int = 32) -> complex:
    """``<R(v, X) v, X>`` without any Weyl projection.

    ``method="direct"`` contracts the Riemann tensor.  ``method="jacobi"``
    integrates the Jacobi field with ``J(0) = 0``, ``DJ(0) = X`` and the
    parallel field ``E`` with ``E(0) = X`` along the geodesic through ``v``;
    then ``f = g(J, E)`` has ``f'''(0) = <R(v, X) v, X>``, read off by a
    polynomial fit.
    """
    p, v, X = (np.asarray(a, dtype=complex) for a in (p, v, X))
    _check_alpha(m, p, v, X, orientation)
    if method == "direct":
        r = curvature(m, p, orientation)
        return complex(np.einsum("ijkl,i,j,k,l->", r.riem, v, X, v, X))
    if method != "jacobi":
        raise ValueError(f"unknown method {method!r}")
    # integrate forwards and backwards (t -> -t flips v and DJ(0)) so that the
    # fit runs over a symmetric interval, which keeps the cubic coefficient
    # well conditioned
    f_side = []
    for sgn in (1, -1):
        x, _, jac, par = _flow(m, p, sgn * v, t_end, steps, jacobi=[(np.zeros_like(X), sgn * X)],
                               parallel=[X])
        J, E = jac[0][0], par[0]
        f_side.append(np.array([Jk @ m.at(xk) @ Ek for Jk, Ek, xk in zip(J, E, x)]))
    t = np.linspace(0.0, t_end, steps + 1)
    ts = np.concatenate([-t[:0:-1], t])
    f = np.concatenate([f_side[1][:0:-1], f_side[0]])
    coef = np.polynomial.polynomial.polyfit(ts / t_end, f, 9)
    return complex(coef[3] * 6 / t_end**3)
