"""Isotropy cone and the alpha / beta classification of tangent 2-planes.

A 2-plane ``span(u, w)`` is represented by the bivector ``omega = u ^ w`` in
the frame basis of Lambda^2.  It is totally isotropic exactly when
``<omega, omega> = 0``, and then ``omega`` is an eigenvector of the Hodge star:
``*omega = omega`` (alpha-plane) or ``*omega = -omega`` (beta-plane).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import PAIRS, bivector_components, star6

LABELS = ("alpha", "beta", "isotropic_degenerate", "non_isotropic")
THRESHOLD = 1e-8
BORDERLINE = 1e-6
INDEPENDENCE_TOL = 1e-10


class DegenerateSpanError(ValueError):
    """The two vectors do not span a plane."""


class BorderlineError(ArithmeticError):
    """A diagnostic landed between the accept and reject thresholds."""


@dataclass(frozen=True)
class PlaneClass:
    u: np.ndarray
    w: np.ndarray
    label: str
    lambda2_rep: np.ndarray
    diagnostics: tuple  # (<w,w>, ||*w - w||, ||*w + w||), each divided by ||w||^2 or ||w||


def isotropy_residual(m, p, v) -> complex:
    """``g_p(v, v)``."""
    v = np.asarray(v, dtype=complex)
    return complex(v @ m.at(p) @ v)


def lambda2_pairing(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a, b>`` of two frame-basis bivectors (the basis is orthonormal)."""
    return complex(a @ b)


def _decide(value: float, name: str) -> bool:
    if value <= THRESHOLD:
        return True
    if value <= BORDERLINE:
        raise BorderlineError(f"{name} = {value:.3e} is between {THRESHOLD} and {BORDERLINE}")
    return False


def classify_bivector(omega: np.ndarray, orientation: int = 1) -> tuple:
    """Label and normalized diagnostics of a frame-basis bivector."""
    nrm2 = float(np.vdot(omega, omega).real)
    S = star6(orientation)
    q = abs(lambda2_pairing(omega, omega)) / nrm2
    sd = float(np.linalg.norm(S @ omega - omega)) / np.sqrt(nrm2)
    asd = float(np.linalg.norm(S @ omega + omega)) / np.sqrt(nrm2)
    diag = (q, sd, asd)
    if not _decide(q, "<omega, omega>/|omega|^2"):
        return "non_isotropic", diag
    if _decide(sd, "|*omega - omega|/|omega|"):
        return "alpha", diag
    if _decide(asd, "|*omega + omega|/|omega|"):
        return "beta", diag
    return "isotropic_degenerate", diag


def classify_plane(m, p, u, w, orientation: int | None = None) -> PlaneClass:
    """Classify ``span(u, w)`` at ``p``."""
    u = np.asarray(u, dtype=complex)
    w = np.asarray(w, dtype=complex)
    orientation = m.orientation if orientation is None else orientation
    E = m.frame(p)
    if orientation != m.orientation:
        E[:, -1] = -E[:, -1]
    omega = bivector_components(u, w, E)
    # independence measured in the coordinate basis
    coord = np.array([u[a] * w[b] - u[b] * w[a] for a, b in PAIRS])
    if np.linalg.norm(coord) <= INDEPENDENCE_TOL * np.linalg.norm(u) * np.linalg.norm(w):
        raise DegenerateSpanError("u and w are linearly dependent")
    label, diag = classify_bivector(omega, 1)
    return PlaneClass(u, w, label, omega, diag)


def null_plane_through(m, p, v, kind: str = "alpha", orientation: int | None = None):
    """The alpha- (or beta-) plane containing the null vector ``v``.

    Solves ``P-(v ^ X) = 0`` (resp. ``P+``) for ``X``; the solution space is
    ``span(v, X)``.  Returns a vector ``X`` completing ``v`` to a basis.
    """
    v = np.asarray(v, dtype=complex)
    orientation = m.orientation if orientation is None else orientation
    E = m.frame(p)
    if orientation != m.orientation:
        E[:, -1] = -E[:, -1]
    sign = -1 if kind == "alpha" else 1
    P = 0.5 * (np.eye(6) + sign * star6(1))
    cols = [P @ bivector_components(v, np.eye(4)[k], E) for k in range(4)]
    A = np.stack(cols, axis=1)
    _, sv, vh = np.linalg.svd(A)
    if sv[-2] > 1e-8 * max(sv[0], 1e-300):
        raise ValueError("v is not a null vector: no isotropic plane contains it")
    kernel = vh.conj().T[:, -2:]
    # pick the kernel direction furthest from v, then remove its v part
    off = [c - np.vdot(v, c) / np.vdot(v, v) * v for c in kernel.T]
    X = max(off, key=np.linalg.norm)
    return X / np.linalg.norm(X)


def random_null_vector(m, p, rng) -> np.ndarray:
    """A random vector on the isotropy cone at ``p``."""
    E = m.frame(p)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a4 = 1j * np.sqrt(a @ a)
    return E @ np.concatenate([a, [a4]])


# -- the projective-plane example ----------------------------------------------

def cp2_slice_planes(m, z, orientation: int | None = None):
    """Classify the slices ``{(V, 0)}`` and ``{(0, v)}`` at chart point ``z``."""
    from .catalog import cp2_incidence

    z = np.asarray(z, dtype=complex)
    if abs(cp2_incidence(z)) < 1e-12:
        raise ValueError("point lies on the incidence divisor 1 + x.y = 0")
    e = np.eye(4)
    pv = classify_plane(m, z, e[0], e[1], orientation)
    pw = classify_plane(m, z, e[2], e[3], orientation)
    return pv, pw, (pv.label, pw.label)


def cp2_beta_plane(m, z, rng):
    """``span{(xi, 0), (0, eta)}`` for an isotropic ``(xi, eta)``.

    It is isotropic because ``g`` pairs only ``x`` with ``y`` directions and
    ``(xi, eta)`` is null; it contains ``(xi, eta)`` and is orthogonal to it.
    """
    from .catalog import cp2_isotropic_tangent

    t = cp2_isotropic_tangent(z, rng)
    u = np.concatenate([t[:2], [0, 0]])
    w = np.concatenate([[0, 0], t[2:]])
    return u, w
