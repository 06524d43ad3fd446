"""Built-in metrics and the JSON manifest format.

Manifest schema (``schema_version`` 1)::

    {
      "schema_version": 1,
      "name": "flat4",
      "n": 4,
      "coordinates": ["z1", "z2", "z3", "z4"],       # display labels
      "components": [{"i": 1, "j": 1, "expr": "1"}, ...],   # 1-based, i <= j
      "conformal_factor": null,                     # or an expression f: e^{2f} g
      "orientation": 1,
      "basepoint": [[0.0, 0.0], ...],               # [re, im] per coordinate
      "expected": ["flat"],                         # subset of EXPECTED_FLAGS
      "notes": ""
    }

Expressions always use the variables ``z1 .. zn`` whatever the labels are.

The complexified projective-plane metric
-----------------------------------------
A point of ``M = P(E) x P(E*)`` minus the incidence locus is a pair
``(A, a)`` with ``A = [1 : x1 : x2]`` and ``a = ker(1, y1, y2)``; the chart
coordinates are ``(z1, z2, z3, z4) = (x1, x2, y1, y2)`` and the chart is valid
where ``D = 1 + x1 y1 + x2 y2 != 0``.  Write ``s = (1, x)`` and ``n = (1, y)``.
A tangent vector ``(xi, eta)`` gives

* ``V : A -> a``, ``V(s) = (0, xi) - (y . xi) / D * s`` (the variation of
  ``s`` projected along ``A`` into ``a = E/A``);
* ``v : a -> A``, ``v(u) = -(eta . u') / D * s`` with ``u'`` the last two
  entries of ``u`` (the variation of ``a`` seen in ``E/a = A``).

The metric ``g((V, v), (W, w)) = tr(v o W + w o V)`` then evaluates to::

    g = -[D (eta . xi' + eta' . xi) - (y . xi')(x . eta) - (y . xi)(x . eta')] / D^2

so ``g_xx = g_yy = 0`` and ``g(d x_i, d y_j) = -(D delta_ij - y_i x_j) / D^2``.
:func:`cp2_trace_metric` recomputes the trace directly from ``V`` and ``v``
and serves as the oracle for the committed strings.  With orientation +1 in
these coordinates the two coordinate slices are alpha-planes and ``W-``
vanishes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .expr import ExprError, parse
from .metric import MetricField

SCHEMA_VERSION = 1
EXPECTED_FLAGS = ("flat", "conformally_flat", "self_dual", "generic")


class ManifestError(ValueError):
    """Malformed or inconsistent manifest."""


@dataclass(frozen=True)
class MetricManifest:
    name: str
    n: int
    components: tuple  # ((i, j, expr), ...) 1-based with i <= j
    conformal_factor: str | None = None
    orientation: int = 1
    basepoint: tuple = ()
    coordinates: tuple = ()
    expected: tuple = ()
    notes: str = ""

    def to_metric(self) -> MetricField:
        try:
            entries = {(i - 1, j - 1): parse(e, self.n) for i, j, e in self.components}
            f = parse(self.conformal_factor, self.n) if self.conformal_factor else None
            return MetricField(
                self.n, entries, f, basepoint=np.array(self.basepoint or [0] * self.n, complex),
                orientation=self.orientation, name=self.name,
            )
        except (ExprError, ValueError) as exc:
            raise ManifestError(f"manifest {self.name!r}: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "n": self.n,
            "coordinates": list(self.coordinates) or [f"z{k + 1}" for k in range(self.n)],
            "components": [{"i": i, "j": j, "expr": e} for i, j, e in self.components],
            "conformal_factor": self.conformal_factor,
            "orientation": self.orientation,
            "basepoint": [[float(complex(z).real), float(complex(z).imag)] for z in
                          (self.basepoint or [0] * self.n)],
            "expected": list(self.expected),
            "notes": self.notes,
        }


def dumps(man: MetricManifest) -> str:
    return json.dumps(man.to_dict(), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> MetricManifest:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ManifestError("manifest must be a JSON object")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ManifestError(f"unsupported schema_version {d.get('schema_version')!r}")
    try:
        n = int(d["n"])
        comps = tuple((int(c["i"]), int(c["j"]), str(c["expr"])) for c in d["components"])
        bp = tuple(complex(re, im) for re, im in d.get("basepoint", [[0, 0]] * n))
        man = MetricManifest(
            name=str(d["name"]),
            n=n,
            components=comps,
            conformal_factor=d.get("conformal_factor"),
            orientation=int(d.get("orientation", 1)),
            basepoint=bp,
            coordinates=tuple(d.get("coordinates", ())),
            expected=tuple(d.get("expected", ())),
            notes=str(d.get("notes", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"bad manifest field: {exc}") from exc
    _validate(man)
    return man


def _validate(man: MetricManifest) -> None:
    if man.n not in (3, 4):
        raise ManifestError("only charts of dimension 3 or 4 are supported")
    if len(man.basepoint) != man.n:
        raise ManifestError("basepoint length does not match n")
    for i, j, _ in man.components:
        if not (1 <= i <= j <= man.n):
            raise ManifestError(f"component index ({i},{j}) must satisfy 1 <= i <= j <= n")
    bad = set(man.expected) - set(EXPECTED_FLAGS)
    if bad:
        raise ManifestError(f"unknown expected flags {sorted(bad)}")
    if man.orientation not in (1, -1):
        raise ManifestError("orientation must be +1 or -1")
    m = man.to_metric()
    m.at(m.basepoint)  # raises if degenerate


def load(path) -> MetricManifest:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(man: MetricManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(man))


# -- built-ins -------------------------------------------------------------

def _diag(n, entries=None):
    d = {(k, k): "1" for k in range(1, n + 1)}
    d.update(entries or {})
    return tuple((i, j, e) for (i, j), e in sorted(d.items()))


def _manifest(name, n, comps, expected, f=None, basepoint=None, coords=(), notes=""):
    return MetricManifest(
        name=name, n=n, components=comps, conformal_factor=f, orientation=1,
        basepoint=tuple(basepoint or (0j,) * n), coordinates=tuple(coords),
        expected=tuple(expected), notes=notes,
    )


# frozen coefficients of the generic test metrics
GENERIC3 = {
    (1, 1): "1 + 0.3*z2^2 + 0.2*z1*z3",
    (1, 2): "0.25*z3^2 - 0.1*z1*z2",
    (2, 2): "1 - 0.2*z3^2 + 0.15*z1^2",
    (2, 3): "0.2*z1*z2 + 0.1*z3",
    (3, 3): "1 + 0.3*z1*z2 - 0.1*z2^3",
}
GENERIC4 = {
    (1, 1): "1 + 0.3*z2^2 + 0.1*z3*z4",
    (1, 2): "0.2*z3*z1",
    (2, 2): "1 + 0.25*z1*z4 + 0.1*z3^2",
    (3, 3): "1 - 0.2*z4^2 + 0.1*z1*z2",
    (3, 4): "0.15*z1^2 - 0.1*z2*z4",
    (4, 4): "1 + 0.3*z1*z3",
}
_D = "(1 + z1*z3 + z2*z4)"
CP2 = {
    (1, 3): f"-(1 + z2*z4)/{_D}^2",
    (1, 4): f"z2*z3/{_D}^2",
    (2, 3): f"z1*z4/{_D}^2",
    (2, 4): f"-(1 + z1*z3)/{_D}^2",
}


def build_cp2_complexification() -> MetricManifest:
    """Affine chart ``(x1, x2, y1, y2)`` of the complexified projective plane."""
    return _manifest(
        "cp2_complexification", 4, tuple((i, j, e) for (i, j), e in sorted(CP2.items())),
        ["self_dual"], coords=("x1", "x2", "y1", "y2"),
        notes="(A, a) = ([1:x1:x2], ker(1, y1, y2)); g = tr(v o W + w o V); valid off 1 + x.y = 0",
    )


def _builtins() -> list[MetricManifest]:
    return [
        _manifest("flat3", 3, _diag(3), ["flat", "conformally_flat"]),
        _manifest("flat4", 4, _diag(4), ["flat", "conformally_flat", "self_dual"]),
        _manifest("conf_flat4", 4, _diag(4), ["conformally_flat", "self_dual"], f="z1*z2"),
        _manifest(
            "conf_flat4_slab", 4, _diag(4), ["conformally_flat", "self_dual"],
            f="0.3*z1*z2 + 0.2*z3^2 - 0.1*z1^3",
            notes="conformal factor independent of z4, so z4 = 0 is umbilic",
        ),
        _manifest(
            "round3", 3, _diag(3, {(k, k): "(1 + 0.25*(z1^2 + z2^2 + z3^2))^(-2)" for k in (1, 2, 3)}),
            ["conformally_flat"], notes="stereographic chart of the unit 3-sphere",
        ),
        _manifest(
            "round4", 4, _diag(4, {(k, k): "(1 + 0.25*(z1^2 + z2^2 + z3^2 + z4^2))^(-2)" for k in (1, 2, 3, 4)}),
            ["conformally_flat", "self_dual"], notes="stereographic chart of the unit 4-sphere",
        ),
        _manifest("generic3", 3, _diag(3, GENERIC3), ["generic"]),
        _manifest("generic4", 4, _diag(4, GENERIC4), ["generic"]),
        build_cp2_complexification(),
    ]


def catalog() -> list[MetricManifest]:
    return _builtins()


def builtin(name: str) -> MetricManifest:
    for man in _builtins():
        if man.name == name:
            return man
    raise ManifestError(f"unknown builtin metric {name!r}")


def resolve(spec: str) -> MetricManifest:
    """``builtin:<name>`` or a path to a manifest file."""
    if spec.startswith("builtin:"):
        return builtin(spec[len("builtin:"):])
    try:
        return load(spec)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {spec!r}: {exc}") from exc


# -- the projective-plane example: homomorphism picture ------------------------

def cp2_incidence(z) -> complex:
    x, y = np.asarray(z[:2]), np.asarray(z[2:])
    return 1 + x @ y


def cp2_homomorphisms(z, tangent):
    """Matrices of ``V : A -> a`` and ``v : a -> A`` for a chart tangent vector.

    ``V`` is returned as the image ``V(s)`` (a vector in ``a``) and ``v`` as the
    3x3 matrix of ``u -> v(u)`` restricted to ``a`` (it kills ``s``).
    """
    z = np.asarray(z, dtype=complex)
    x, y = z[:2], z[2:]
    xi, eta = np.asarray(tangent[:2], complex), np.asarray(tangent[2:], complex)
    D = cp2_incidence(z)
    if abs(D) < 1e-12:
        raise ValueError("point lies on the incidence divisor 1 + x.y = 0")
    s = np.concatenate([[1.0], x])
    Vs = np.concatenate([[0.0], xi]) - (y @ xi) / D * s
    # v(u) = -(eta . u[1:]) / D * s
    v = -np.outer(s, np.concatenate([[0.0], eta])) / D
    return s, Vs, v


def cp2_trace_metric(z, t1, t2) -> complex:
    """``tr(v1 o V2 + v2 o V1)`` computed from the homomorphisms themselves."""
    s, V1s, v1 = cp2_homomorphisms(z, t1)
    _, V2s, v2 = cp2_homomorphisms(z, t2)
    # v o W : A -> A is multiplication by the scalar c with v(W s) = c s
    c12 = (v1 @ V2s) @ np.conj(s) / (s @ np.conj(s))
    c21 = (v2 @ V1s) @ np.conj(s) / (s @ np.conj(s))
    return complex(c12 + c21)


def cp2_isotropic_tangent(z, rng) -> np.ndarray:
    """A random tangent vector with ``tr(v o V) = 0``."""
    z = np.asarray(z, dtype=complex)
    xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    # g((xi,eta),(xi,eta)) = -2[D eta.xi - (y.xi)(x.eta)]/D^2 is linear in eta
    D = cp2_incidence(z)
    x, y = z[:2], z[2:]
    a = D * xi - (y @ xi) * x  # coefficient vector: a . eta = 0
    eta = np.array([-a[1], a[0]]) * (rng.standard_normal() + 1j * rng.standard_normal())
    return np.concatenate([xi, eta])


def real_fs_slice_check(man: MetricManifest, A) -> dict:
    """Compare the chart metric on the real slice ``a = A^perp`` with ``-2 FS``.

    ``A`` is a vector in ``C^3`` with ``A[0] != 0``.  The slice is
    ``y = conj(x)``; a real tangent vector ``xi`` maps to ``(xi, conj xi)``.
    Both sides are evaluated as real bilinear forms on the real 4-dimensional
    tangent space.  Also reports the tangency identity
    ``h(s, v(u)) + h(V(s), u) = 0`` for ``u`` in ``a``.
    """
    A = np.asarray(A, dtype=complex)
    if abs(A[0]) < 1e-12:
        raise ValueError("A must lie in the affine chart A[0] != 0")
    x = A[1:] / A[0]
    z = np.concatenate([x, np.conj(x)])
    m = man.to_metric()
    g = m.at(z)
    basis = [np.array(v, complex) for v in ([1, 0], [1j, 0], [0, 1], [0, 1j])]
    tang = [np.concatenate([xi, np.conj(xi)]) for xi in basis]
    s = np.concatenate([[1.0], x])
    hs = np.vdot(s, s).real

    def fs(xi1, xi2):
        d1 = np.concatenate([[0.0], xi1])
        d2 = np.concatenate([[0.0], xi2])
        p1 = d1 - np.vdot(s, d1) / hs * s
        p2 = d2 - np.vdot(s, d2) / hs * s
        return np.vdot(p2, p1) / hs  # h(p1, p2), linear in the first slot

    G = np.array([[t1 @ g @ t2 for t2 in tang] for t1 in tang])
    F = np.array([[-2 * fs(b1, b2).real for b2 in basis] for b1 in basis])
    resid = float(np.max(np.abs(G - F)))
    imag = float(np.max(np.abs(G.imag)))
    # tangency identity on the slice
    rng = np.random.default_rng(0)
    tan_res = 0.0
    for xi in basis:
        t = np.concatenate([xi, np.conj(xi)])
        s_, Vs, v = cp2_homomorphisms(z, t)
        for _ in range(3):
            u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            n = np.concatenate([[1.0], np.conj(x)])
            u = u - (n @ u) / (n @ s_) * s_  # project into a = ker n
            lhs = np.vdot(v @ u, s_) + np.vdot(u, Vs)
            tan_res = max(tan_res, abs(lhs))
    return {"residual": resid, "imag_part": imag, "tangency_residual": float(tan_res),
            "pulled_back": G, "minus_two_fs": F}
