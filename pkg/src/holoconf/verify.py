"""Identity suites over sampled points, collected into a :class:`VerificationSummary`.

Every check draws its random inputs from a generator seeded by
``(seed, crc32(check id))``, so results do not depend on which other checks
run or on how many worker threads are used.
"""

from __future__ import annotations

import json
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import conformal3 as c3
from . import geodesics as geo
from . import isotropic as iso
from . import surfaces as surf
from .catalog import MetricManifest, cp2_incidence
from .curvature import curvature, kulkarni_nomizu, norm, rel_err
from .expr import parse
from .jets import eval_values

SUITES = ("core", "selfdual", "cone", "beta", "dim3", "umbilic")
DEFAULT_POINTS = 4
SAMPLE_RADIUS = 0.15
CONFORMAL_TEST_FACTORS = ("0.3*z1*z2", "0.2*z3 - 0.1*z4^2", "0.1*(z1 + z2 + z3)^2")
UMBILIC_TEST_FACTOR = "0.2*z1*z3 - 0.1*z4 + 0.05*z2^2"


def _version() -> str:
    from . import __version__

    return __version__


class Skip(Exception):
    """The check does not apply to this metric."""


@dataclass
class CheckResult:
    id: str
    suite: str
    points: int
    max_residual: float | None
    tolerance: float
    status: str  # pass | fail | skipped | unverified
    note: str = ""


@dataclass
class VerificationSummary:
    metric: str
    seed: int
    suites: list
    checks: list = field(default_factory=list)
    version: str = ""

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "seed": self.seed,
            "suites": list(self.suites),
            "version": self.version,
            "pass": self.passed,
            "checks": [asdict(c) for c in sorted(self.checks, key=lambda c: c.id)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def table(self) -> str:
        rows = [f"{'check':36s} {'pts':>4s} {'max residual':>13s} {'tol':>9s}  status"]
        for c in sorted(self.checks, key=lambda c: c.id):
            res = "-" if c.max_residual is None else f"{c.max_residual:.3e}"
            rows.append(f"{c.id:36s} {c.points:4d} {res:>13s} {c.tolerance:9.1e}  {c.status}"
                        + (f"  ({c.note})" if c.note else ""))
        return "\n".join(rows)


# -- sampling --------------------------------------------------------------------

def _rng(seed: int, check_id: str):
    return np.random.default_rng([seed, zlib.crc32(check_id.encode())])


def sample_points(m, k: int, rng, radius: float = SAMPLE_RADIUS) -> np.ndarray:
    """``k`` complex points near the basepoint, rejecting singular ones."""
    out = []
    while len(out) < k:
        p = m.basepoint + radius * (rng.standard_normal(m.n) + 0.5j * rng.standard_normal(m.n))
        g = m.at(p)
        if abs(np.linalg.det(g)) < 1e-6:
            continue
        if m.name == "cp2_complexification" and abs(cp2_incidence(p)) < 0.1:
            continue
        out.append(p)
    return np.array(out)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HOLOCONF_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _curv_scale(r) -> float:
    return max(norm(r.riem), norm(r.nabla_riem))


# -- core --------------------------------------------------------------------------

def riemann_symmetry_residual(r) -> float:
    R = r.riem
    v = max(
        norm(R + R.transpose(1, 0, 2, 3)),
        norm(R + R.transpose(0, 1, 3, 2)),
        norm(R - R.transpose(2, 3, 0, 1)),
        norm(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)),
    )
    return rel_err(v, 0.0, norm(R))


def second_bianchi_residual(r) -> float:
    N = r.nabla_riem  # N[i, j, k, l, f] = (nabla_f R)_ijkl
    cyc = N + N.transpose(0, 1, 3, 4, 2) + N.transpose(0, 1, 4, 2, 3)
    return rel_err(cyc, 0.0, _curv_scale(r))


def reassembly_residual(r) -> float:
    if r.n == 4:
        B = r.blocks
        return rel_err(B["R"], B["hI"] + B["Wplus"] + B["Wminus"])
    return rel_err(r.riem, kulkarni_nomizu(r.h, r.g))


def _core(m, pts, rng, opt):
    reps = _map(lambda p: curvature(m, p, opt["orientation"]), pts)
    out = {
        "core.riemann_symmetries": ([riemann_symmetry_residual(r) for r in reps], 1e-10),
        "core.second_bianchi": ([second_bianchi_residual(r) for r in reps], 1e-8),
        "core.reassembly": ([reassembly_residual(r) for r in reps], 1e-8),
    }
    if m.n == 4:
        out["core.div_weyl_equals_cotton"] = ([
            max(rel_err(r.div_weyl_plus, r.cotton_plus, _curv_scale(r)),
                rel_err(r.div_weyl_minus, r.cotton_minus, _curv_scale(r)))
            for r in reps
        ], 1e-7)

    def fd(args):
        p, r = args
        rf = curvature(m, p, opt["orientation"], method="fd", fd_step=opt["fd_step"])
        s = max(_curv_scale(r), 1.0)
        return max(rel_err(rf.riem, r.riem, s), rel_err(rf.cotton, r.cotton, s))

    out["core.fd_oracle"] = (_map(fd, zip(pts, reps)), 1e-5)
    return out


# -- self-duality -----------------------------------------------------------------------

def wminus_ratio(r) -> float:
    B = r.blocks
    return rel_err(B["Wminus"], 0.0, max(norm(B["Wplus"]), norm(B["R"])))


def _selfdual(m, pts, rng, opt):
    _need4(m)
    reps = _map(lambda p: curvature(m, p, opt["orientation"]), pts)
    return {"selfdual.wminus_ratio": ([wminus_ratio(r) for r in reps], 1e-7)}


# -- alpha-cones and Jacobi fields ------------------------------------------------------------

def _null_alpha(m, p, rng, orientation):
    v = iso.random_null_vector(m, p, rng)
    v = v / np.linalg.norm(v)
    X = iso.null_plane_through(m, p, v, "alpha", orientation)
    return v, X


def jacobi_p_invariance(m, p, rng, factors=CONFORMAL_TEST_FACTORS, t_end: float = 0.25,
                        steps: int = 64) -> float:
    """Largest part of ``P'(Y) - P(Y)`` outside ``span(v)`` over the factors.

    ``Y`` is a section of ``v^perp`` built from the transported complement.
    """
    v = iso.random_null_vector(m, p, rng)
    v = v / np.linalg.norm(v)
    path = geo.integrate_geodesic(m, p, v, t_end=t_end, steps=steps)
    E1, E2 = geo.transported_normal_frame(m, path)
    t = path.t[:, None]
    a, b, c = rng.standard_normal((3, 3))
    Y = (a[0] + a[1] * t + a[2] * t**2) * E1 + (b[0] + b[1] * t + b[2] * t**3) * E2 \
        + (c[0] * t**2) * path.v
    P = geo.jacobi_operator_P(m, path, Y)
    worst = 0.0
    for f in factors:
        P2 = geo.jacobi_operator_P(m.rescaled(parse(f, m.n)), path, Y)
        D = P2 - P
        scale = max(1.0, float(np.max(np.abs(P))), float(np.max(np.abs(P2))))
        for d, X in zip(D, path.v):
            off = d - np.vdot(X, d) / np.vdot(X, X) * X
            worst = max(worst, float(np.linalg.norm(off)) / scale)
    return worst


def _cone(m, pts, rng, opt):
    _need4(m)
    o = opt["orientation"]
    data = [_null_alpha(m, p, rng, o) for p in pts]

    def scale(r, v, X):
        s = norm(r.riem) * np.linalg.norm(v) ** 2 * np.linalg.norm(X) ** 2
        return s if s > 0 else 1.0

    def direct(args):
        p, (v, X) = args
        r = curvature(m, p, o)
        f = geo.alpha_cone_curvature_formula(m, p, v, X, o).value
        d = geo.alpha_cone_curvature_oracle(m, p, v, X, o, method="direct")
        return rel_err(f, d, scale(r, v, X))

    def jac(args):
        p, (v, X) = args
        r = curvature(m, p, o)
        f = geo.alpha_cone_curvature_formula(m, p, v, X, o).value
        j = geo.alpha_cone_curvature_oracle(m, p, v, X, o, method="jacobi")
        return rel_err(f, j, scale(r, v, X))

    def drift(args):
        p, (v, _) = args
        path = geo.integrate_geodesic(m, p, v, t_end=0.25, steps=64)
        return float(np.max(np.abs(path.isotropy))) / geo._scale(m, p, v)

    pairs = list(zip(pts, data))
    return {
        "cone.formula_vs_direct": (_map(direct, pairs), 1e-8),
        "cone.formula_vs_jacobi": (_map(jac, pairs), 1e-6),
        "cone.isotropy_conservation": (_map(drift, pairs), 1e-7),
        "cone.jacobi_operator_conformal": ([jacobi_p_invariance(m, pts[0], rng)], 1e-6),
    }


# -- beta-surfaces ---------------------------------------------------------------------------------

def _beta_fixture(m, man, rng, opt):
    """``(surface, cp2 data or None)`` for metrics that have a known beta-surface."""
    if m.name == "cp2_complexification" and opt["orientation"] == 1:
        S, data = surf.cp2_beta_surface()
        return S, data
    if "flat" in man.expected and m.conformal_factor is None:
        p = m.basepoint
        v = iso.random_null_vector(m, p, rng)
        w = iso.null_plane_through(m, p, v, "beta", opt["orientation"])
        exprs = [f"{_c(p[k])} + {_c(v[k])}*s1 + {_c(w[k])}*s2" for k in range(4)]
        return surf.EmbeddedSurface.from_strings(exprs, name="flat_beta_plane"), None
    raise Skip("no beta-surface fixture for this metric")


def _c(z) -> str:
    z = complex(z)
    return f"({z.real!r} + {z.imag!r}*i)"


def cross_ratio_residual(m, S, data, q, rng, t_end: float = 0.3) -> float:
    """Integrate a null geodesic in the beta-surface and compare the two cross-ratios."""
    x0, T = S.jets(q, 1)
    d = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v0 = T @ d
    v0 = v0 / np.linalg.norm(v0)
    path = geo.integrate_geodesic(m, x0, v0, t_end=t_end)
    k = len(path) - 1
    idx = (0, k // 3, k)
    A = [np.concatenate([[1.0], path.x[i][:2]]) for i in idx]
    a = [np.concatenate([[1.0], path.x[i][2:]]) for i in idx]
    lhs = surf.cross_ratio(A[0], A[1], A[2], data["L"])
    rhs = surf.cross_ratio(a[0], a[1], a[2], data["m"])
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def _beta(m, pts, rng, opt, man):
    _need4(m)
    S, data = _beta_fixture(m, man, rng, opt)
    qs = S.sample(rng, len(pts))
    checks = _map(lambda q: surf.beta_surface_check(m, S, q, opt["orientation"]), qs)

    def plane(q):
        x, T = S.jets(q, 1)
        pc = iso.classify_plane(m, x, T[:, 0], T[:, 1], opt["orientation"])
        return max(pc.diagnostics[0], pc.diagnostics[2])

    out = {
        "beta.plane_is_beta": (_map(plane, qs), 1e-8),
        "beta.totally_geodesic": ([c["geodesic_residual"] for c in checks], 1e-6),
        "beta.k_equals_h": ([c["k_minus_h"] for c in checks], 1e-7),
        "beta.thomas_vanishes": ([c["thomas_norm"] for c in checks], 1e-6),
        "beta.thomas_equals_3c": ([c["thomas_minus_3c"] for c in checks], 1e-7),
    }
    if data is not None:
        seeds = rng.integers(0, 2**31, size=len(qs))
        out["beta.cross_ratio"] = (_map(
            lambda a: cross_ratio_residual(m, S, data, a[0], np.random.default_rng(a[1])),
            list(zip(qs, seeds))), 1e-6)
    return out


# -- dimension 3 identities and frame formulas -----------------------------------------------------

def _dim3(m, pts, rng, opt):
    o = opt["orientation"]
    if m.n == 3:
        def cfd(p):
            r = curvature(m, p)
            rf = curvature(m, p, method="fd", fd_step=opt["fd_step"])
            return rel_err(rf.cotton, r.cotton, max(_curv_scale(r), 1.0))

        return {
            "dim3.star_r": (_map(lambda p: c3.star_r_identity(m, p), pts), 1e-8),
            "dim3.cotton_fd": (_map(cfd, pts), 1e-5),
        }
    frames = [c3.random_oriented_frame(m, p, rng, o) for p in pts]

    def frame_formulas(args):
        p, F = args
        r = curvature(m, p, o)
        lp, rp, lm, rm = c3.w_components(r, *F.T)
        s = norm(r.riem)
        return rel_err(lp, rp, s), rel_err(lm, rm, s)

    res = _map(frame_formulas, list(zip(pts, frames)))
    out = {
        "dim3.w_plus_frame_formula": ([a for a, _ in res], 1e-8),
        "dim3.w_minus_frame_formula": ([b for _, b in res], 1e-8),
    }

    wr = []
    for p, F in zip(pts, frames):
        r = curvature(m, p, o)
        if wminus_ratio(r) <= c3.SELF_DUAL_TOL:
            lhs, rhs = c3.w_plus_riemann_identity(r, *F.T)
            wr.append(rel_err(lhs, rhs, norm(r.riem)))
    out["dim3.w_plus_from_riemann"] = (wr, 1e-7) if wr else _skipped("W- does not vanish at the samples")

    try:
        Q, qs = sample_hypersurface(m, len(pts), rng)
    except Skip as exc:
        out["dim3.tangential_riemann_sum"] = _skipped(str(exc))
        return out
    ts = []
    for q in qs:
        try:
            wm, tg = c3.check_hypotheses(Q, q, o)
        except (c3.DegenerateHypersurfaceError, ArithmeticError):
            continue
        if wm <= c3.SELF_DUAL_TOL and tg <= 1e-8:
            F, _ = Q.adapted_frame(q, o)
            r = curvature(m, Q.point(q), o)
            ts.append(rel_err(c3.tangential_riemann_sum(r, *F.T), 0.0, norm(r.riem)))
    out["dim3.tangential_riemann_sum"] = (ts, 1e-7) if ts else _skipped(f"{Q.name} is not totally geodesic in a self-dual region")
    return out


def sample_hypersurface(m, k: int, rng, normals=((0, 0, 0, 1), (1, 1, 1, 1))):
    """A coordinate hyperplane with nondegenerate induced metric, and ``k`` parameter samples."""
    for c in normals:
        Q = c3.hyperplane(m, c)
        T = Q.tangent(np.zeros(3))
        q0, *_ = np.linalg.lstsq(T, m.basepoint, rcond=None)
        qs = [q0 + SAMPLE_RADIUS * (rng.standard_normal(3) + 0.5j * rng.standard_normal(3)) for _ in range(k)]
        try:
            for q in qs:
                II, G = c3.second_fundamental_form(Q, q)
        except (c3.DegenerateHypersurfaceError, ArithmeticError):
            continue
        return Q, qs
    raise Skip("no coordinate hyperplane with nondegenerate induced metric")


# -- hypersurfaces --------------------------------------------------------------------------------

def umbilic_covariance(m, Q, q, f_src: str = UMBILIC_TEST_FACTOR) -> float:
    """``II'_0 = e^f II_0`` for the trace-free parts under ``g' = e^{2f} g``."""
    f = parse(f_src, m.n)
    m2 = m.rescaled(f)
    Q2 = c3.Hypersurface(m2, Q.embedding, Q.level_set, Q.name)
    II, G = c3.second_fundamental_form(Q, q)
    II2, G2 = c3.second_fundamental_form(Q2, q)

    def tf(B, H):
        return B - np.trace(np.linalg.solve(H, B)) / 3 * H

    ef = np.exp(complex(eval_values(f, Q.point(q))))
    a, b = tf(II2, G2), ef * tf(II, G)
    return min(rel_err(a, b, 1.0), rel_err(a, -b, 1.0))


def _umbilic(m, pts, rng, opt):
    _need4(m)
    o = opt["orientation"]
    Q, qs = sample_hypersurface(m, len(pts), rng)
    out = {"umbilic.conformal_covariance": (_map(lambda q: umbilic_covariance(m, Q, q), qs), 1e-8)}
    t8, cor, note = [], [], ""
    for q in qs:
        try:
            lhs, rhs, _ = c3.theorem8_identity(m, Q, q, o)
        except c3.PreconditionError as exc:
            note = str(exc)
            continue
        r = curvature(m, Q.point(q), o)
        t8.append(rel_err(lhs, rhs, _curv_scale(r)))
        cor.append(c3.restricted_cotton_residual(Q, q, o) / max(1.0, _curv_scale(r)))
    hyp = f"hypotheses not met on {Q.name}: {note}"
    out["umbilic.normal_derivative_trivial"] = (t8, 1e-10) if t8 else _skipped(hyp)
    out["umbilic.restricted_cotton"] = (cor, 1e-10) if cor else _skipped(hyp)
    out["umbilic.normal_derivative_witness"] = ([], 0.0, "unverified", c3.WITNESS_STATUS)
    return out


# -- driver ---------------------------------------------------------------------------------------

def _need4(m):
    if m.n != 4:
        raise Skip("needs a 4-manifold")


def _skipped(note):
    return ([], 0.0, "skipped", note)


_RUNNERS = {
    "core": lambda m, pts, rng, opt, man: _core(m, pts, rng, opt),
    "selfdual": lambda m, pts, rng, opt, man: _selfdual(m, pts, rng, opt),
    "cone": lambda m, pts, rng, opt, man: _cone(m, pts, rng, opt),
    "beta": _beta,
    "dim3": lambda m, pts, rng, opt, man: _dim3(m, pts, rng, opt),
    "umbilic": lambda m, pts, rng, opt, man: _umbilic(m, pts, rng, opt),
}


def run(man: MetricManifest, suite: str = "all", points: int = DEFAULT_POINTS, seed: int = 0,
        tol: float | None = None, fd_step: float = 1e-2, orientation: int | None = None,
        point=None) -> VerificationSummary:
    """Run ``suite`` (one of :data:`SUITES` or ``"all"``) on ``man``.

    ``tol`` replaces every per-check tolerance; ``point`` pins the first
    sample point.
    """
    suites = list(SUITES) if suite == "all" else [suite]
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"unknown suite {s!r}")
    if points < 1:
        raise ValueError("need at least one sample point")
    m = man.to_metric()
    opt = {"orientation": man.orientation if orientation is None else orientation, "fd_step": fd_step}
    summary = VerificationSummary(man.name, seed, suites, version=_version())
    for s in suites:
        rng = _rng(seed, s)
        pts = sample_points(m, points, rng)
        if point is not None:
            pts[0] = np.asarray(point, dtype=complex)
        try:
            results = _RUNNERS[s](m, pts, rng, opt, man)
        except Skip as exc:
            summary.checks.append(CheckResult(f"{s}.*", s, 0, None, 0.0, "skipped", str(exc)))
            continue
        for cid, val in results.items():
            if len(val) == 4:
                res, t, status, note = val
                summary.checks.append(CheckResult(cid, s, 0, None, t, status, note))
                continue
            res, t = val
            t = t if tol is None else tol
            mx = float(max(res))
            status = "pass" if mx <= t else "fail"
            summary.checks.append(CheckResult(cid, s, len(res), mx, t, status))
    summary.checks.sort(key=lambda c: c.id)
    return summary
