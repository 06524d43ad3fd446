"""``holoconf`` command-line interface.

Exit codes: 0 pass, 1 verification failure, 2 input error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from . import conformal3 as c3
from . import geodesics as geo
from . import isotropic as iso
from . import surfaces as surf
from . import verify as ver
from .catalog import ManifestError, resolve
from .curvature import curvature, norm
from .expr import DomainError, ExprError
from .metric import FrameError, SingularMetricError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
SHAPE_SCHEMA_VERSION = 1


class InputError(ValueError):
    pass


# -- argument helpers ---------------------------------------------------------------

def parse_vector(text: str, n: int | None = None, what: str = "point") -> np.ndarray:
    """``"0.1,0.2+0.3i,..."`` -> complex array; ``i`` and ``j`` both mark imaginary parts."""
    try:
        vals = [complex(s.strip().replace(" ", "").replace("i", "j")) for s in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot parse {what} {text!r}: {exc}") from exc
    if n is not None and len(vals) != n:
        raise InputError(f"{what} needs {n} components, got {len(vals)}")
    return np.array(vals, dtype=complex)


def _orientation(text: str) -> int:
    try:
        o = int(text)
    except ValueError:
        o = 0
    if o not in (1, -1):
        raise argparse.ArgumentTypeError("orientation must be +1 or -1")
    return o


def _cjson(z):
    z = complex(z)
    return [z.real, z.imag]


def _cmat(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return _cjson(a)
    return [_cmat(x) for x in a]


def _emit_json(obj, dest) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def _metric(args):
    man = resolve(args.metric)
    if getattr(args, "orientation", None) is not None:
        from dataclasses import replace

        man = replace(man, orientation=args.orientation)
    return man, man.to_metric()


def _base_point(args, m):
    if getattr(args, "point", None):
        return parse_vector(args.point, m.n)
    return m.basepoint.copy()


# -- surface and hypersurface inputs ------------------------------------------------------

def load_shape(spec: str, kind: str) -> dict:
    """Read a surface / hypersurface description (``builtin:<name>`` or a JSON path)."""
    if spec.startswith("builtin:"):
        name = spec[len("builtin:"):]
        table = BUILTIN_SURFACES if kind == "surface" else BUILTIN_HYPERSURFACES
        if name not in table:
            raise InputError(f"unknown builtin {kind} {name!r}; known: {sorted(table)}")
        return dict(table[name], name=name)
    try:
        with open(spec, encoding="utf-8") as fh:
            d = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {kind} file {spec!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{kind} file is not valid JSON: {exc}") from exc
    if not isinstance(d, dict) or d.get("kind") != kind or "embedding" not in d:
        raise InputError(f"{kind} file needs \"kind\": \"{kind}\" and an \"embedding\" list")
    if d.get("schema_version", SHAPE_SCHEMA_VERSION) != SHAPE_SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {d.get('schema_version')!r}")
    return d


BUILTIN_SURFACES = {"cp2_beta": {"kind": "surface", "fixture": "cp2_beta"}}
BUILTIN_HYPERSURFACES = {
    "z4=0": {"kind": "hypersurface", "embedding": ["q1", "q2", "q3", "0"], "level_set": "z4"},
    "unit_sphere": {"kind": "hypersurface",
                    "embedding": ["q1", "q2", "q3", "sqrt(1 - q1^2 - q2^2 - q3^2)"],
                    "level_set": "z1^2 + z2^2 + z3^2 + z4^2 - 1"},
    "graph": {"kind": "hypersurface", "embedding": ["q1", "q2", "q3", "q1^2 + 2*q2^2"],
              "level_set": "z4 - z1^2 - 2*z2^2"},
}


def _surface(d):
    if d.get("fixture") == "cp2_beta":
        S, data = surf.cp2_beta_surface()
        return S, data
    if len(d["embedding"]) != 4:
        raise InputError("surface embedding needs 4 expressions in s1, s2")
    dom = tuple(tuple(x) for x in d.get("domain", ((-0.5, 0.5), (-0.5, 0.5))))
    return surf.EmbeddedSurface.from_strings(d["embedding"], domain=dom, name=d.get("name", "")), None


def _hypersurface(m, d):
    if len(d["embedding"]) != 4:
        raise InputError("hypersurface embedding needs 4 expressions in q1, q2, q3")
    return c3.Hypersurface.from_strings(m, d["embedding"], d.get("level_set"), d.get("name", ""))


# -- commands ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    man, m = _metric(args)
    p = _base_point(args, m)
    r = curvature(m, p)
    if args.json is not None:
        _emit_json(r.to_json(), args.json)
        return EXIT_OK
    print(f"metric {man.name} (n = {m.n}, orientation {m.orientation:+d}) at {np.array2string(p, precision=4)}")
    print(f"  |Riem| = {norm(r.riem):.6e}   Scal = {complex(r.scal):.6g}")
    print(f"  |C|    = {norm(r.cotton):.6e}   |nabla R| = {norm(r.nabla_riem):.6e}")
    if m.n == 4:
        for k in ("R", "hI", "Wplus", "Wminus"):
            print(f"  block {k:7s} |.| = {norm(r.blocks[k]):.6e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    man = resolve(args.metric)
    point = parse_vector(args.point, man.n) if args.point else None
    s = ver.run(man, args.suite, points=args.points, seed=args.seed, tol=args.tol,
                fd_step=args.fd_step, orientation=args.orientation, point=point)
    if args.json is not None:
        text = s.to_json()
        if args.json == "-":
            sys.stdout.write(text)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)
            print(s.table())
    else:
        print(s.table())
        print("PASS" if s.passed else "FAIL")
    return EXIT_OK if s.passed else EXIT_FAIL


def cmd_trace(args) -> int:
    _, m = _metric(args)
    x0 = _base_point(args, m)
    if not args.velocity:
        raise InputError("--velocity is required")
    v0 = parse_vector(args.velocity, m.n, "velocity")
    try:
        path = geo.integrate_geodesic(m, x0, v0, t_end=args.t_end, steps=args.steps)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = sys.stdout if args.csv in (None, "-") else open(args.csv, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(out)
        n = m.n
        w.writerow(["t"] + [f"{p}{k}_{c}" for p in ("x", "v") for k in range(1, n + 1) for c in ("re", "im")]
                   + ["isotropy"])
        for t, x, v, q in zip(path.t, path.x, path.v, path.isotropy):
            row = [repr(float(t))]
            for vec in (x, v):
                for z in vec:
                    row += [repr(float(z.real)), repr(float(z.imag))]
            row.append(repr(float(abs(q))))
            w.writerow(row)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_classify_plane(args) -> int:
    _, m = _metric(args)
    p = _base_point(args, m)
    u = parse_vector(args.u, m.n, "u")
    w = parse_vector(args.w, m.n, "w")
    try:
        pc = iso.classify_plane(m, p, u, w)
    except iso.DegenerateSpanError as exc:
        raise InputError(str(exc)) from exc
    _emit_json({"label": pc.label, "lambda2": _cmat(pc.lambda2_rep),
                "diagnostics": {"isotropy": pc.diagnostics[0], "self_dual": pc.diagnostics[1],
                                "anti_self_dual": pc.diagnostics[2]}}, args.json)
    return EXIT_OK


def cmd_check_beta_surface(args) -> int:
    _, m = _metric(args)
    S, data = _surface(load_shape(args.surface, "surface"))
    rng = np.random.default_rng(args.seed)
    qs = S.sample(rng, args.points)
    rows = []
    ok = True
    for q in qs:
        c = surf.beta_surface_check(m, S, q)
        row = {"q": _cmat(q), **{k: v for k, v in c.items()}}
        ok &= c["label"] == "beta" and c["thomas_norm"] <= (args.tol or 1e-6) \
            and c["geodesic_residual"] <= surf.TOTALLY_GEODESIC_TOL
        if data is not None:
            row["cross_ratio"] = ver.cross_ratio_residual(m, S, data, q, rng)
            ok &= row["cross_ratio"] <= (args.tol or 1e-6)
        rows.append(row)
    _emit_json({"surface": S.name, "samples": rows, "pass": bool(ok)}, args.json)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_umbilic(args) -> int:
    _, m = _metric(args)
    Q = _hypersurface(m, load_shape(args.hypersurface, "hypersurface"))
    q = parse_vector(args.point, 3, "parameter point") if args.point else np.zeros(3, complex)
    try:
        II, umb, tg, lam = c3.umbilic_check(m, Q, q, tol=args.tol or c3.UMBILIC_TOL)
    except c3.DegenerateHypersurfaceError as exc:
        raise InputError(str(exc)) from exc
    _, G = c3.second_fundamental_form(Q, q)
    _emit_json({"hypersurface": Q.name, "q": _cmat(q), "umbilic": umb, "totally_geodesic": tg,
                "lambda": _cjson(lam), "II": _cmat(II),
                "trace_free_residual": norm(II - lam * G)}, args.json)
    return EXIT_OK


def cmd_check_theorem8(args) -> int:
    _, m = _metric(args)
    Q = _hypersurface(m, load_shape(args.hypersurface, "hypersurface"))
    q = parse_vector(args.point, 3, "parameter point") if args.point else np.zeros(3, complex)
    tol = args.tol or 1e-10
    report = {"hypersurface": Q.name, "q": _cmat(q), "witness": c3.WITNESS_STATUS}
    code = EXIT_OK
    try:
        lhs, rhs, res = c3.theorem8_identity(m, Q, q)
        report.update(status="pass" if res <= tol else "fail", lhs=_cjson(lhs), rhs=_cjson(rhs),
                      residual=res, restricted_cotton_residual=c3.restricted_cotton_residual(Q, q))
        code = EXIT_OK if res <= tol else EXIT_FAIL
    except c3.PreconditionError as exc:
        report.update(status="precondition_failed", reason=str(exc), residual=exc.residual)
        code = EXIT_FAIL
    if args.perturbative:
        report["perturbation_study"] = c3.perturbation_study()
    _emit_json(report, args.json)
    return code


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holoconf", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"holoconf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, point_help="chart point, comma separated (e.g. 0.1,0.2+0.1i,0,0)"):
        p.add_argument("--metric", default="builtin:flat4", help="builtin:<name> or manifest path")
        p.add_argument("--point", help=point_help)
        p.add_argument("--orientation", type=_orientation, default=None, help="+1 or -1")
        p.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                       help="emit JSON (to PATH, or stdout when omitted)")

    p = sub.add_parser("report", help="curvature report at a point")
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="run identity suites")
    common(p, "pin the first sample point")
    p.add_argument("--suite", default="all", choices=list(ver.SUITES) + ["all"])
    p.add_argument("--points", type=int, default=ver.DEFAULT_POINTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None, help="override every tolerance")
    p.add_argument("--fd-step", type=float, default=1e-2)
    p.set_defaults(func=cmd_verify)

    for name in ("trace", "trace-geodesic"):
        p = sub.add_parser(name, help="integrate a null geodesic, CSV output")
        common(p)
        p.add_argument("--velocity", help="initial velocity (isotropic)")
        p.add_argument("--t-end", type=float, default=1.0)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--csv", nargs="?", const="-", default=None, metavar="PATH")
        p.set_defaults(func=cmd_trace)

    p = sub.add_parser("classify-plane", help="alpha / beta classification of span(u, w)")
    common(p)
    p.add_argument("--u", required=True)
    p.add_argument("--w", required=True)
    p.set_defaults(func=cmd_classify_plane)

    p = sub.add_parser("check-beta-surface", help="projective flatness of a beta-surface")
    common(p)
    p.add_argument("--surface", default="builtin:cp2_beta")
    p.add_argument("--points", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_check_beta_surface)

    for name, fn in (("check-umbilic", cmd_check_umbilic), ("check-theorem8", cmd_check_theorem8)):
        p = sub.add_parser(name, help="hypersurface checks")
        common(p, "parameter point q1,q2,q3 on the hypersurface")
        p.add_argument("--hypersurface", default="builtin:z4=0")
        p.add_argument("--tol", type=float, default=None)
        if name == "check-theorem8":
            p.add_argument("--perturbative", action="store_true",
                           help="also run the flat + eps perturbation study")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "json", None) is None and args.command != "report" and \
            args.command not in ("verify", "trace", "trace-geodesic"):
        args.json = "-"
    try:
        return args.func(args)
    except (ManifestError, ExprError, InputError, FileNotFoundError) as exc:
        print(f"holoconf: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularMetricError, FrameError, DomainError, ArithmeticError) as exc:
        print(f"holoconf: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"holoconf: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
