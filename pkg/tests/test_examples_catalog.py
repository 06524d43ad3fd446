import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holoconf import catalog as cat
from holoconf.curvature import curvature
from holoconf.metric import SingularMetricError

from conftest import near


@pytest.mark.parametrize("man", cat.catalog(), ids=lambda m: m.name)
def test_manifest_roundtrip(man, tmp_path):
    text = cat.dumps(man)
    back = cat.loads(text)
    assert cat.dumps(back) == text
    path = tmp_path / f"{man.name}.json"
    cat.save(man, path)
    assert cat.load(path) == back


@pytest.mark.parametrize("man", cat.catalog(), ids=lambda m: m.name)
def test_expected_flags(man, rng):
    m = man.to_metric()
    r = curvature(m, near(m, rng))
    scale = max(1.0, np.linalg.norm(r.riem))
    if "flat" in man.expected:
        assert np.max(np.abs(r.riem)) <= 1e-10
    if "conformally_flat" in man.expected and man.n == 4:
        assert np.linalg.norm(r.weyl) <= 1e-8 * scale
    if "conformally_flat" in man.expected and man.n == 3:
        assert np.linalg.norm(r.cotton) <= 1e-8 * scale
    if "self_dual" in man.expected:
        assert np.linalg.norm(r.weyl_minus) <= 1e-8 * scale
    if "generic" in man.expected and man.n == 4:
        assert np.linalg.norm(r.weyl_minus) > 1e-6 and np.linalg.norm(r.weyl_plus) > 1e-6


def test_resolve():
    assert cat.resolve("builtin:flat4").name == "flat4"
    with pytest.raises(cat.ManifestError):
        cat.resolve("builtin:nope")
    with pytest.raises(cat.ManifestError):
        cat.resolve("/nonexistent/manifest.json")


def _base():
    return cat.builtin("flat4").to_dict()


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(schema_version=99),
    lambda d: d.update(n=5),
    lambda d: d["components"].append({"i": 3, "j": 2, "expr": "1"}),
    lambda d: d.update(expected=["flat", "shiny"]),
    lambda d: d.update(orientation=2),
    lambda d: d.update(basepoint=[[0, 0]]),
    lambda d: d["components"].__setitem__(0, {"i": 1, "j": 1, "expr": "1 +* z1"}),
    lambda d: d.pop("components"),
])
def test_manifest_errors(mutate):
    d = _base()
    mutate(d)
    with pytest.raises(cat.ManifestError):
        cat.loads(json.dumps(d))


def test_manifest_not_json():
    with pytest.raises(cat.ManifestError):
        cat.loads("{not json")
    with pytest.raises(cat.ManifestError):
        cat.loads("[1, 2]")


def test_degenerate_basepoint_rejected():
    d = _base()
    d["components"] = [{"i": 1, "j": 1, "expr": "z1"}] + d["components"][1:]
    with pytest.raises((cat.ManifestError, SingularMetricError)):
        cat.loads(json.dumps(d))


def test_cp2_chart_matches_trace_picture(rng):
    m = cat.build_cp2_complexification().to_metric()
    for _ in range(4):
        z = near(m, rng, 0.4)
        t1, t2 = (rng.standard_normal(4) + 1j * rng.standard_normal(4) for _ in range(2))
        g = m.at(z)
        assert abs(t1 @ g @ t2 - cat.cp2_trace_metric(z, t1, t2)) <= 1e-12 * max(1, abs(t1 @ g @ t2))


def test_cp2_isotropic_tangent(rng):
    m = cat.build_cp2_complexification().to_metric()
    z = near(m, rng, 0.4)
    t = cat.cp2_isotropic_tangent(z, rng)
    assert abs(t @ m.at(z) @ t) <= 1e-12 * np.vdot(t, t).real


def test_cp2_divisor_rejected():
    with pytest.raises(ValueError):
        cat.cp2_homomorphisms(np.array([1.0, 0, -1.0, 0]), np.ones(4))


@given(st.tuples(*[st.floats(-3, 3)] * 4))
def test_real_slice_is_minus_two_fubini_study(c):
    A = np.array([1.0, c[0] + 1j * c[1], c[2] + 1j * c[3]])
    out = cat.real_fs_slice_check(cat.build_cp2_complexification(), A)
    scale = max(1.0, np.max(np.abs(out["minus_two_fs"])))
    assert out["residual"] <= 1e-10 * scale
    assert out["imag_part"] <= 1e-10 * scale
    assert out["tangency_residual"] <= 1e-10 * max(1.0, np.linalg.norm(A) ** 2)


def test_real_slice_needs_chart():
    with pytest.raises(ValueError):
        cat.real_fs_slice_check(cat.build_cp2_complexification(), [0, 1, 0])
