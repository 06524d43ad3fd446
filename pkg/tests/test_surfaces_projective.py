import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holoconf import surfaces as surf
from holoconf.verify import cross_ratio_residual

coord = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@pytest.fixture(scope="module")
def beta(metrics):
    S, data = surf.cp2_beta_surface()
    return metrics["cp2_complexification"], S, data


def test_cp2_beta_surface_is_beta_and_totally_geodesic(beta, rng):
    m, S, _ = beta
    for q in S.sample(rng, 3):
        res = surf.beta_surface_check(m, S, q)
        assert res["label"] == "beta"
        assert res["geodesic_residual"] <= 1e-6
        assert res["invariance_residual"] <= 1e-6
        assert res["k_minus_h"] <= 1e-7
        assert res["thomas_norm"] <= 1e-6
        assert res["thomas_minus_3c"] <= 1e-7


def test_cp2_beta_surface_label_flips_with_orientation(beta, rng):
    m, S, _ = beta
    q = S.sample(rng, 1)[0]
    assert surf.beta_surface_check(m, S, q, orientation=-1)["label"] == "alpha"


def test_beta_parameters_roundtrip(beta, rng):
    _, S, data = beta
    for q in S.sample(rng, 4):
        assert np.allclose(surf.cp2_beta_parameters(S.point(q), data), q, atol=1e-12)


def test_bent_surface_is_not_totally_geodesic(metrics):
    S = surf.EmbeddedSurface.from_strings(["s1", "i*s1", "s2 + s1^2", "i*s2"])
    with pytest.raises(surf.NotTotallyGeodesicError):
        surf.induced_connection(metrics["flat4"], S, np.array([0.1, 0.2]))
    _, res = surf.induced_connection(metrics["flat4"], S, np.array([0.1, 0.2]), check=False)
    assert res > 1e-3


def test_degenerate_flag_rejected():
    with pytest.raises(ValueError):
        surf.cp2_beta_surface(L=(1, 0, 0), d=(0, 1, 0), nb_dir=(0, 1, 0))


def test_cross_ratio_normalization():
    lam = 0.3 + 2.0j
    assert np.isclose(surf.cross_ratio(0, 1, lam, None), lam)
    assert np.isclose(surf.cross_ratio(0, 1, lam, np.inf), lam)


def test_cross_ratio_coincident_points():
    with pytest.raises(surf.CoincidentPointsError):
        surf.cross_ratio(1, 1, 2, 3)
    a, b = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    with pytest.raises(surf.CoincidentPointsError):
        surf.cross_ratio(a, a, b, a + b)


def test_cross_ratio_rejects_non_collinear():
    e = np.eye(3)
    with pytest.raises(ValueError):
        surf.cross_ratio(e[0], e[1], e[2], e[0] + e[1])


@given(st.lists(coord, min_size=4, max_size=4, unique=True), coord, coord, coord, coord)
def test_cross_ratio_mobius_invariant(pts, a, b, c, d):
    if min(abs(x - y) for i, x in enumerate(pts) for y in pts[i + 1:]) < 1e-2:
        return
    if abs(a * d - b * c) < 1e-2:
        return
    images = [(a * z + b, c * z + d) for z in pts]
    if min(np.hypot(abs(u), abs(w)) for u, w in images) < 1e-3:
        return
    lhs = surf.cross_ratio(*pts)
    rhs = surf.cross_ratio(*[np.array(p) for p in images])
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


@given(st.lists(coord, min_size=4, max_size=4, unique=True))
def test_cross_ratio_projective_line_matches_affine(pts):
    if min(abs(x - y) for i, x in enumerate(pts) for y in pts[i + 1:]) < 1e-2:
        return
    p, q = np.array([1.0, 0.2, -0.5]), np.array([0.3, 1.0, 0.4j])
    lhs = surf.cross_ratio(*pts)
    rhs = surf.cross_ratio(*[p * z + q for z in pts])
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


def test_cp2_cross_ratio_law(beta, rng):
    m, S, data = beta
    for q in S.sample(rng, 2):
        assert cross_ratio_residual(m, S, data, q, rng) <= 1e-6
