import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holoconf import dual
from holoconf.expr import DomainError, ExprError, parse, to_string
from holoconf.jets import eval_jet3, eval_values, fd_oracle_jet, symmetrize

SAMPLES = [
    "exp(z1*z2) - sqrt(1 + z3)/(2 + z1)^2 + (0.5 + 1i)*sin(z2)",
    "log(2 + z1*z3) * cos(z2)^3",
    "(1 + 0.25*(z1^2 + z2^2 + z3^2))^(-2)",
    "z1^-1 + z2/(1 - z3)",
]


@pytest.mark.parametrize("src", SAMPLES)
def test_round_trip(src):
    e = parse(src, 3)
    assert parse(to_string(e.ast), 3).ast == e.ast


@pytest.mark.parametrize("src,offset", [
    ("z4", 0), ("1+", 2), ("z1**2", 3), ("foo(z1)", 0), ("z1^1.5", 3), ("(z1", 3),
])
def test_syntax_errors_carry_offsets(src, offset):
    with pytest.raises(ExprError) as exc:
        parse(src, 3)
    assert exc.value.offset == offset


def test_precedence():
    # ^ binds tighter than unary minus
    e = parse("-z1^2", 1)
    assert eval_values(e, np.array([[3.0]]))[0] == -9
    e = parse("2*z1 - z1/2*4", 1)
    assert eval_values(e, np.array([[1.0]]))[0] == 0


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_values(parse("log(z1)", 1), np.array([[0.0]]))
    with pytest.raises(DomainError):
        eval_jet3(parse("1/z1", 1), np.array([0.0]))


def test_polynomial_derivatives_exact():
    e = parse("z1^3*z2 + 2*z2^2", 2)
    j = eval_jet3(e, np.array([1.5, -0.5]))
    x, y = 1.5, -0.5
    assert np.isclose(j.value, x**3 * y + 2 * y**2)
    assert np.allclose(j.first, [3 * x**2 * y, x**3 + 4 * y])
    assert np.allclose(j.second, [[6 * x * y, 3 * x**2], [3 * x**2, 4]])
    assert np.isclose(j.third[0, 0, 0], 6 * y)
    assert np.isclose(j.third[0, 0, 1], 6 * x)
    assert np.isclose(j.third[1, 1, 1], 0)


def test_holomorphic_functions():
    z = np.array([0.3 + 0.2j])
    for name, f, df in [("exp", np.exp, np.exp), ("sin", np.sin, np.cos), ("log", np.log, lambda x: 1 / x),
                        ("sqrt", np.sqrt, lambda x: 0.5 / np.sqrt(x))]:
        j = eval_jet3(parse(f"{name}(z1)", 1), z)
        assert np.isclose(j.value, f(z[0]))
        assert np.isclose(j.first[0], df(z[0]))


@pytest.mark.parametrize("src", SAMPLES)
def test_ad_matches_fd_oracle(src):
    e = parse(src, 3)
    p = np.array([0.1 + 0.05j, -0.2, 0.15 - 0.1j])
    ad = eval_jet3(e, p)
    fd = fd_oracle_jet(e, p, step=1e-2)
    assert np.allclose(ad.first, fd.first, atol=1e-9)
    assert np.allclose(ad.second, fd.second, atol=1e-8)
    assert np.allclose(ad.third, fd.third, atol=1e-6)


def test_fd_step_range_enforced():
    e = parse("z1", 1)
    with pytest.raises(ValueError):
        fd_oracle_jet(e, np.array([0.0]), step=1.0)


def test_symmetrize_idempotent(rng):
    t = rng.standard_normal((3, 3, 3))
    s = symmetrize(t, 3)
    assert np.allclose(symmetrize(s, 3), s)
    assert np.allclose(s, s.transpose(1, 0, 2))


coeffs = st.lists(st.floats(-2, 2), min_size=4, max_size=4)


@given(coeffs, coeffs)
def test_product_rule(a, b):
    # (fg)' = f'g + fg' for random cubic polynomials in two variables
    f = parse(f"{a[0]} + {a[1]}*z1 + {a[2]}*z1*z2 + {a[3]}*z2^3", 2)
    g = parse(f"{b[0]} + {b[1]}*z2 + {b[2]}*z1^2 + {b[3]}*z1*z2^2", 2)
    fg = parse(f"({to_string(f.ast)})*({to_string(g.ast)})", 2)
    p = np.array([0.3 - 0.1j, -0.4 + 0.2j])
    jf, jg, jfg = eval_jet3(f, p), eval_jet3(g, p), eval_jet3(fg, p)
    assert np.allclose(jfg.first, jf.first * jg.value + jf.value * jg.first, atol=1e-12)


@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False).filter(lambda z: abs(z) > 0.1))
def test_reciprocal_inverse(z):
    d = dual.variable(np.array(z), 0, 2, 1)
    one = dual.mul(d, dual.recip(d))
    assert np.allclose(one.data.ravel()[1:], 0, atol=1e-12)
    assert np.isclose(one.primal, 1)


def test_vectorised_values():
    e = parse("z1*z2 + 1", 2)
    pts = np.arange(12, dtype=complex).reshape(3, 2, 2)
    assert np.allclose(eval_values(e, pts), pts[..., 0] * pts[..., 1] + 1)


def test_fd_oracle_cubic_at_step_1e3():
    e = parse("2*z1^3 - z1*z2^2 + 0.5*z2*z3 + z3^3 - 4*z1 + 1", 3)
    p = np.array([0.2 - 0.1j, 0.4, -0.3 + 0.2j])
    ad, fd = eval_jet3(e, p), fd_oracle_jet(e, p, step=1e-3)
    for a, f in ((ad.first, fd.first), (ad.second, fd.second), (ad.third, fd.third)):
        assert np.linalg.norm(a - f) <= 1e-6 * max(1.0, np.linalg.norm(a))


def test_fd_oracle_exp_at_step_1e4():
    fd = fd_oracle_jet(parse("exp(z1)", 1), np.array([0.0]), step=1e-4)
    assert abs(fd.first[0] - 1) <= 1e-7
