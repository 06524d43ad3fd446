"""The alpha-cone curvature along null geodesics, three ways.

For a null direction v and a generator X of an alpha-plane containing v we
compare the Weyl slot <W+(v, X) v, X>, the same number read off from the full
curvature, and the cubic coefficient of <J, E> for the Jacobi field with
J(0) = 0, J'(0) = X.

    python3 demos/alpha_cone.py
"""
import numpy as np

from holoconf import geodesics as geo
from holoconf import isotropic as iso
from holoconf.catalog import builtin
from holoconf.verify import sample_points


def main():
    rng = np.random.default_rng(2)
    for name in ("cp2_complexification", "generic4", "round4"):
        m = builtin(name).to_metric()
        p = sample_points(m, 1, rng)[0]
        v = iso.random_null_vector(m, p, rng)
        v /= np.linalg.norm(v)
        X = iso.null_plane_through(m, p, v, "alpha")
        f = geo.alpha_cone_curvature_formula(m, p, v, X).value
        d = geo.alpha_cone_curvature_oracle(m, p, v, X, method="direct")
        j = geo.alpha_cone_curvature_oracle(m, p, v, X, method="jacobi")
        print(f"{name:22s} W+ slot {f:+.6e}   direct {d:+.6e}   Jacobi {j:+.6e}")


if __name__ == "__main__":
    main()
