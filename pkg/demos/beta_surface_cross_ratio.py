"""Null geodesics inside a beta-surface of the complexified projective plane.

Along each geodesic the points A(t) move on a line l and the lines a(t) turn
about a point L.  The cross-ratio of three positions with L on l matches the
cross-ratio of the three lines with l in the pencil through L.

    python3 demos/beta_surface_cross_ratio.py
"""
import numpy as np

from holoconf import geodesics as geo
from holoconf import surfaces as surf
from holoconf.catalog import builtin


def main():
    m = builtin("cp2_complexification").to_metric()
    S, data = surf.cp2_beta_surface()
    rng = np.random.default_rng(3)
    for q in S.sample(rng, 3):
        print(surf.beta_surface_check(m, S, q))
        x0, T = S.jets(q, 1)
        v0 = T @ (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        path = geo.integrate_geodesic(m, x0, v0 / np.linalg.norm(v0), t_end=0.3)
        i, j, k = 0, len(path) // 3, len(path) - 1
        A = [np.concatenate([[1.0], path.x[n][:2]]) for n in (i, j, k)]
        a = [np.concatenate([[1.0], path.x[n][2:]]) for n in (i, j, k)]
        lhs = surf.cross_ratio(*A, data["L"])
        rhs = surf.cross_ratio(*a, data["m"])
        print(f"  points on l: {lhs:.10f}   lines through L: {rhs:.10f}")


if __name__ == "__main__":
    main()
