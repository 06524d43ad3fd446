"""Curvature of the complexified projective plane at a few chart points.

Prints the eigenvalues of W+ and of the full curvature endomorphism on
2-forms, the W- / W+ ratio and the scalar curvature.

    python3 demos/cp2_self_duality.py
"""
import numpy as np

from holoconf.catalog import builtin
from holoconf.curvature import curvature
from holoconf.verify import sample_points


def main():
    m = builtin("cp2_complexification").to_metric()
    rng = np.random.default_rng(1)
    for p in sample_points(m, 3, rng):
        r = curvature(m, p)
        wp = np.sort_complex(np.linalg.eigvals(r.blocks["Wplus"]).round(10))
        ratio = np.linalg.norm(r.blocks["Wminus"]) / np.linalg.norm(r.blocks["Wplus"])
        print(f"p = {np.round(p, 3)}")
        print(f"  Scal = {r.scal.real:+.6f}   |W-|/|W+| = {ratio:.1e}")
        print(f"  eigenvalues of W+ = {np.round(wp.real, 6)}")


if __name__ == "__main__":
    main()
