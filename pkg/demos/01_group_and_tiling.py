# Group operations, dilations and the lattice tiling
#
# The toolkit works on R^3 (and R^{2n+1} in general) equipped with a
# non-commutative product: moving horizontally picks up a vertical offset
# proportional to the signed area swept.  This script walks through the
# product, the anisotropic dilations that scale horizontal and vertical
# directions differently, and the lattice tiling of space by copies of the
# cell [-1,1)^3.

import numpy as np

import heishom as hh


def main():
    x = np.array([1.0, 2.0, 3.0])
    y = np.array([4.0, 5.0, 6.0])

    # -- the group product is not commutative: the third component records
    #    the area term (x1*y2 - x2*y1)/2 on top of plain addition.
    print("x * y =", hh.group_mul(x, y))
    print("y * x =", hh.group_mul(y, x))
    print("x * x^{-1} =", hh.group_mul(x, hh.group_inv(x)))

    # -- dilations scale the horizontal plane linearly and the vertical axis
    #    quadratically, which is exactly what makes them homomorphisms.
    t = 3.0
    print("\ndilate(3, x)          =", hh.dilate(t, x))
    print("dilate(3, x*y)        =", hh.dilate(t, hh.group_mul(x, y)))
    print("dilate(3,x)*dilate(3,y)=", hh.group_mul(hh.dilate(t, x), hh.dilate(t, y)))

    # -- the homogeneous norm respects those dilations: |delta_t x| = t |x|.
    print("\n|x|_h           =", hh.homogeneous_norm(x))
    print("|dilate(3,x)|_h =", hh.homogeneous_norm(hh.dilate(t, x)), "(= 3 |x|_h)")

    # -- tiling: every point belongs to exactly one translated copy of the
    #    cell Q = [-1,1)^3.  tile_index finds the copy, pullback_to_cell also
    #    returns the representative inside Q, and translate_tau undoes it.
    rng = np.random.default_rng(0)
    X = rng.uniform(-10.0, 10.0, size=(5, 3))
    k, y_cell = hh.pullback_to_cell(X)
    back = hh.translate_tau(k, y_cell)
    print("\npoints:\n", np.round(X, 3))
    print("tile indices:\n", k)
    print("representatives in [-1,1)^3:\n", np.round(y_cell, 3))
    print("max round-trip error:", np.max(np.abs(back - X)))

    # -- tile indices compose like the group itself (with integer arithmetic),
    #    so the set of tiles is closed under translation by tiles.
    k1 = np.array([1, 0, 0])
    k2 = np.array([0, 1, 0])
    print("\ntau_compose(k1, k2) =", hh.tau_compose(k1, k2))

    # -- the same tiling exists at every dyadic scale: rescaled_tile_index
    #    locates the dilated tile containing a point.
    for t in (0.5, 2.0, 3.0):
        kt = hh.rescaled_tile_index(X, t)
        yt = hh.translate_tau(-kt, hh.dilate(1.0 / t, X))
        print(f"scale t={t}: all representatives inside the cell ->",
              bool(np.all(yt >= -1.0) and np.all(yt < 1.0)))


if __name__ == "__main__":
    main()
