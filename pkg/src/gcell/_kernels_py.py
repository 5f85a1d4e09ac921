"""Pure-numpy reference implementations of the 2D hot kernels.

These mirror the compiled kernels in gcell._stepcore expression-for-expression
so both backends produce bit-identical output; keep the arithmetic order in
sync when editing either side.
"""

import numpy as np


def explicit_rhs(w, v1, v2, p1, p2, sl, d, h, out=None):
    """Right side of w_t = d lap(P.x + w) - sl |D(P.x + w)| - V . D(P.x + w).

    The affine part enters through the (p1, p2) offsets added to each
    one-sided difference; w itself is periodic.  Passing d = 0 gives the
    Hamiltonian-plus-advection part used by the IMEX splitting.
    """
    inv_h = 1.0 / h
    dxm = (w - np.roll(w, 1, axis=0)) * inv_h + p1
    dxp = (np.roll(w, -1, axis=0) - w) * inv_h + p1
    dym = (w - np.roll(w, 1, axis=1)) * inv_h + p2
    dyp = (np.roll(w, -1, axis=1) - w) * inv_h + p2
    gx = np.maximum(np.maximum(dxm, 0.0) ** 2, np.minimum(dxp, 0.0) ** 2)
    gy = np.maximum(np.maximum(dym, 0.0) ** 2, np.minimum(dyp, 0.0) ** 2)
    god = np.sqrt(gx + gy)
    adv = np.where(v1 > 0.0, dxm, dxp) * v1 + np.where(v2 > 0.0, dym, dyp) * v2
    lap = (np.roll(w, -1, axis=0) + np.roll(w, 1, axis=0)
           + np.roll(w, -1, axis=1) + np.roll(w, 1, axis=1) - 4.0 * w) * inv_h**2
    res = d * lap - sl * god - adv
    if out is None:
        return res
    out[...] = res
    return out


def godunov_offset(w, p1, p2, h, out=None):
    """Godunov |P + Dw| with the affine offsets folded in."""
    inv_h = 1.0 / h
    dxm = (w - np.roll(w, 1, axis=0)) * inv_h + p1
    dxp = (np.roll(w, -1, axis=0) - w) * inv_h + p1
    dym = (w - np.roll(w, 1, axis=1)) * inv_h + p2
    dyp = (np.roll(w, -1, axis=1) - w) * inv_h + p2
    gx = np.maximum(np.maximum(dxm, 0.0) ** 2, np.minimum(dxp, 0.0) ** 2)
    gy = np.maximum(np.maximum(dym, 0.0) ** 2, np.minimum(dyp, 0.0) ** 2)
    res = np.sqrt(gx + gy)
    if out is None:
        return res
    out[...] = res
    return out
