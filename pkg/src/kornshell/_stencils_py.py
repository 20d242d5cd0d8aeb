"""Pure-numpy stencil kernels (fallback for the compiled core).

Second-order one-axis finite differences on 3-d arrays and their exact
transposes.  Interior nodes use the central stencil (f[i+1] - f[i-1])/(2d);
the first and last node use the one-sided stencils
(-3f[0] + 4f[1] - f[2])/(2d) and (3f[n-1] - 4f[n-2] + f[n-3])/(2d),
both exact on quadratics.  ``kornshell.backend`` picks this module when the
compiled extension is unavailable or KORNSHELL_FORCE_PYTHON is set.
"""

import numpy as np


def diff3(a, axis, inv2d):
    """Differentiate ``a`` along ``axis``; ``inv2d`` = 1/(2*spacing)."""
    if a.shape[axis] < 3:
        raise ValueError("differencing needs at least 3 nodes on the axis")
    v = np.moveaxis(a, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = v[2:] - v[:-2]
    out[0] = -3.0 * v[0] + 4.0 * v[1] - v[2]
    out[-1] = 3.0 * v[-1] - 4.0 * v[-2] + v[-3]
    out *= inv2d
    return np.moveaxis(out, 0, axis)


def diff3_adjoint(y, axis, inv2d):
    """Exact transpose of :func:`diff3` (stencils reversed)."""
    if y.shape[axis] < 3:
        raise ValueError("differencing needs at least 3 nodes on the axis")
    w = np.moveaxis(y, axis, 0)
    out = np.zeros_like(w)
    yi = w[1:-1]
    out[:-2] -= yi
    out[2:] += yi
    out[0] -= 3.0 * w[0]
    out[1] += 4.0 * w[0]
    out[2] -= w[0]
    out[-1] += 3.0 * w[-1]
    out[-2] -= 4.0 * w[-1]
    out[-3] += w[-1]
    out *= inv2d
    return np.moveaxis(out, 0, axis)
