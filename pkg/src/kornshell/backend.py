"""Selects the stencil core at import time.

The compiled extension :mod:`kornshell._stencils` is used when it imported
successfully; otherwise the pure-numpy fallback :mod:`kornshell._stencils_py`
takes over.  Setting the environment variable ``KORNSHELL_FORCE_PYTHON`` to a
non-empty value other than ``0`` forces the fallback (useful for
benchmarking, see ``benchmarks/bench_stencils.py``).

Both implementations share one contract: ``diff3(a, axis, inv2d)`` applies
the second-order one-axis difference (central stencil inside, one-sided
second-order stencils at the two boundary nodes) to a C-contiguous float64
array of rank 3, and ``diff3_adjoint`` applies the exact transpose of that
linear map.  ``inv2d`` is ``1/(2*spacing)``.
"""

import os

import numpy as np

if os.environ.get("KORNSHELL_FORCE_PYTHON", "0") not in ("", "0"):
    from kornshell import _stencils_py as _impl

    COMPILED = False
else:
    try:
        from kornshell import _stencils as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from kornshell import _stencils_py as _impl  # type: ignore[no-redef]

        COMPILED = False

BACKEND = "compiled" if COMPILED else "python"


def _as3d(values):
    a = np.ascontiguousarray(values, dtype=np.float64)
    if a.ndim == 2:
        return a.reshape(a.shape + (1,)), True
    if a.ndim != 3:
        raise ValueError("stencil kernels expect rank-2 or rank-3 arrays")
    return a, False


def diff_axis(values, axis, spacing):
    """Second-order derivative of a 2-d or 3-d array along one axis."""
    a, squeezed = _as3d(values)
    out = _impl.diff3(a, int(axis), 0.5 / float(spacing))
    return out[..., 0] if squeezed else out


def diff_axis_adjoint(values, axis, spacing):
    """Transpose of :func:`diff_axis` with identical spacing."""
    a, squeezed = _as3d(values)
    out = _impl.diff3_adjoint(a, int(axis), 0.5 / float(spacing))
    return out[..., 0] if squeezed else out


def implementations():
    """Both kernel modules, for cross-checks and benchmarks."""
    from kornshell import _stencils_py

    impls = {"python": _stencils_py}
    try:
        from kornshell import _stencils

        impls["compiled"] = _stencils
    except ImportError:
        pass
    return impls
