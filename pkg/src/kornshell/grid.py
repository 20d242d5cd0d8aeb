"""Tensor grids over the thin shell and fields living on their nodes.

The shell of thickness h around a patch is sampled on a tensor product of
uniform nodes: t in [-h/2, h/2] across the thickness, theta in [0, omega],
z in [z_lo, z_hi].  Field values are stored as float64 arrays of shape
(n_t, n_theta, n_z); flattened DOF vectors and the binary blob format use
t-fastest ordering (theta next, z slowest), i.e. ``ravel(order="F")`` of
that array.

The inner product of two scalar fields carries the mid-surface area weight
A_z * A_theta and nothing else (no thickness Jacobian), discretized by the
trapezoidal rule per axis; norms are the square roots of the corresponding
quadratic forms, summed over components for vector/matrix fields.
"""

from dataclasses import dataclass

import numpy as np

from kornshell import backend

__all__ = [
    "GridError",
    "FieldError",
    "ShellGrid",
    "ScalarField",
    "VecField3",
    "make_grid",
    "diff",
    "sample",
    "sample_vec",
    "quad_weights_1d",
    "weight_array",
    "inner_product",
    "norm",
]

AXES = {"t": 0, "theta": 1, "z": 2}


class GridError(ValueError):
    """Grid construction or compatibility failure."""


class FieldError(ValueError):
    """Field values violate shape or finiteness requirements."""


@dataclass(frozen=True)
class ShellGrid:
    """Uniform tensor grid; immutable, cheap to compare and share."""

    h: float
    n_t: int
    n_theta: int
    n_z: int
    omega: float
    z_lo: float
    z_hi: float

    def __post_init__(self):
        if self.h <= 0:
            raise GridError("thickness h must be positive")
        if min(self.n_t, self.n_theta, self.n_z) < 3:
            raise GridError("need at least 3 nodes per axis")
        if self.omega <= 0 or self.z_hi <= self.z_lo:
            raise GridError("invalid angular or axial range")

    @property
    def shape(self):
        return (self.n_t, self.n_theta, self.n_z)

    @property
    def t_nodes(self):
        return np.linspace(-0.5 * self.h, 0.5 * self.h, self.n_t)

    @property
    def theta_nodes(self):
        return np.linspace(0.0, self.omega, self.n_theta)

    @property
    def z_nodes(self):
        return np.linspace(self.z_lo, self.z_hi, self.n_z)

    @property
    def dt(self):
        return self.h / (self.n_t - 1)

    @property
    def dtheta(self):
        return self.omega / (self.n_theta - 1)

    @property
    def dz(self):
        return (self.z_hi - self.z_lo) / (self.n_z - 1)

    def spacing(self, axis):
        return (self.dt, self.dtheta, self.dz)[AXES[axis] if isinstance(axis, str) else axis]

    def meshes(self):
        return np.meshgrid(self.t_nodes, self.theta_nodes, self.z_nodes, indexing="ij")


def max_curvature(patch, n_samples=65):
    th = np.linspace(0.0, patch.omega, n_samples)
    zz = np.linspace(patch.z_lo, patch.z_hi, n_samples)
    TH, ZZ = np.meshgrid(th, zz, indexing="ij")
    return float(
        max(
            np.max(np.abs(patch.kappa_theta(TH, ZZ))),
            np.max(np.abs(patch.kappa_z(TH, ZZ))),
        )
    )


def make_grid(patch, h, n_t=8, n_theta=48, n_z=48):
    """Grid over the thickness-h shell; rejects shells too thick to embed.

    Requires (h/2) * max|kappa| <= 1/2 so the metric factors 1 + t*kappa
    stay >= 1/2 on every node.
    """
    kmax = max_curvature(patch)
    if 0.5 * h * kmax > 0.5 + 1e-12:
        raise GridError(
            f"shell of thickness {h} too thick for patch {patch.name!r}: "
            f"h must not exceed 1/max|kappa| = {1.0 / kmax:.6g}"
        )
    return ShellGrid(
        h=float(h),
        n_t=int(n_t),
        n_theta=int(n_theta),
        n_z=int(n_z),
        omega=patch.omega,
        z_lo=patch.z_lo,
        z_hi=patch.z_hi,
    )


@dataclass(frozen=True)
class ScalarField:
    """One float64 value per grid node."""

    grid: ShellGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise FieldError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise FieldError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def __mul__(self, c):
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values - other.values)


@dataclass(frozen=True)
class VecField3:
    """Displacement components (u_t, u_theta, u_z) in the local frame."""

    u_t: ScalarField
    u_theta: ScalarField
    u_z: ScalarField

    def __post_init__(self):
        if not (self.u_t.grid == self.u_theta.grid == self.u_z.grid):
            raise FieldError("vector components must share one grid")

    @property
    def grid(self):
        return self.u_t.grid

    def components(self):
        return (self.u_t, self.u_theta, self.u_z)

    def stacked(self):
        """(3, n_t, n_theta, n_z) view used by the operator kernels."""
        return np.stack([c.values for c in self.components()])

    def __mul__(self, c):
        return VecField3(*(comp * c for comp in self.components()))

    __rmul__ = __mul__

    def __add__(self, other):
        return VecField3(*(a + b for a, b in zip(self.components(), other.components())))

    def __sub__(self, other):
        return VecField3(*(a - b for a, b in zip(self.components(), other.components())))

    @classmethod
    def from_stacked(cls, grid, arr):
        return cls(*(ScalarField(grid, arr[i]) for i in range(3)))


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise GridError("fields live on different grids")


def diff(f: ScalarField, axis):
    """Second-order finite difference of a scalar field along one axis."""
    ax = AXES[axis] if isinstance(axis, str) else int(axis)
    out = backend.diff_axis(f.values, ax, f.grid.spacing(ax))
    return ScalarField(f.grid, out)


def sample(fn, grid: ShellGrid):
    """Evaluate fn(t, theta, z) on the grid nodes."""
    T, TH, Z = grid.meshes()
    values = np.asarray(fn(T, TH, Z), dtype=np.float64)
    values = np.broadcast_to(values, grid.shape)
    return ScalarField(grid, np.array(values))


def sample_vec(fn_t, fn_theta, fn_z, grid: ShellGrid):
    return VecField3(sample(fn_t, grid), sample(fn_theta, grid), sample(fn_z, grid))


def quad_weights_1d(n, spacing):
    """Trapezoidal weights: spacing * [1/2, 1, ..., 1, 1/2]."""
    w = np.full(n, float(spacing))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def weight_array(patch, grid: ShellGrid):
    """Quadrature weight per node: trapezoid x trapezoid x trapezoid times
    the mid-surface area density A_z * A_theta (t-independent)."""
    w_t = quad_weights_1d(grid.n_t, grid.dt)
    w_th = quad_weights_1d(grid.n_theta, grid.dtheta)
    w_z = quad_weights_1d(grid.n_z, grid.dz)
    TH, ZZ = np.meshgrid(grid.theta_nodes, grid.z_nodes, indexing="ij")
    area = np.asarray(patch.A_z(TH, ZZ), dtype=np.float64) * np.asarray(
        patch.A_theta(TH, ZZ), dtype=np.float64
    )
    return w_t[:, None, None] * (w_th[:, None] * w_z[None, :] * area)[None, :, :]


def inner_product(f: ScalarField, g: ScalarField, patch):
    """Weighted L2 pairing; symmetric by construction (f*g computed first)."""
    _check_same_grid(f, g)
    w = weight_array(patch, f.grid)
    return float(np.sum(w * (f.values * g.values)))


def _sq(values, w):
    return float(np.sum(w * (values * values)))


def norm(obj, patch):
    """Weighted L2 norm of a scalar, vector, or 3x3 matrix field."""
    if isinstance(obj, ScalarField):
        w = weight_array(patch, obj.grid)
        return float(np.sqrt(_sq(obj.values, w)))
    if isinstance(obj, VecField3):
        w = weight_array(patch, obj.grid)
        return float(np.sqrt(sum(_sq(c.values, w) for c in obj.components())))
    entries = getattr(obj, "entries", None)
    if entries is not None:  # FrameMatrixField without importing shell_ops
        w = weight_array(patch, obj.grid)
        return float(np.sqrt(sum(_sq(entries[i, j], w) for i in range(3) for j in range(3))))
    raise TypeError(f"cannot take the norm of {type(obj).__name__}")
