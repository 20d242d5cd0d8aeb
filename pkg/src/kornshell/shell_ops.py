"""Differential operators for displacement fields on thin shells.

The central object is the discrete gradient of a displacement field given by
its components (u_t, u_theta, u_z) in the local orthonormal frame
(n, e_theta, e_z).  In principal coordinates with Lame coefficients
A_theta, A_z and principal curvatures kappa_theta, kappa_z the gradient
matrix has rows indexed by the output component and columns by the
differentiation direction (t, theta, z):

    row t:      u_t,t
                (u_t,theta - A_th k_th u_th) / (A_th (1 + t k_th))
                (u_t,z     - A_z  k_z  u_z ) / (A_z  (1 + t k_z ))
    row theta:  u_th,t
                (A_z u_th,theta + A_z A_th k_th u_t + A_th,z u_z)
                                         / (A_z A_th (1 + t k_th))
                (A_th u_th,z - A_z,theta u_z) / (A_z A_th (1 + t k_z))
    row z:      u_z,t
                (A_z u_z,theta - A_th,z u_th) / (A_z A_th (1 + t k_th))
                (A_th u_z,z + A_z A_th k_z u_t + A_z,theta u_th)
                                         / (A_z A_th (1 + t k_z))

The "simplified" variant replaces every metric factor (1 + t*kappa) by 1;
its distance to the full gradient is of order h because |t| <= h/2.

Partial derivatives are the second-order stencils from the backend kernels,
so on a flat plate (unit coefficients, zero curvature) the assembly
degenerates to the plain component-wise finite-difference Jacobian.
"""

from dataclasses import dataclass

import numpy as np

from kornshell import backend
from kornshell.grid import ScalarField, ShellGrid, VecField3, weight_array

__all__ = [
    "FrameMatrixField",
    "ShellGradient",
    "ShellTooThickError",
    "gradient",
    "simplified_gradient",
    "strain",
    "normal_component",
    "rigid_motion_field",
    "DisplacementNorms",
    "displacement_norms",
    "interp_quotient",
    "second_quotient",
]


class ShellTooThickError(ValueError):
    """1 + t*kappa dropped below 1/2 somewhere on the grid."""


@dataclass(frozen=True)
class FrameMatrixField:
    """A 3x3 matrix per node, rows/columns ordered (t, theta, z).

    ``entries`` has shape (3, 3, n_t, n_theta, n_z).
    """

    grid: ShellGrid
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.shape != (3, 3) + self.grid.shape:
            raise ValueError(f"entries shape {e.shape} incompatible with grid {self.grid.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("matrix field contains non-finite values")
        object.__setattr__(self, "entries", e)

    def entry(self, i, j):
        return ScalarField(self.grid, self.entries[i, j])

    def transposed(self):
        return FrameMatrixField(self.grid, np.swapaxes(self.entries, 0, 1))

    def __sub__(self, other):
        return FrameMatrixField(self.grid, self.entries - other.entries)

    def __add__(self, other):
        return FrameMatrixField(self.grid, self.entries + other.entries)

    def __mul__(self, c):
        return FrameMatrixField(self.grid, self.entries * float(c))

    __rmul__ = __mul__


class ShellGradient:
    """Gradient assembly for one (patch, grid) pair, with its transpose.

    Precomputes every pointwise coefficient once; ``apply`` maps stacked
    components (3, ...) to the 9 matrix channels (3, 3, ...) and
    ``apply_adjoint`` is the exact transpose with respect to the plain
    (unweighted) nodewise pairing.  The adjoint is what turns the gradient
    into matrix-free quadratic forms.
    """

    def __init__(self, patch, grid: ShellGrid, simplified=False):
        self.grid = grid
        self.simplified = bool(simplified)
        TH, ZZ = np.meshgrid(grid.theta_nodes, grid.z_nodes, indexing="ij")
        shape2 = (grid.n_theta, grid.n_z)

        def ev(fn):
            return np.ascontiguousarray(np.broadcast_to(np.asarray(fn(TH, ZZ), np.float64), shape2))

        a_th, a_z = ev(patch.A_theta), ev(patch.A_z)
        k_th, k_z = ev(patch.kappa_theta), ev(patch.kappa_z)
        da_th_dz, da_z_dth = ev(patch.dA_theta_dz), ev(patch.dA_z_dtheta)
        if np.min(a_th) <= 0 or np.min(a_z) <= 0:
            raise ValueError("Lame coefficients must be positive on the grid")

        t = grid.t_nodes[:, None, None]
        if simplified:
            rho_th = np.ones((grid.n_t, 1, 1))
            rho_z = np.ones((grid.n_t, 1, 1))
        else:
            rho_th = 1.0 + t * k_th[None]
            rho_z = 1.0 + t * k_z[None]
            if min(rho_th.min(), rho_z.min()) < 0.5 - 1e-12:
                raise ShellTooThickError(
                    "metric factor 1 + t*kappa fell below 1/2; shell too thick for this patch"
                )

        full = (grid.n_t,) + shape2

        def bc(arr):
            return np.ascontiguousarray(np.broadcast_to(arr, full))

        inv_ath_rth = 1.0 / (a_th[None] * rho_th)
        inv_az_rz = 1.0 / (a_z[None] * rho_z)
        self.c12 = bc(inv_ath_rth)
        self.p12 = bc(-k_th[None] / rho_th)
        self.c13 = bc(inv_az_rz)
        self.p13 = bc(-k_z[None] / rho_z)
        self.c22 = bc(inv_ath_rth)
        self.p22t = bc(k_th[None] / rho_th)
        self.p22z = bc(da_th_dz[None] * inv_ath_rth / a_z[None])
        self.c23 = bc(inv_az_rz)
        self.p23 = bc(-da_z_dth[None] * inv_az_rz / a_th[None])
        self.c32 = bc(inv_ath_rth)
        self.p32 = bc(-da_th_dz[None] * inv_ath_rth / a_z[None])
        self.c33 = bc(inv_az_rz)
        self.p33t = bc(k_z[None] / rho_z)
        self.p33z = bc(da_z_dth[None] * inv_az_rz / a_th[None])

    def _d(self, arr, axis):
        return backend.diff_axis(arr, axis, self.grid.spacing(axis))

    def _dT(self, arr, axis):
        return backend.diff_axis_adjoint(arr, axis, self.grid.spacing(axis))

    def apply(self, comps):
        u_t, u_th, u_z = comps[0], comps[1], comps[2]
        out = np.empty((3, 3) + self.grid.shape)
        out[0, 0] = self._d(u_t, 0)
        out[1, 0] = self._d(u_th, 0)
        out[2, 0] = self._d(u_z, 0)
        out[0, 1] = self.c12 * self._d(u_t, 1) + self.p12 * u_th
        out[0, 2] = self.c13 * self._d(u_t, 2) + self.p13 * u_z
        out[1, 1] = self.c22 * self._d(u_th, 1) + self.p22t * u_t + self.p22z * u_z
        out[1, 2] = self.c23 * self._d(u_th, 2) + self.p23 * u_z
        out[2, 1] = self.c32 * self._d(u_z, 1) + self.p32 * u_th
        out[2, 2] = self.c33 * self._d(u_z, 2) + self.p33t * u_t + self.p33z * u_th
        return out

    def apply_adjoint(self, Y):
        out = np.empty((3,) + self.grid.shape)
        out[0] = (
            self._dT(Y[0, 0], 0)
            + self._dT(self.c12 * Y[0, 1], 1)
            + self._dT(self.c13 * Y[0, 2], 2)
            + self.p22t * Y[1, 1]
            + self.p33t * Y[2, 2]
        )
        out[1] = (
            self._dT(Y[1, 0], 0)
            + self._dT(self.c22 * Y[1, 1], 1)
            + self._dT(self.c23 * Y[1, 2], 2)
            + self.p12 * Y[0, 1]
            + self.p32 * Y[2, 1]
            + self.p33z * Y[2, 2]
        )
        out[2] = (
            self._dT(Y[2, 0], 0)
            + self._dT(self.c32 * Y[2, 1], 1)
            + self._dT(self.c33 * Y[2, 2], 2)
            + self.p13 * Y[0, 2]
            + self.p22z * Y[1, 1]
            + self.p23 * Y[1, 2]
        )
        return out


def gradient(u: VecField3, patch, grid: ShellGrid):
    """Frame-components gradient of u on the shell."""
    if u.grid != grid:
        raise ValueError("field grid does not match the requested grid")
    op = ShellGradient(patch, grid, simplified=False)
    return FrameMatrixField(grid, op.apply(u.stacked()))


def simplified_gradient(u: VecField3, patch, grid: ShellGrid):
    """Gradient with every (1 + t*kappa) factor replaced by 1."""
    if u.grid != grid:
        raise ValueError("field grid does not match the requested grid")
    op = ShellGradient(patch, grid, simplified=True)
    return FrameMatrixField(grid, op.apply(u.stacked()))


def strain(M: FrameMatrixField):
    """Symmetric part (M + M^T)/2, entrywise over the matrix axes."""
    return FrameMatrixField(M.grid, 0.5 * (M.entries + np.swapaxes(M.entries, 0, 1)))


def normal_component(u: VecField3):
    """u . n; in frame components this is just u_t."""
    return u.u_t


def rigid_motion_field(a, B, patch, grid: ShellGrid):
    """Frame components of the linearized rigid motion v(X) = a + B X.

    B must be skew-symmetric; the field is sampled at the shell points
    X = r(theta, z) + t n(theta, z) and projected on (n, e_theta, e_z).
    Rigid motions span the exact kernel of the strain, which makes them the
    canonical validation inputs for the gradient assembly.
    """
    a = np.asarray(a, dtype=np.float64).reshape(3)
    B = np.asarray(B, dtype=np.float64).reshape(3, 3)
    skew_defect = np.max(np.abs(B + B.T))
    if skew_defect > 1e-12 * max(1.0, np.max(np.abs(B))):
        raise ValueError("B must be skew-symmetric")
    if patch.embedding is None or patch.frame is None:
        raise ValueError(f"patch {patch.name!r} has no embedding")

    TH, ZZ = np.meshgrid(grid.theta_nodes, grid.z_nodes, indexing="ij")
    r = patch.embedding(TH, ZZ)  # (n_theta, n_z, 3)
    e_th, e_z, n = patch.frame(TH, ZZ)
    t = grid.t_nodes[:, None, None, None]
    X = r[None] + t * n[None]
    v = a + np.einsum("ij,...j->...i", B, X)
    comps = {
        "u_t": np.einsum("...i,...i->...", v, np.broadcast_to(n[None], v.shape)),
        "u_theta": np.einsum("...i,...i->...", v, np.broadcast_to(e_th[None], v.shape)),
        "u_z": np.einsum("...i,...i->...", v, np.broadcast_to(e_z[None], v.shape)),
    }
    return VecField3(
        ScalarField(grid, comps["u_t"]),
        ScalarField(grid, comps["u_theta"]),
        ScalarField(grid, comps["u_z"]),
    )


@dataclass(frozen=True)
class DisplacementNorms:
    """The four weighted norms every shell quotient is built from."""

    grad: float
    strain: float
    field: float
    normal: float


def displacement_norms(u: VecField3, patch, grid: ShellGrid, simplified=False):
    w = weight_array(patch, grid)
    op = ShellGradient(patch, grid, simplified=simplified)
    M = op.apply(u.stacked())
    E = 0.5 * (M + np.swapaxes(M, 0, 1))
    grad_sq = float(sum(np.sum(w * (M[i, j] * M[i, j])) for i in range(3) for j in range(3)))
    strain_sq = float(sum(np.sum(w * (E[i, j] * E[i, j])) for i in range(3) for j in range(3)))
    comps = u.stacked()
    field_sq = float(sum(np.sum(w * (comps[i] * comps[i])) for i in range(3)))
    normal_sq = float(np.sum(w * (comps[0] * comps[0])))
    return DisplacementNorms(
        grad=float(np.sqrt(grad_sq)),
        strain=float(np.sqrt(strain_sq)),
        field=float(np.sqrt(field_sq)),
        normal=float(np.sqrt(normal_sq)),
    )


def _require_nonzero(norms):
    if norms.field == 0.0 and norms.grad == 0.0:
        raise ValueError("quotient undefined for the identically zero field")


def interp_quotient(u: VecField3, patch, grid: ShellGrid, simplified=False):
    """|grad u|^2 / ( |u_t| |e(u)| / h + |u|^2 + |e(u)|^2 ).

    With ``simplified=True`` both the numerator and the strain use the
    simplified gradient.
    """
    norms = displacement_norms(u, patch, grid, simplified=simplified)
    _require_nonzero(norms)
    denom = norms.normal * norms.strain / grid.h + norms.field**2 + norms.strain**2
    return norms.grad**2 / denom


def second_quotient(u: VecField3, patch, grid: ShellGrid, simplified=False):
    """|grad u|^2 / ( (1/h) (|u|^2 + |e(u)|^2) )."""
    norms = displacement_norms(u, patch, grid, simplified=simplified)
    _require_nonzero(norms)
    denom = (norms.field**2 + norms.strain**2) / grid.h
    return norms.grad**2 / denom
