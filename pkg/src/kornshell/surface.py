"""Shell mid-surfaces in principal curvature coordinates.

A patch is parametrized by (theta, z) with theta in [0, omega] and z in
[z_lo, z_hi]; the coordinate lines follow the principal directions, so the
parametrization is orthogonal.  A patch carries the two Lame coefficients
A_theta = |dr/dtheta| and A_z = |dr/dz|, the principal curvatures, and the
two Lame-coefficient partials that enter the frame-components gradient
(dA_theta/dz and dA_z/dtheta).

Sign convention: the unit normal of every built-in patch is chosen so that
the Rodrigues relations

    dn/dtheta = kappa_theta * A_theta * e_theta
    dn/dz     = kappa_z     * A_z     * e_z

hold with the advertised curvatures.  For the built-in cylinder, sphere band
and torus this is the outward normal, which makes kappa_theta (and kappa_z
on the sphere) nonnegative.  The thin-shell gradient assembly in
``shell_ops`` relies on exactly this convention through its (1 + t*kappa)
metric factors.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from kornshell import backend

__all__ = [
    "SurfacePatch",
    "MidSurfaceParams",
    "SurfaceError",
    "make_plate",
    "make_cylinder",
    "make_sphere_band",
    "make_torus_patch",
    "from_expressions",
    "eval_frame",
    "mid_surface_params",
]


class SurfaceError(ValueError):
    """Invalid surface parameters or missing geometric data."""


def _coef(fn):
    """Wrap a scalar coefficient so it broadcasts like its inputs."""

    def wrapped(theta, z):
        theta = np.asarray(theta, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        out = np.asarray(fn(theta, z), dtype=np.float64)
        shape = np.broadcast_shapes(theta.shape, z.shape)
        out = np.broadcast_to(out, shape)
        return float(out) if shape == () else np.array(out)

    return wrapped


@dataclass(frozen=True)
class SurfacePatch:
    """Immutable mid-surface patch; all callables are pure and vectorized.

    ``embedding`` maps (theta, z) to points in 3-space with components
    stacked on the last axis; ``frame`` returns the orthonormal triple
    (e_theta, e_z, n) the same way.  Both are optional for user-defined
    patches (every norm and gradient only consumes the scalar
    coefficients), but mandatory for the built-ins.
    """

    name: str
    omega: float
    z_lo: float
    z_hi: float
    A_theta: object
    A_z: object
    kappa_theta: object
    kappa_z: object
    dA_theta_dz: object
    dA_z_dtheta: object
    embedding: object = None
    frame: object = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.omega > 0):
            raise SurfaceError("omega must be positive")
        if not (self.z_hi > self.z_lo):
            raise SurfaceError("z-range must have positive width")

    @property
    def z_width(self):
        return self.z_hi - self.z_lo

    def describe(self):
        """Plain-data descriptor for reports."""
        return {
            "name": self.name,
            "omega": self.omega,
            "z_lo": self.z_lo,
            "z_hi": self.z_hi,
            "params": dict(self.params),
        }


def make_plate(width_theta, width_z):
    """Flat sheet: identity parametrization, zero curvature."""
    if width_theta <= 0 or width_z <= 0:
        raise SurfaceError("plate widths must be positive")

    def embedding(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        return np.stack([theta, z, np.zeros_like(theta)], axis=-1)

    def frame(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        one = np.ones_like(theta)
        zero = np.zeros_like(theta)
        e_theta = np.stack([one, zero, zero], axis=-1)
        e_z = np.stack([zero, one, zero], axis=-1)
        n = np.stack([zero, zero, one], axis=-1)
        return e_theta, e_z, n

    return SurfacePatch(
        name="plate",
        omega=float(width_theta),
        z_lo=0.0,
        z_hi=float(width_z),
        A_theta=_coef(lambda th, z: np.ones_like(th)),
        A_z=_coef(lambda th, z: np.ones_like(th)),
        kappa_theta=_coef(lambda th, z: np.zeros_like(th)),
        kappa_z=_coef(lambda th, z: np.zeros_like(th)),
        dA_theta_dz=_coef(lambda th, z: np.zeros_like(th)),
        dA_z_dtheta=_coef(lambda th, z: np.zeros_like(th)),
        embedding=embedding,
        frame=frame,
        params={"width_theta": float(width_theta), "width_z": float(width_z)},
    )


def make_cylinder(radius, omega, length):
    """Circular cylinder of radius R: A_theta = R, kappa_theta = 1/R."""
    if radius <= 0 or omega <= 0 or length <= 0:
        raise SurfaceError("cylinder radius, omega and length must be positive")
    R = float(radius)

    def embedding(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        return np.stack([R * np.cos(theta), R * np.sin(theta), z], axis=-1)

    def frame(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        zero = np.zeros_like(theta)
        one = np.ones_like(theta)
        e_theta = np.stack([-np.sin(theta), np.cos(theta), zero], axis=-1)
        e_z = np.stack([zero, zero, one], axis=-1)
        n = np.stack([np.cos(theta), np.sin(theta), zero], axis=-1)
        return e_theta, e_z, n

    return SurfacePatch(
        name="cylinder",
        omega=float(omega),
        z_lo=0.0,
        z_hi=float(length),
        A_theta=_coef(lambda th, z: np.full_like(th, R)),
        A_z=_coef(lambda th, z: np.ones_like(th)),
        kappa_theta=_coef(lambda th, z: np.full_like(th, 1.0 / R)),
        kappa_z=_coef(lambda th, z: np.zeros_like(th)),
        dA_theta_dz=_coef(lambda th, z: np.zeros_like(th)),
        dA_z_dtheta=_coef(lambda th, z: np.zeros_like(th)),
        embedding=embedding,
        frame=frame,
        params={"radius": R, "length": float(length)},
    )


def make_sphere_band(radius, phi_lo, phi_hi, omega):
    """Spherical band between colatitudes; z is the colatitude coordinate.

    Poles are excluded so A_theta = R sin(z) stays bounded away from zero.
    """
    if radius <= 0 or omega <= 0:
        raise SurfaceError("sphere radius and omega must be positive")
    if not (0.0 < phi_lo < phi_hi < math.pi):
        raise SurfaceError("colatitude band must satisfy 0 < phi_lo < phi_hi < pi")
    R = float(radius)

    def embedding(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        s, c = np.sin(z), np.cos(z)
        return np.stack([R * s * np.cos(theta), R * s * np.sin(theta), R * c], axis=-1)

    def frame(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        s, c = np.sin(z), np.cos(z)
        zero = np.zeros_like(theta)
        e_theta = np.stack([-np.sin(theta), np.cos(theta), zero], axis=-1)
        e_z = np.stack([c * np.cos(theta), c * np.sin(theta), -s], axis=-1)
        n = np.stack([s * np.cos(theta), s * np.sin(theta), c], axis=-1)
        return e_theta, e_z, n

    return SurfacePatch(
        name="sphere-band",
        omega=float(omega),
        z_lo=float(phi_lo),
        z_hi=float(phi_hi),
        A_theta=_coef(lambda th, z: R * np.sin(z)),
        A_z=_coef(lambda th, z: np.full_like(th, R)),
        kappa_theta=_coef(lambda th, z: np.full_like(th, 1.0 / R)),
        kappa_z=_coef(lambda th, z: np.full_like(th, 1.0 / R)),
        dA_theta_dz=_coef(lambda th, z: R * np.cos(z)),
        dA_z_dtheta=_coef(lambda th, z: np.zeros_like(th)),
        embedding=embedding,
        frame=frame,
        params={"radius": R, "phi_lo": float(phi_lo), "phi_hi": float(phi_hi)},
    )


def make_torus_patch(major_radius, minor_radius, omega, phi_lo, phi_hi):
    """Torus patch; theta runs along the major circle, z is the minor angle.

    Gauss curvature changes sign across z = pi/2, which makes this the
    stress test among the built-ins: kappa_theta = cos(z)/(R + r cos(z)).
    """
    if minor_radius <= 0:
        raise SurfaceError("minor radius must be positive")
    if major_radius <= minor_radius:
        raise SurfaceError("torus needs major radius > minor radius")
    if omega <= 0 or not (phi_hi > phi_lo):
        raise SurfaceError("angular ranges must have positive width")
    R, r = float(major_radius), float(minor_radius)

    def embedding(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        w = R + r * np.cos(z)
        return np.stack([w * np.cos(theta), w * np.sin(theta), r * np.sin(z)], axis=-1)

    def frame(theta, z):
        theta, z = np.broadcast_arrays(np.asarray(theta, float), np.asarray(z, float))
        s, c = np.sin(z), np.cos(z)
        zero = np.zeros_like(theta)
        e_theta = np.stack([-np.sin(theta), np.cos(theta), zero], axis=-1)
        e_z = np.stack([-s * np.cos(theta), -s * np.sin(theta), c], axis=-1)
        n = np.stack([c * np.cos(theta), c * np.sin(theta), s], axis=-1)
        return e_theta, e_z, n

    return SurfacePatch(
        name="torus",
        omega=float(omega),
        z_lo=float(phi_lo),
        z_hi=float(phi_hi),
        A_theta=_coef(lambda th, z: R + r * np.cos(z)),
        A_z=_coef(lambda th, z: np.full_like(th, r)),
        kappa_theta=_coef(lambda th, z: np.cos(z) / (R + r * np.cos(z))),
        kappa_z=_coef(lambda th, z: np.full_like(th, 1.0 / r)),
        dA_theta_dz=_coef(lambda th, z: -r * np.sin(z)),
        dA_z_dtheta=_coef(lambda th, z: np.zeros_like(th)),
        embedding=embedding,
        frame=frame,
        params={"major_radius": R, "minor_radius": r, "phi_lo": float(phi_lo), "phi_hi": float(phi_hi)},
    )


def from_expressions(name, omega, z_lo, z_hi, A_theta, A_z, kappa_theta, kappa_z):
    """User-defined patch from coefficient expressions in ``theta`` and ``z``.

    Expressions are parsed symbolically and the Lame-coefficient partials
    needed by the gradient assembly are derived analytically.  No
    embeddability (Gauss-Codazzi) check is performed: every downstream
    formula consumes only the coefficient values, and frame-dependent
    operations simply refuse to run without an embedding.
    """
    import sympy

    th_s, z_s = sympy.symbols("theta z")
    local = {"theta": th_s, "z": z_s}

    def parse(expr_text):
        return sympy.sympify(expr_text, locals=local)

    exprs = {
        "A_theta": parse(A_theta),
        "A_z": parse(A_z),
        "kappa_theta": parse(kappa_theta),
        "kappa_z": parse(kappa_z),
    }
    exprs["dA_theta_dz"] = sympy.diff(exprs["A_theta"], z_s)
    exprs["dA_z_dtheta"] = sympy.diff(exprs["A_z"], th_s)

    def lambdify(expr):
        f = sympy.lambdify((th_s, z_s), expr, modules="numpy")
        return _coef(lambda th, z: f(th, z))

    fns = {key: lambdify(expr) for key, expr in exprs.items()}
    return SurfacePatch(
        name=name,
        omega=float(omega),
        z_lo=float(z_lo),
        z_hi=float(z_hi),
        A_theta=fns["A_theta"],
        A_z=fns["A_z"],
        kappa_theta=fns["kappa_theta"],
        kappa_z=fns["kappa_z"],
        dA_theta_dz=fns["dA_theta_dz"],
        dA_z_dtheta=fns["dA_z_dtheta"],
        params={
            "A_theta": str(A_theta),
            "A_z": str(A_z),
            "kappa_theta": str(kappa_theta),
            "kappa_z": str(kappa_z),
        },
    )


def eval_frame(patch, theta, z):
    """Orthonormal triple (e_theta, e_z, n) at one or many surface points."""
    if patch.frame is None:
        raise SurfaceError(f"patch {patch.name!r} has no embedding/frame")
    return patch.frame(theta, z)


@dataclass(frozen=True)
class MidSurfaceParams:
    """Sampled geometric parameters controlling every shell estimate.

    a: min of the two Lame coefficients; A: sum of their sampled
    W^{2,inf} norms; k: sum of the curvatures' sampled W^{1,inf} norms;
    l = L: z-range width (constant bounds); Z: sum of the W^{1,inf} norms
    of the constant z-bound functions.
    """

    a: float
    A: float
    k: float
    l: float
    L: float
    Z: float
    omega: float

    def as_dict(self):
        return {
            "a": self.a,
            "A": self.A,
            "k": self.k,
            "l": self.l,
            "L": self.L,
            "Z": self.Z,
            "omega": self.omega,
        }


def _sup_norms(values, d_th, d_z, order):
    """max|f| plus sampled sup norms of partials up to ``order``."""
    sup = float(np.max(np.abs(values)))
    if order >= 1:
        f_th = backend.diff_axis(values, 0, d_th)
        f_z = backend.diff_axis(values, 1, d_z)
        sup = max(sup, float(np.max(np.abs(f_th))), float(np.max(np.abs(f_z))))
        if order >= 2:
            for g in (backend.diff_axis(f_th, 0, d_th), backend.diff_axis(f_th, 1, d_z), backend.diff_axis(f_z, 1, d_z)):
                sup = max(sup, float(np.max(np.abs(g))))
    return sup


def mid_surface_params(patch, resolution=81):
    """Sample (a, A, k, l, L) on a resolution^2 grid over the patch."""
    if resolution < 2:
        raise SurfaceError("sampling resolution must be at least 2 per axis")
    n = max(int(resolution), 3)  # derivative stencils need 3 nodes
    th = np.linspace(0.0, patch.omega, n)
    zz = np.linspace(patch.z_lo, patch.z_hi, n)
    TH, ZZ = np.meshgrid(th, zz, indexing="ij")
    d_th = th[1] - th[0]
    d_z = zz[1] - zz[0]

    a_th = np.asarray(patch.A_theta(TH, ZZ), dtype=np.float64)
    a_z = np.asarray(patch.A_z(TH, ZZ), dtype=np.float64)
    k_th = np.asarray(patch.kappa_theta(TH, ZZ), dtype=np.float64)
    k_z = np.asarray(patch.kappa_z(TH, ZZ), dtype=np.float64)

    a = float(min(np.min(a_th), np.min(a_z)))
    big_a = _sup_norms(a_th, d_th, d_z, 2) + _sup_norms(a_z, d_th, d_z, 2)
    k = _sup_norms(k_th, d_th, d_z, 1) + _sup_norms(k_z, d_th, d_z, 1)
    width = patch.z_width
    return MidSurfaceParams(
        a=a,
        A=big_a,
        k=k,
        l=width,
        L=width,
        Z=abs(patch.z_lo) + abs(patch.z_hi),
        omega=patch.omega,
    )
