"""Optimal constants of the shell inequalities as generalized Rayleigh maxima.

The discrete optimal constant of an inequality |grad u|^2 <= C * D(u) is the
largest generalized eigenvalue of the pencil (G, D), where G and D are the
quadratic forms of the numerator and denominator over the finite-difference
field space.  Forms are never materialized: they act on DOF vectors through
the gradient kernels and their transposes.

DOF convention: a displacement field is flattened component-major
(u_t block, then u_theta, then u_z), each block in t-fastest order; see
``dof_to_vec`` / ``vec_to_dof``.
"""

from dataclasses import dataclass
import time

import numpy as np

from kornshell.grid import ShellGrid, VecField3, make_grid, weight_array
from kornshell.shell_ops import ShellGradient

__all__ = [
    "SolverError",
    "QuadraticForm",
    "MassForm",
    "NormalMassForm",
    "GradEnergyForm",
    "StrainEnergyForm",
    "ScaledSumForm",
    "EigResult",
    "assemble_forms",
    "max_rayleigh",
    "materialize",
    "dof_to_vec",
    "vec_to_dof",
    "korn_second_constant",
    "korn_interp_constant",
    "fit_scaling",
    "SecondConstantResult",
    "InterpConstantResult",
]


class SolverError(RuntimeError):
    """Iterative solver failed to converge or broke down."""


def _dof_to_stacked(x, grid: ShellGrid):
    n = grid.n_t * grid.n_theta * grid.n_z
    comps = np.asarray(x, dtype=np.float64).reshape(3, n)
    out = np.empty((3,) + grid.shape)
    for c in range(3):
        out[c] = comps[c].reshape(grid.shape, order="F")
    return out


def _stacked_to_dof(comps):
    return np.concatenate([np.asarray(comps[c]).ravel(order="F") for c in range(3)])


def vec_to_dof(u: VecField3):
    return _stacked_to_dof(u.stacked())


def dof_to_vec(x, grid: ShellGrid):
    return VecField3.from_stacked(grid, _dof_to_stacked(x, grid))


class QuadraticForm:
    """Symmetric positive-semidefinite form acting on DOF vectors."""

    label = "?"

    def __init__(self, grid: ShellGrid, patch):
        self.grid = grid
        self.patch = patch

    @property
    def ndof(self):
        return 3 * self.grid.n_t * self.grid.n_theta * self.grid.n_z

    def apply(self, x):
        raise NotImplementedError

    def energy(self, x):
        """<x, Q x>, evaluated through the factored representation where
        one exists so the result is nonnegative to rounding."""
        return float(np.dot(x, self.apply(x)))

    def diagonal_part(self):
        """Exact diagonal of the purely diagonal constituents (or None)."""
        return None


class _DiagonalForm(QuadraticForm):
    def __init__(self, grid, patch, diag):
        super().__init__(grid, patch)
        self._diag = diag

    def apply(self, x):
        return self._diag * x

    def energy(self, x):
        return float(np.sum(self._diag * (x * x)))

    def diagonal_part(self):
        return self._diag


class MassForm(_DiagonalForm):
    """|u|^2: diagonal in DOF space (weights on all three components)."""

    label = "M"

    def __init__(self, grid, patch, weights):
        w = weights.ravel(order="F")
        super().__init__(grid, patch, np.concatenate([w, w, w]))


class NormalMassForm(_DiagonalForm):
    """|u_t|^2: weights on the normal component only."""

    label = "N_t"

    def __init__(self, grid, patch, weights):
        w = weights.ravel(order="F")
        super().__init__(grid, patch, np.concatenate([w, np.zeros_like(w), np.zeros_like(w)]))


class _GradBasedForm(QuadraticForm):
    symmetrize = False

    def __init__(self, grid, patch, op: ShellGradient, weights):
        super().__init__(grid, patch)
        self._op = op
        self._w = weights

    def _channels(self, x):
        Y = self._op.apply(_dof_to_stacked(x, self.grid))
        if self.symmetrize:
            Y = 0.5 * (Y + np.swapaxes(Y, 0, 1))
        return Y

    def apply(self, x):
        Y = self._channels(x)
        Y *= self._w  # scalar weight per node; symmetry is preserved
        return _stacked_to_dof(self._op.apply_adjoint(Y))

    def energy(self, x):
        Y = self._channels(x)
        return float(sum(np.sum(self._w * (Y[i, j] * Y[i, j])) for i in range(3) for j in range(3)))


class GradEnergyForm(_GradBasedForm):
    """|grad u|^2 in the weighted norm."""

    label = "G"


class StrainEnergyForm(_GradBasedForm):
    """|e(u)|^2; e is the symmetrized gradient."""

    label = "E"
    symmetrize = True


class ScaledSumForm(QuadraticForm):
    """Nonnegative combination sum_i c_i Q_i of forms on one grid."""

    def __init__(self, parts, label="sum"):
        coefs, forms = zip(*parts)
        if any(c < 0 for c in coefs):
            raise ValueError("combination coefficients must be nonnegative")
        super().__init__(forms[0].grid, forms[0].patch)
        self.parts = list(parts)
        self.label = label

    def apply(self, x):
        out = np.zeros_like(np.asarray(x, dtype=np.float64))
        for c, f in self.parts:
            if c != 0.0:
                out += c * f.apply(x)
        return out

    def energy(self, x):
        return float(sum(c * f.energy(x) for c, f in self.parts if c != 0.0))

    def diagonal_part(self):
        total = None
        for c, f in self.parts:
            d = f.diagonal_part()
            if d is not None and c != 0.0:
                total = c * d if total is None else total + c * d
        return total


def assemble_forms(patch, grid: ShellGrid, simplified=False):
    """The four matrix-free forms (G, M, E, N_t) on one grid."""
    w = weight_array(patch, grid)
    op = ShellGradient(patch, grid, simplified=simplified)
    return (
        GradEnergyForm(grid, patch, op, w),
        MassForm(grid, patch, w),
        StrainEnergyForm(grid, patch, op, w),
        NormalMassForm(grid, patch, w),
    )


def materialize(form: QuadraticForm):
    """Dense matrix of a form, column by column (small grids only)."""
    n = form.ndof
    A = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        A[:, j] = form.apply(e)
        e[j] = 0.0
    return A


def _pcg(apply_fn, b, x0, diag, rel_tol, max_iter):
    """Jacobi-preconditioned conjugate gradients; returns (x, iterations)."""
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = x0.copy()
        r = b - apply_fn(x)
    z = r / diag
    p = z.copy()
    rz = float(np.dot(r, z))
    for it in range(max_iter):
        if float(np.linalg.norm(r)) <= rel_tol * bnorm:
            return x, it
        Ap = apply_fn(p)
        pAp = float(np.dot(p, Ap))
        if pAp <= 0.0:
            raise SolverError("conjugate-gradient breakdown: operator not positive definite")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        z = r / diag
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"inner solve did not reach rel. residual {rel_tol:g} in {max_iter} iterations")


@dataclass
class EigResult:
    """Largest generalized eigenvalue of (G, D) with its maximizer."""

    lam: float
    maximizer: np.ndarray
    iterations: int
    residual: float
    inner_iterations: int = 0


def max_rayleigh(G: QuadraticForm, D: QuadraticForm, tol=1e-6, max_iter=200, seed=42,
                 start=None, cg_tol=1e-8, cg_max_iter=100_000):
    """Largest eigenvalue of the pencil (G, D), D positive definite.

    Power-type iteration: each step solves D y = G x by preconditioned
    conjugate gradients (Jacobi preconditioner from the diagonal mass-type
    constituents of D) and locks the best Rayleigh quotient over
    span{x, y, previous x} via a 3x3 Rayleigh-Ritz problem.  Deterministic
    for a fixed seed; convergence is declared when the D^{-1}-norm of
    G x - lam D x drops below tol * lam.
    """
    n = G.ndof
    diag = D.diagonal_part()
    if diag is None:
        diag = np.ones(n)
    elif np.min(diag) <= 0.0:
        raise SolverError("preconditioner diagonal must be positive")

    if start is not None:
        x = np.array(start, dtype=np.float64)
    else:
        x = np.random.default_rng(seed).standard_normal(n)
    dx = D.apply(x)
    nrm = float(np.sqrt(np.dot(x, dx)))
    if nrm <= 0.0:
        raise SolverError("start vector has zero D-norm")
    x, dx = x / nrm, dx / nrm
    gx = G.apply(x)

    p = dp = gp = None
    lam = float(np.dot(x, gx))
    residual = np.inf
    total_inner = 0

    for it in range(1, max_iter + 1):
        y, inner = _pcg(D.apply, gx, lam * x, diag, cg_tol, cg_max_iter)
        total_inner += inner
        residual = float(np.sqrt(max(float(np.dot(gx, y)) - lam * lam, 0.0)))
        if residual <= tol * lam:
            return EigResult(lam=lam, maximizer=x, iterations=it, residual=residual,
                             inner_iterations=total_inner)

        dy, gy = D.apply(y), G.apply(y)
        basis = [(x, dx, gx), (y, dy, gy)]
        if p is not None:
            basis.append((p, dp, gp))
        vecs = [b[0] for b in basis]
        dvecs = [b[1] for b in basis]
        gvecs = [b[2] for b in basis]
        m = len(basis)
        Dg = np.array([[float(np.dot(vecs[i], dvecs[j])) for j in range(m)] for i in range(m)])
        Gg = np.array([[float(np.dot(vecs[i], gvecs[j])) for j in range(m)] for i in range(m)])
        Dg = 0.5 * (Dg + Dg.T)
        Gg = 0.5 * (Gg + Gg.T)

        # prune near-dependent directions before the small dense solve
        w_d, V = np.linalg.eigh(Dg)
        keep = w_d > 1e-12 * float(np.max(w_d))
        T = V[:, keep] / np.sqrt(w_d[keep])
        mu, C = np.linalg.eigh(T.T @ Gg @ T)
        c = T @ C[:, -1]

        x_new = sum(ci * vi for ci, vi in zip(c, vecs))
        dx_new = sum(ci * vi for ci, vi in zip(c, dvecs))
        gx_new = sum(ci * vi for ci, vi in zip(c, gvecs))
        nrm = float(np.sqrt(max(np.dot(x_new, dx_new), 0.0)))
        if nrm <= 0.0:
            raise SolverError("Rayleigh-Ritz produced a zero vector")
        p, dp, gp = x, dx, gx
        x, dx, gx = x_new / nrm, dx_new / nrm, gx_new / nrm
        if it % 8 == 0:  # refresh cached applications to kill drift
            dx, gx = D.apply(x), G.apply(x)
        lam = float(np.dot(x, gx))

    raise SolverError(
        f"eigensolver did not converge in {max_iter} iterations "
        f"(last residual {residual:.3e}, lam {lam:.6g})"
    )


@dataclass
class SecondConstantResult:
    h: float
    value: float          # h * lam
    lam: float
    dims: tuple
    seconds: float
    eig: EigResult


def korn_second_constant(patch, h, n_t=8, n_theta=48, n_z=48, tol=1e-6, seed=42,
                         cg_tol=1e-8, max_iter=200, simplified=False):
    """C_2(h) = h * max over u of |grad u|^2 / (|u|^2 + |e(u)|^2).

    The maximum is the top eigenvalue of the pencil (G, M + E); it is
    expected to scale like 1/h, so C_2(h) stays bounded above and below as
    the shell gets thinner.
    """
    t0 = time.perf_counter()
    grid = make_grid(patch, h, n_t=n_t, n_theta=n_theta, n_z=n_z)
    G, M, E, _ = assemble_forms(patch, grid, simplified=simplified)
    D = ScaledSumForm([(1.0, M), (1.0, E)], label="M+E")
    eig = max_rayleigh(G, D, tol=tol, max_iter=max_iter, seed=seed, cg_tol=cg_tol)
    return SecondConstantResult(
        h=float(h),
        value=float(h) * eig.lam,
        lam=eig.lam,
        dims=grid.shape,
        seconds=time.perf_counter() - t0,
        eig=eig,
    )


@dataclass
class InterpConstantResult:
    h: float
    value: float
    s_opt: float
    dims: tuple
    seconds: float
    eig: EigResult
    scan: list
    flat: bool


def korn_interp_constant(patch, h, n_t=8, n_theta=48, n_z=48, tol=1e-6, seed=42,
                         cg_tol=1e-8, max_iter=200, log_s_bounds=(-20.0, 20.0),
                         scan_points=9, log_s_tol=0.02):
    """sup over u of |grad u|^2 / (|u_t| |e(u)|/h + |u|^2 + |e(u)|^2).

    The mixed term is handled by its arithmetic-geometric-mean envelope:
    for every s > 0,

        (s/(2h)) |u_t|^2 + (1/(2sh)) |e(u)|^2  >=  |u_t| |e(u)| / h,

    with equality at s = |e(u)|/|u_t|.  Hence the optimal constant equals
    sup_s lam_max(G, D_s) with D_s = M + E + (s/(2h)) N_t + (1/(2sh)) E;
    the scalar maximization runs a coarse log-s scan followed by
    golden-section refinement, warm-starting each eigensolve with the
    previous maximizer.
    """
    t0 = time.perf_counter()
    grid = make_grid(patch, h, n_t=n_t, n_theta=n_theta, n_z=n_z)
    G, M, E, N_t = assemble_forms(patch, grid)
    h = float(h)

    state = {"start": None}

    def lam_at(ls):
        s = float(np.exp(ls))
        D_s = ScaledSumForm(
            [(1.0, M), (1.0 + 1.0 / (2.0 * s * h), E), (s / (2.0 * h), N_t)],
            label=f"D_s(s={s:.3e})",
        )
        eig = max_rayleigh(G, D_s, tol=tol, max_iter=max_iter, seed=seed,
                           start=state["start"], cg_tol=cg_tol)
        state["start"] = eig.maximizer
        return eig.lam, eig

    lo, hi = log_s_bounds
    ls_grid = np.linspace(lo, hi, scan_points)
    scan = []
    best = None  # (lam, log s, eig)
    for ls in ls_grid:
        lam, eig = lam_at(float(ls))
        scan.append((float(np.exp(ls)), lam))
        if best is None or lam > best[0]:
            best = (lam, float(ls), eig)
    lams = np.array([v for _, v in scan])
    i_best = int(np.argmax(lams))
    flat = (np.max(lams) - np.min(lams)) <= 1e-3 * np.max(lams)
    if i_best in (0, scan_points - 1):
        raise SolverError(
            "bracket exhaustion: the envelope maximum sits at the edge of "
            f"log s in [{lo}, {hi}] (scan values {lams.tolist()})"
        )

    # golden-section on [ls_{i-1}, ls_{i+1}]
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(ls_grid[i_best - 1]), float(ls_grid[i_best + 1])
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, eig_c = lam_at(c)
    fd, eig_d = lam_at(d)
    for lam, ls, eig in ((fc, c, eig_c), (fd, d, eig_d)):
        if lam > best[0]:
            best = (lam, ls, eig)
    while (b - a) > log_s_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc, eig_c = lam_at(c)
            if fc > best[0]:
                best = (fc, c, eig_c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd, eig_d = lam_at(d)
            if fd > best[0]:
                best = (fd, d, eig_d)

    lam_best, ls_best, eig_best = best
    return InterpConstantResult(
        h=h,
        value=float(lam_best),
        s_opt=float(np.exp(ls_best)),
        dims=grid.shape,
        seconds=time.perf_counter() - t0,
        eig=eig_best,
        scan=scan,
        flat=bool(flat),
    )


def fit_scaling(h_values, c_values):
    """Least-squares fit of log C against log h.

    Returns (slope, intercept, residual) with residual the RMS misfit of
    log C around the fitted line.
    """
    h_arr = np.asarray(h_values, dtype=np.float64)
    c_arr = np.asarray(c_values, dtype=np.float64)
    if h_arr.size < 3:
        raise ValueError("scaling fit needs at least 3 points")
    if len(set(h_arr.tolist())) != h_arr.size:
        raise ValueError("h values must be distinct")
    if np.any(h_arr <= 0) or np.any(c_arr <= 0):
        raise ValueError("scaling fit needs positive h and C")
    x = np.log(h_arr)
    y = np.log(c_arr)
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(res * res)))
