"""Discrete operators on the (t, theta) strip and the symmetry-reduced
linear algebra behind the nonlinear solver.

Unknowns live on the interior t-rows (Dirichlet at |t| = T) times all theta
columns (the flux-form angular operator has the Neumann pole closure built
in).  Declared symmetries shrink the unknown set: Kelvin evenness keeps the
t >= 0 half (the t = 0 row couples to its mirror), theta evenness keeps the
theta <= pi/2 half.  Reduced operators remain self-adjoint in the weighted
inner product whose weights carry the cell integrals of sin^{N-2} and the
reflection multiplicities; `weights` exposes that vector so quadratic forms
and eigensolves stay consistent with full-domain integrals.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.sparse.linalg import eigsh, splu

from .closedforms import mapped_radial_solution
from .fields import Field2D, Grid2D
from .params import ProblemParams, derive_constants


def kappa_of(p: ProblemParams) -> float:
    """Zeroth-order coefficient (N-2)^2/4 - gamma of the autonomous form."""
    return 0.25 * (p.N - 2) ** 2 - p.gamma


def dC_dgamma(p: ProblemParams) -> float:
    """d C_gamma / d gamma = -4 (N-s)/(N-2)."""
    return -4.0 * (p.N - p.s) / (p.N - 2)


def _t_operator(grid: Grid2D, kelvin_even: bool):
    """Reduced 1D operator in t (tridiagonal terms), index set and weights."""
    h = grid.h_t
    if kelvin_even:
        c = (grid.M_t - 1) // 2
        idx = np.arange(c, grid.M_t - 1)  # t = 0 .. T - h
        n = idx.size
        diag = np.full(n, 2.0 / h**2)
        upper = np.full(n - 1, -1.0 / h**2)
        lower = np.full(n - 1, -1.0 / h**2)
        upper[0] = -2.0 / h**2  # t=0 row couples twice to t=h
        w = np.full(n, 2.0 * h)
        w[0] = h
    else:
        idx = np.arange(1, grid.M_t - 1)
        n = idx.size
        diag = np.full(n, 2.0 / h**2)
        upper = np.full(n - 1, -1.0 / h**2)
        lower = np.full(n - 1, -1.0 / h**2)
        w = np.full(n, h)
    return idx, diag, lower, upper, w


def _theta_operator(grid: Grid2D, theta_even: bool):
    """Reduced flux-form angular operator, index set and weights."""
    h = grid.h_theta
    f = grid.flux
    ci = grid.cellint
    if theta_even:
        c = (grid.M_theta - 1) // 2
        idx = np.arange(0, c + 1)
        n = idx.size
        diag = np.empty(n)
        upper = np.empty(n - 1)
        lower = np.empty(n - 1)
        for k in range(n):
            fl = f[k - 1] if k >= 1 else 0.0
            fr = f[k] if k < grid.M_theta - 1 else 0.0
            if k == c:
                diag[k] = 2.0 * fl / (h * ci[k])
            else:
                diag[k] = (fl + fr) / (h * ci[k])
        for k in range(n - 1):
            upper[k] = -f[k] / (h * ci[k])
            lower[k] = -f[k] / (h * ci[k + 1])
        lower[c - 1] = -2.0 * f[c - 1] / (h * ci[c])
        w = 2.0 * ci[idx].copy()
        w[c] = ci[c]
    else:
        idx = np.arange(grid.M_theta)
        n = idx.size
        diag = np.empty(n)
        for k in range(n):
            fl = f[k - 1] if k >= 1 else 0.0
            fr = f[k] if k < n - 1 else 0.0
            diag[k] = (fl + fr) / (h * ci[k])
        upper = -f[: n - 1] / (h * ci[: n - 1])
        lower = -f[: n - 1] / (h * ci[1:])
        w = ci.copy()
    return idx, diag, lower, upper, w


def _tridiag(diag, lower, upper) -> sp.csr_matrix:
    n = diag.size
    return sp.diags([lower, diag, upper], offsets=[-1, 0, 1], format="csr")


class SymmetrySpace:
    """Unknown space of the reduced problem for one grid + symmetry flags."""

    def __init__(self, grid: Grid2D, kelvin_even: bool = True, theta_even: bool = False):
        self.grid = grid
        self.kelvin_even = kelvin_even
        self.theta_even = theta_even
        self.t_idx, dt, lt, ut, wt = _t_operator(grid, kelvin_even)
        self.th_idx, dth, lth, uth, wth = _theta_operator(grid, theta_even)
        self.n_t = self.t_idx.size
        self.n_th = self.th_idx.size
        self.n = self.n_t * self.n_th
        T_t = _tridiag(dt, lt, ut)
        A_th = _tridiag(dth, lth, uth)
        self.L0 = (
            sp.kron(T_t, sp.identity(self.n_th, format="csr"), format="csr")
            + sp.kron(sp.identity(self.n_t, format="csr"), A_th, format="csr")
        )
        self.weights = np.kron(wt, wth)
        self._t_tridiag = (dt, lt, ut, wt)
        self._th_tridiag = (dth, lth, uth, wth)

    # -- gather/scatter ------------------------------------------------------

    def restrict(self, values: np.ndarray) -> np.ndarray:
        return values[np.ix_(self.t_idx, self.th_idx)].ravel()

    def expand(self, x: np.ndarray) -> np.ndarray:
        g = self.grid
        full = np.zeros((g.M_t, g.M_theta))
        block = x.reshape(self.n_t, self.n_th)
        if self.theta_even:
            block = np.concatenate([block, block[:, -2::-1]], axis=1)
        full[self.t_idx, :] = block
        if self.kelvin_even:
            c = (g.M_t - 1) // 2
            full[:c, :] = full[2 * c : c : -1, :]
        return full

    def restrict_field(self, f: Field2D) -> np.ndarray:
        return self.restrict(f.values)

    def field_from(self, x: np.ndarray, p: ProblemParams) -> Field2D:
        return Field2D(
            self.grid,
            self.expand(x),
            p,
            kelvin_even=self.kelvin_even,
            theta_even=self.theta_even,
        )

    # -- operators -----------------------------------------------------------

    def linear_operator(self, kappa: float) -> sp.csr_matrix:
        return (self.L0 + kappa * sp.identity(self.n, format="csr")).tocsr()

    def jacobian(self, x: np.ndarray, p: ProblemParams) -> sp.csr_matrix:
        c = derive_constants(p)
        pot = kappa_of(p) - c.C_gamma * (c.p_s - 1.0) * np.abs(x) ** (c.p_s - 2.0)
        return (self.L0 + sp.diags(pot)).tocsr()

    def residual_vec(self, x: np.ndarray, p: ProblemParams) -> np.ndarray:
        c = derive_constants(p)
        return (
            self.L0 @ x
            + kappa_of(p) * x
            - c.C_gamma * np.abs(x) ** (c.p_s - 2.0) * x
        )

    def residual_gamma_derivative(self, x: np.ndarray, p: ProblemParams) -> np.ndarray:
        c = derive_constants(p)
        return -x + dC_dgamma(p) * (-np.abs(x) ** (c.p_s - 2.0) * x)

    def quadratic_form(self, x: np.ndarray, kappa: float = 0.0) -> float:
        """<(L0 + kappa) x, x> in the weighted inner product; equals the
        full-domain integral of w_t^2 + w_theta^2 + kappa w^2 (per unit
        sphere-factor)."""
        return float(np.dot(self.weights * x, self.L0 @ x + kappa * x))

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.dot(self.weights * x, y))

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(x, x), 0.0)))


# ---------------------------------------------------------------------------
# full-grid residual (for reporting)
# ---------------------------------------------------------------------------


def apply_linear_full(grid: Grid2D, values: np.ndarray) -> np.ndarray:
    """Laplacian part on the full grid; t-boundary rows are returned as 0."""
    out = np.zeros_like(values)
    h2 = grid.h_t**2
    out[1:-1, :] = (2.0 * values[1:-1, :] - values[:-2, :] - values[2:, :]) / h2
    flux = grid.flux[None, :] * (values[:, 1:] - values[:, :-1])
    div = np.zeros_like(values)
    div[:, :-1] -= flux
    div[:, 1:] += flux
    out[1:-1, :] += div[1:-1, :] / (grid.h_theta * grid.cellint[None, :])
    return out


def residual_field(w: Field2D) -> Field2D:
    """Pointwise residual of the autonomous equation on the interior rows
    (Dirichlet rows carry 0 by convention)."""
    p = w.params
    c = derive_constants(p)
    res = apply_linear_full(w.grid, w.values)
    interior = slice(1, -1)
    v = w.values[interior, :]
    res[interior, :] += kappa_of(p) * v - c.C_gamma * np.abs(v) ** (c.p_s - 2.0) * v
    return replace(w, values=res)


def residual_norm(w: Field2D) -> float:
    return float(np.max(np.abs(residual_field(w).values)))


# ---------------------------------------------------------------------------
# discrete radial solution (1D in t)
# ---------------------------------------------------------------------------


def radial_solve_1d(
    grid: Grid2D, p: ProblemParams, tol: float = 1e-11, max_iter: int = 40
) -> np.ndarray:
    """Discrete radial solution on the t-grid (zeros at the boundary),
    Newton-corrected from the exact mapped profile.

    The solve lives on the even half-grid t in [0, T) so the result is
    exactly t-symmetric: the full-interval 1D Jacobian carries a
    near-kernel odd mode (the truncated dilation direction) that would
    otherwise pollute the iterate at the solver-noise level.  Returns the
    best iterate; the floor is solver noise amplified by 1/h^2.
    """
    c = derive_constants(p)
    kap = kappa_of(p)
    h2 = grid.h_t**2
    half = (grid.M_t - 1) // 2
    # unknowns at t = 0 .. T-h; ghost reflection at t=0, Dirichlet at T
    v = mapped_radial_solution(p)(grid.t[half:-1])
    n = v.size
    best = np.inf
    v_best = v.copy()
    stall = 0
    for _ in range(max_iter):
        lap = np.empty(n)
        lap[0] = (2.0 * v[0] - 2.0 * v[1]) / h2
        lap[1:-1] = (2.0 * v[1:-1] - v[:-2] - v[2:]) / h2
        lap[-1] = (2.0 * v[-1] - v[-2]) / h2
        res = lap + kap * v - c.C_gamma * np.abs(v) ** (c.p_s - 2.0) * v
        rnorm = float(np.max(np.abs(res)))
        if rnorm < best:
            best, v_best, stall = rnorm, v.copy(), 0
        else:
            stall += 1
        if best < tol or stall >= 2:
            break
        diag = 2.0 / h2 + kap - c.C_gamma * (c.p_s - 1.0) * np.abs(v) ** (
            c.p_s - 2.0
        )
        ab = np.zeros((3, n))
        ab[0, 1:] = -1.0 / h2
        ab[0, 1] = -2.0 / h2
        ab[1, :] = diag
        ab[2, :-1] = -1.0 / h2
        v -= solve_banded((1, 1), ab, res)
    if best > max(tol, 1e-9):
        raise ArithmeticError(
            f"radial 1D Newton stalled at residual {best:.3e}"
        )
    w = np.zeros(grid.M_t)
    w[half:-1] = v_best
    w[1 : half + 1] = v_best[::-1]
    return w


def radial_field_discrete(grid: Grid2D, p: ProblemParams) -> Field2D:
    w1d = radial_solve_1d(grid, p)
    return Field2D(
        grid,
        np.repeat(w1d[:, None], grid.M_theta, axis=1),
        p,
        kelvin_even=True,
        theta_even=True,
    )


# ---------------------------------------------------------------------------
# eigenvalue utilities
# ---------------------------------------------------------------------------


def _symmetrized_offdiag(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return -np.sqrt(np.maximum(lower * upper, 0.0))


def theta_eigenvalues(grid: Grid2D, count: int, even_only: bool = False) -> np.ndarray:
    """Lowest discrete eigenvalues of the angular operator (approximations
    of mu_j = j(N-2+j); restricted to even modes when even_only)."""
    _, d, lo, up, _ = _theta_operator(grid, even_only)
    e = _symmetrized_offdiag(lo, up)
    count = min(count, d.size)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1),
                            eigvals_only=True)


def t_sector_smallest(
    grid: Grid2D, p: ProblemParams, w1d: np.ndarray | None = None,
    kelvin_even: bool = True,
) -> float:
    """Smallest eigenvalue of the t-part of the Jacobian at the discrete
    radial solution (potential kappa - C (p_s-1) w_rad^{p_s-2})."""
    c = derive_constants(p)
    if w1d is None:
        w1d = radial_solve_1d(grid, p)
    idx, d, lo, up, _ = _t_operator(grid, kelvin_even)
    pot = kappa_of(p) - c.C_gamma * (c.p_s - 1.0) * np.abs(w1d[idx]) ** (
        c.p_s - 2.0
    )
    e = _symmetrized_offdiag(lo, up)
    return float(
        eigh_tridiagonal(d + pot, e, select="i", select_range=(0, 0),
                         eigvals_only=True)[0]
    )


def negative_eigen_count(
    space: SymmetrySpace,
    J: sp.csr_matrix,
    zero_tol: float = 1e-10,
    k0: int = 10,
) -> tuple[int, np.ndarray]:
    """Number of negative eigenvalues of the weighted-self-adjoint Jacobian
    on the reduced space, with the lowest eigenvalues returned.

    The matrix is similarity-transformed with the square-root weights so it
    is exactly symmetric, then solved by shift-invert Lanczos anchored below
    the spectrum; k grows until a nonnegative eigenvalue is bracketed.
    """
    d = np.sqrt(space.weights)
    S = sp.diags(d) @ J @ sp.diags(1.0 / d)
    S = 0.5 * (S + S.T)  # scrub roundoff asymmetry
    diag_min = float(np.min(J.diagonal()))
    sigma = min(diag_min, 0.0) - 1.0
    k = k0
    while True:
        k = min(k, space.n - 2)
        vals = eigsh(
            S, k=k, sigma=sigma, which="LM", mode="normal",
            return_eigenvectors=False,
        )
        vals = np.sort(vals)
        if vals[-1] > -zero_tol or k >= space.n - 2:
            count = int(np.sum(vals < -zero_tol))
            return count, vals
        k *= 2


def smallest_eigenpair(
    space: SymmetrySpace, J: sp.csr_matrix, k: int = 4
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest k eigenvalues/eigenvectors of the reduced Jacobian in the
    weighted inner product (vectors returned in the unweighted coordinates)."""
    d = np.sqrt(space.weights)
    S = sp.diags(d) @ J @ sp.diags(1.0 / d)
    S = 0.5 * (S + S.T)
    diag_min = float(np.min(J.diagonal()))
    sigma = min(diag_min, 0.0) - 1.0
    vals, vecs = eigsh(S, k=k, sigma=sigma, which="LM", mode="normal")
    order = np.argsort(vals)
    return vals[order], (vecs[:, order] / d[:, None])


def linear_solve(space: SymmetrySpace, kappa: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (L0 + kappa) x = rhs on the reduced space (sparse LU)."""
    lu = splu(space.linear_operator(kappa).tocsc())
    return lu.solve(rhs)
