"""Constrained energy minimization on the discrete Nehari set.

Projected-gradient descent with Barzilai-Borwein steps, preconditioned by
the linear part of the operator (one sparse factorization per run), with
re-projection onto the Nehari set after every step and a Newton polish once
the residual is small.  Kelvin evenness is imposed throughout: it selects
one member of each dilation orbit and removes the neutral dilation
direction that would otherwise stall the descent.

A converged point is a stationary point of the discrete functional (its
residual is reported); a resolution diagnostic (peak width in grid units)
is attached so concentration onto the grid scale is visible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .energy import energy_report, nehari_scale_vec
from .fields import Field2D, Grid2D, grid_for, kernel_field, radial_field
from .operators import SymmetrySpace, kappa_of, radial_solve_1d
from .params import ProblemParams, derive_constants, gamma_j
from .solver import NewtonOptions, cone_check, newton_solve

SYMMETRY_CLASSES = ("axial", "axial-even")


@dataclass(frozen=True)
class NehariOptions:
    tol: float = 1e-10  # residual max-norm at the stationary point
    max_iter: int = 2000
    polish_at: float = 1e-7  # switch to Newton below this residual
    bb_min: float = 1e-4
    bb_max: float = 1e3
    seed_amplitude: float = 0.25


@dataclass
class NehariResult:
    gamma: float
    symmetry: str
    field: Field2D
    d_energy: float  # F at the minimizer
    radial_energy: float  # F of the discrete radial solution (on Nehari)
    non_radiality_sup: float  # sup |u - U_gamma| against the exact profile
    non_radiality_energy: float  # energy-norm distance against U_gamma
    angular_variation: float
    residual: float
    iterations: int
    stalled: bool
    peak_width_cells: float  # half-max width of the peak in t, in units of h_t
    diagnostics: dict

    def is_radial(self, tol: float = 1e-6) -> bool:
        return self.angular_variation <= tol * max(self.field.sup_norm(), 1.0)


def _peak_width_cells(w: Field2D) -> float:
    vals = np.abs(w.values)
    i, k = np.unravel_index(np.argmax(vals), vals.shape)
    line = vals[:, k]
    half = 0.5 * line[i]
    above = line >= half
    lo = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i
    while hi < line.size - 1 and above[hi + 1]:
        hi += 1
    return float(hi - lo + 1)


def nehari_minimize(
    p: ProblemParams,
    symmetry: str = "axial",
    init: Field2D | None = None,
    grid: Grid2D | None = None,
    opts: NehariOptions = NehariOptions(),
) -> NehariResult:
    """Minimize the energy over the discrete Nehari set in a symmetry class.

    symmetry "axial" works in the Kelvin-even O(N-1)-invariant space,
    "axial-even" additionally imposes evenness in x_N.  The default seed is
    the discrete radial solution plus a kernel-direction bump (degree 1 or
    2 according to the class), so symmetry breaking is found whenever the
    radial solution is a saddle of the constrained problem.
    """
    if symmetry not in SYMMETRY_CLASSES:
        raise ValueError(f"unknown symmetry class {symmetry!r}")
    theta_even = symmetry == "axial-even"
    if grid is None:
        grid = grid_for(p) if init is None else init.grid
    space = SymmetrySpace(grid, kelvin_even=True, theta_even=theta_even)
    c = derive_constants(p)
    kap = kappa_of(p)
    lu = splu(space.linear_operator(kap).tocsc())

    w_rad_1d = radial_solve_1d(grid, p)
    xr = space.restrict(np.repeat(w_rad_1d[:, None], grid.M_theta, axis=1))
    if init is not None:
        x = space.restrict(init.project_symmetry().values)
    else:
        j = 2 if theta_even else 1
        zf = kernel_field(grid, ProblemParams(p.N, p.s, gamma_j(p.N, p.s, j)), j)
        z = space.restrict(zf.values)
        z /= np.sqrt(space.quadratic_form(z, kap))
        x = xr - opts.seed_amplitude * z
    x = x * nehari_scale_vec(space, x, p)

    g_prev: np.ndarray | None = None
    x_prev: np.ndarray | None = None
    alpha = 1.0
    stalled = False
    it = 0
    res = space.residual_vec(x, p)
    rnorm = float(np.max(np.abs(res)))
    floor_counter = 0
    best = rnorm
    while rnorm > opts.polish_at and it < opts.max_iter:
        g = lu.solve(res)
        if g_prev is not None:
            dx = x - x_prev
            dg = g - g_prev
            den = space.inner(dx, dg)
            num = space.inner(dx, dx)
            if den > 0:
                alpha = min(max(num / den, opts.bb_min), opts.bb_max)
        x_prev, g_prev = x, g
        y = x - alpha * g
        try:
            x = y * nehari_scale_vec(space, y, p)
        except ZeroDivisionError:
            stalled = True
            break
        res = space.residual_vec(x, p)
        rnorm = float(np.max(np.abs(res)))
        if rnorm < 0.999 * best:
            best, floor_counter = rnorm, 0
        else:
            floor_counter += 1
            if floor_counter > 200:
                stalled = True
                break
        it += 1

    polish_failed = False
    if not stalled and rnorm > opts.tol:
        try:
            nres = newton_solve(
                space.field_from(x, p), p,
                NewtonOptions(tol=opts.tol, max_iter=50), space=space,
            )
            x = space.restrict(nres.field.values)
            rnorm = nres.residual
            it += nres.iterations
        except ArithmeticError:
            polish_failed = True
    if rnorm > opts.tol:
        stalled = True

    w = space.field_from(x, p)
    rep = energy_report(w, space)
    rad_rep = energy_report(space.field_from(xr, p), space)
    u_exact = radial_field(grid, p)
    diff = space.restrict(u_exact.values) - x
    non_rad_sup = float(np.max(np.abs(diff)))
    non_rad_energy = float(np.sqrt(max(space.quadratic_form(diff, kap), 0.0)))
    return NehariResult(
        gamma=p.gamma,
        symmetry=symmetry,
        field=w,
        d_energy=rep.F,
        radial_energy=rad_rep.F,
        non_radiality_sup=non_rad_sup,
        non_radiality_energy=non_rad_energy,
        angular_variation=w.angular_variation(),
        residual=rnorm,
        iterations=it,
        stalled=stalled,
        peak_width_cells=_peak_width_cells(w),
        diagnostics={
            "nehari_residual": rep.nehari_residual,
            "polish_failed": polish_failed,
            "descent_floor": best,
            "k1+": cone_check(w, "k1+").member,
            "k1-": cone_check(w, "k1-").member,
        },
    )
