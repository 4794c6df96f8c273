"""Damped Newton solver on the symmetry-reduced strip, cone-monotonicity
diagnostics, and decay-rate fitting.

Symmetry is structural: the solve happens in the reduced unknown space of
the field's declared flags, so every iterate satisfies them exactly (the
reduced-space formulation is the projection after each step).  An optional
deflation term repels the iteration from the discrete radial solution when
a non-radial root is wanted near a bifurcation point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import splu

from .fields import Field2D
from .operators import SymmetrySpace, radial_solve_1d
from .params import ProblemParams, derive_constants


class MaxIterationsError(ArithmeticError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"Newton did not reach tolerance in {iterations} iterations "
            f"(final residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class LinearSolveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-10
    max_iter: int = 50
    max_halvings: int = 10
    deflate_radial: bool = False
    radial_proximity: float = 1e-8


@dataclass
class NewtonResult:
    field: Field2D
    residual: float
    iterations: int
    history: list[float] = field(default_factory=list)
    converged_to_radial: bool = False
    distance_to_radial: float = float("nan")


def newton_solve(
    w0: Field2D,
    p: ProblemParams | None = None,
    opts: NewtonOptions = NewtonOptions(),
    space: SymmetrySpace | None = None,
) -> NewtonResult:
    """Solve the reduced nonlinear equation from the seed w0.

    Returns once the reduced residual max-norm is below opts.tol; the
    ConvergedToRadial outcome is reported as a flag (distance below
    opts.radial_proximity to the discrete radial solution) and left to the
    caller to interpret.
    """
    p = w0.params if p is None else p
    if space is None:
        space = SymmetrySpace(w0.grid, w0.kelvin_even, w0.theta_even)
    x = space.restrict(w0.project_symmetry().values)
    x_rad = space.restrict(
        np.repeat(radial_solve_1d(w0.grid, p)[:, None], w0.grid.M_theta, axis=1)
    )
    history: list[float] = []
    res = space.residual_vec(x, p)
    rnorm = float(np.max(np.abs(res)))
    history.append(rnorm)
    best_norm, best_x = rnorm, x.copy()
    stall = 0
    it = 0
    while best_norm > opts.tol:
        if it >= opts.max_iter or stall >= 3:
            raise MaxIterationsError(best_norm, it)
        J = space.jacobian(x, p)
        try:
            lu = splu(J.tocsc())
            step = -lu.solve(res)
        except RuntimeError as exc:  # singular factorization
            raise LinearSolveError(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise LinearSolveError("non-finite Newton step")
        if opts.deflate_radial:
            diff = x - x_rad
            d2 = max(space.inner(diff, diff), 1e-300)
            m = 1.0 + 1.0 / d2
            mgrad_step = -2.0 * space.inner(diff, step) / d2**2
            denom = m + mgrad_step
            if denom > 0.1 * m:
                step = step * (m / denom)
        alpha = 1.0
        for _ in range(opts.max_halvings):
            trial = x + alpha * step
            res_t = space.residual_vec(trial, p)
            rn_t = float(np.max(np.abs(res_t)))
            if rn_t <= (1.0 - 1e-4 * alpha) * rnorm:
                break
            alpha *= 0.5
        x = x + alpha * step
        res = space.residual_vec(x, p)
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        if rnorm < best_norm:
            best_norm, best_x, stall = rnorm, x.copy(), 0
        else:
            stall += 1
        it += 1
    x, rnorm = best_x, best_norm
    out = space.field_from(x, p)
    dist = float(np.max(np.abs(x - x_rad)))
    return NewtonResult(
        field=out,
        residual=rnorm,
        iterations=it,
        history=history,
        converged_to_radial=dist < opts.radial_proximity,
        distance_to_radial=dist,
    )


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------

CONE_IDS = ("k1+", "k1-", "k2+", "k2-")


@dataclass(frozen=True)
class ConeDiagnostics:
    cone: str
    min_signed_derivative: float
    evenness_violation: float
    member: bool
    tol: float


def cone_check(w: Field2D, cone: str, tol: float = 1e-10) -> ConeDiagnostics:
    """Monotonicity (and, for the K2 cones, x_N-evenness) of a field.

    The discrete theta-derivative is sampled at cell interfaces
    (w[:,k+1]-w[:,k])/h, over [0,pi] for K1 and [0,pi/2] for K2; membership
    allows a violation of tol relative to the field scale.
    """
    cone = cone.lower()
    if cone not in CONE_IDS:
        raise ValueError(f"unknown cone id {cone!r}; expected one of {CONE_IDS}")
    g = w.grid
    deriv = (w.values[:, 1:] - w.values[:, :-1]) / g.h_theta
    if cone.startswith("k2"):
        c = (g.M_theta - 1) // 2
        deriv = deriv[:, :c]  # interfaces with midpoint below pi/2
        evenness = float(np.max(np.abs(w.values - w.values[:, ::-1])))
    else:
        evenness = 0.0
    signed = deriv if cone.endswith("+") else -deriv
    min_signed = float(np.min(signed)) if signed.size else 0.0
    scale = max(w.sup_norm(), 1e-300)
    member = min_signed >= -tol * scale and evenness <= tol * scale
    return ConeDiagnostics(
        cone=cone,
        min_signed_derivative=min_signed,
        evenness_violation=evenness,
        member=member,
        tol=tol,
    )


def cone_for_degree(j: int, sign: str) -> str:
    if j == 1:
        return "k1" + sign
    if j == 2:
        return "k2" + sign
    raise ValueError(f"cone switching supports degrees 1 and 2, got j={j}")


def degree_for_cone(cone: str) -> int:
    cone = cone.lower()
    if cone.startswith("k1"):
        return 1
    if cone.startswith("k2"):
        return 2
    raise ValueError(f"unknown cone id {cone!r}")


# ---------------------------------------------------------------------------
# decay fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    rate: float
    expected: float
    relative_deviation: float
    t_window: tuple[float, float]


def fit_decay_rate(
    w: Field2D, window: tuple[float, float] = (0.45, 0.70)
) -> DecayFit:
    """Exponential decay rate of the angular average of w on the declared
    t-window (fractions of T), fitted by least squares on the log; the
    expected rate (N-2) nu / 2 comes from the linearization at zero."""
    p = w.params
    c = derive_constants(p)
    g = w.grid
    prof = np.abs(w.theta_average())
    lo, hi = window[0] * g.T, window[1] * g.T
    mask = (g.t >= lo) & (g.t <= hi) & (prof > 1e-250)
    if np.count_nonzero(mask) < 5:
        raise ValueError("decay window contains too few usable nodes")
    tt = g.t[mask]
    yy = np.log(prof[mask])
    slope = np.polyfit(tt, yy, 1)[0]
    expected = 0.5 * (p.N - 2) * c.nu
    rate = -float(slope)
    return DecayFit(
        rate=rate,
        expected=expected,
        relative_deviation=abs(rate - expected) / expected,
        t_window=(float(lo), float(hi)),
    )
