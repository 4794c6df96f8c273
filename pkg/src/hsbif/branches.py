"""Branch machinery: bifurcation detection, branch switching at degeneracy
points, and pseudo-arclength continuation with cone/energy/decay monitors.

Bifurcation detection exploits the tensor structure of the Jacobian at the
radial solution: on the reduced grid it splits exactly into (t-operator with
the radial potential) + (angular operator), so the smallest eigenvalue of
the non-radial sector j is alpha_min(gamma) + mu_hat_j with both terms
cheap tridiagonal eigensolves.  The zero crossing of that sector eigenvalue
is located per grid and Richardson-extrapolated over a grid refinement to
remove the O(h^2) bias.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .energy import (
    dirichlet_energy_extrapolated,
    dirichlet_lower_bound,
    energy_report,
)
from .fields import Field2D, Grid2D, grid_for, kernel_field
from .operators import (
    SymmetrySpace,
    kappa_of,
    negative_eigen_count,
    radial_solve_1d,
    t_sector_smallest,
    theta_eigenvalues,
)
from .params import ProblemParams, gamma_j
from .solver import (
    ConeDiagnostics,
    NewtonOptions,
    NewtonResult,
    cone_check,
    degree_for_cone,
    fit_decay_rate,
    newton_solve,
)


def post_switch_delta(gamma_bif: float) -> float:
    """Correction offset below the bifurcation point: 1e-3 |gamma_j| + 1e-4."""
    return 1e-3 * abs(gamma_bif) + 1e-4


# ---------------------------------------------------------------------------
# bifurcation detection
# ---------------------------------------------------------------------------


def grid_crossing(grid: Grid2D, N: int, s: float, j: int,
                  bracket_width: float = 0.05) -> float:
    """gamma at which the degree-j sector eigenvalue of the discrete Jacobian
    at the radial solution crosses zero, on this particular grid."""
    mu_hat = float(theta_eigenvalues(grid, j + 1)[j])

    def f(g: float) -> float:
        return t_sector_smallest(grid, ProblemParams(N, s, g)) + mu_hat

    g0 = gamma_j(N, s, j)
    cap = (N - 2) ** 2 / 4.0
    lo, hi = g0 - bracket_width, min(g0 + bracket_width, cap - 1e-9)
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ArithmeticError(
            f"no sector-{j} eigenvalue crossing in [{lo}, {hi}] on this grid"
        )
    return brentq(f, lo, hi, xtol=1e-13)


def detect_bifurcation(
    N: int,
    s: float,
    gamma_range: tuple[float, float],
    subspace: str = "axial",
    grid: Grid2D | None = None,
    j_max: int = 6,
) -> list[float]:
    """gamma values in the range where the smallest non-radial Jacobian
    eigenvalue at the radial solution (Kelvin-even, in the declared symmetry
    subspace) crosses zero.

    subspace: "axial" scans degrees j >= 1; "axial-even" only even j >= 2.
    Each crossing is located on the working grid and on its refinement and
    Richardson-extrapolated, landing within ~1e-6 of the closed-form
    degeneracy point.  The dilation sector (j = 0 radial direction) is
    excluded by Kelvin evenness by construction.
    """
    lo, hi = gamma_range
    cap = (N - 2) ** 2 / 4.0
    if hi >= cap:
        raise ValueError(f"detection range must stay below {cap}")
    if subspace == "axial":
        degrees = range(1, j_max + 1)
    elif subspace == "axial-even":
        degrees = range(2, j_max + 1, 2)
    else:
        raise ValueError(f"unknown subspace {subspace!r}")
    found = []
    for j in degrees:
        g0 = gamma_j(N, s, j)
        if not (lo - 0.05 <= g0 <= hi + 0.05):
            continue
        g = grid_for(ProblemParams(N, s, g0)) if grid is None else grid
        try:
            c_h = grid_crossing(g, N, s, j)
            c_h2 = grid_crossing(g.refined(), N, s, j)
        except ArithmeticError:
            continue
        crossing = c_h2 + (c_h2 - c_h) / 3.0
        if lo <= crossing <= hi:
            found.append(crossing)
    return sorted(found)


# ---------------------------------------------------------------------------
# branch switching
# ---------------------------------------------------------------------------


class BranchSwitchError(RuntimeError):
    pass


def kernel_seed_direction(
    space: SymmetrySpace, p_at_gj: ProblemParams, j: int, kappa: float
) -> np.ndarray:
    """Mapped kernel function restricted to the space, normalized to unit
    discrete energy norm."""
    z = space.restrict(kernel_field(space.grid, p_at_gj, j).values)
    return z / np.sqrt(space.quadratic_form(z, kappa))


def branch_switch(
    p_at_gj: ProblemParams,
    cone: str,
    eps: float,
    grid: Grid2D,
    gamma_target: float | None = None,
) -> Field2D:
    """Seed for switching onto a non-radial branch: the discrete radial
    solution plus eps times the unit-energy kernel function, signed so the
    theta-derivative matches the requested cone.

    The zonal slices decrease in theta near theta = 0 (degree 1 on all of
    (0, pi), degree 2 on (0, pi/2)), so the '+' cones subtract the kernel
    and the '-' cones add it.  gamma_target defaults to the degeneracy
    point itself; pass the corrected value to seed the Newton run.
    """
    if eps <= 0.0:
        raise ValueError("switch amplitude eps must be positive (eps=0 is radial)")
    j = degree_for_cone(cone)
    gj = gamma_j(p_at_gj.N, p_at_gj.s, j)
    if abs(p_at_gj.gamma - gj) > 1e-6 * max(1.0, abs(gj)):
        raise ValueError(
            f"cone {cone} needs degree {j}: gamma={p_at_gj.gamma} is not "
            f"gamma_{j}={gj}"
        )
    theta_even = cone.startswith("k2")
    p_tgt = p_at_gj if gamma_target is None else ProblemParams(
        p_at_gj.N, p_at_gj.s, gamma_target
    )
    space = SymmetrySpace(grid, kelvin_even=True, theta_even=theta_even)
    z = kernel_seed_direction(space, p_at_gj, j, kappa_of(p_tgt))
    xr = space.restrict(
        np.repeat(radial_solve_1d(grid, p_tgt)[:, None], grid.M_theta, axis=1)
    )
    sign = -1.0 if cone.endswith("+") else 1.0
    return space.field_from(xr + sign * eps * z, p_tgt)


@dataclass
class SwitchResult:
    result: NewtonResult
    gamma: float
    gamma_bif: float
    grid_crossing_gamma: float
    cone: str
    eps_used: float
    nonradial: bool
    attempts: list[tuple[float, float]]  # (eps, distance_to_radial)


def switch_and_correct(
    N: int,
    s: float,
    cone: str,
    grid: Grid2D | None = None,
    eps: float = 0.05,
    delta: float | None = None,
    eps_ladder: Sequence[float] = (1.0, 2.0, 4.0, 8.0, 0.5),
    opts: NewtonOptions | None = None,
) -> SwitchResult:
    """Switch at the degeneracy point of the cone's degree and Newton-correct
    at gamma_j - delta (deflating the radial solution).

    If the correction collapses to the radial solution the switch amplitude
    is rescaled through eps_ladder before giving up; a radial outcome is
    returned with nonradial=False (the caller decides whether that is a
    failure).
    """
    j = degree_for_cone(cone)
    gj = gamma_j(N, s, j)  # strictly below the threshold for every j >= 1
    p_j = ProblemParams(N, s, gj)
    if grid is None:
        grid = grid_for(p_j)
    if delta is None:
        delta = post_switch_delta(gj)
    gamma_c = gj - delta
    ghat = grid_crossing(grid, N, s, j)
    if opts is None:
        opts = NewtonOptions(deflate_radial=True, max_iter=60)
    attempts: list[tuple[float, float]] = []
    best: NewtonResult | None = None
    for scale in eps_ladder:
        e = eps * scale
        seed = branch_switch(p_j, cone, e, grid, gamma_target=gamma_c)
        try:
            res = newton_solve(seed, opts=opts)
        except ArithmeticError:
            attempts.append((e, float("nan")))
            continue
        attempts.append((e, res.distance_to_radial))
        if best is None or res.distance_to_radial > best.distance_to_radial:
            best = res
        if not res.converged_to_radial and res.distance_to_radial > 10 * opts.radial_proximity:
            break
    if best is None:
        raise BranchSwitchError(
            f"every switch correction failed for {cone} at gamma={gamma_c}: "
            f"{attempts}"
        )
    return SwitchResult(
        result=best,
        gamma=gamma_c,
        gamma_bif=gj,
        grid_crossing_gamma=ghat,
        cone=cone,
        eps_used=attempts[-1][0],
        nonradial=not best.converged_to_radial,
        attempts=attempts,
    )


# ---------------------------------------------------------------------------
# pseudo-arclength continuation
# ---------------------------------------------------------------------------


@dataclass
class BranchPoint:
    gamma: float
    sup_norm: float
    dirichlet_energy: float
    dirichlet_extrapolated: float
    F_energy: float
    energy_bound: float
    residual: float
    cone: ConeDiagnostics
    decay_deviation: float
    negative_eigen_count: int | None
    distance_to_radial: float
    snapshot: bool = False
    field: Field2D | None = None
    field_path: str | None = None

    def passes(self, residual_tol: float, decay_tol: float = 0.05) -> bool:
        return (
            self.residual <= residual_tol
            and self.cone.member
            and self.decay_deviation <= decay_tol
            and self.dirichlet_extrapolated > self.energy_bound
        )

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "sup_norm": self.sup_norm,
            "dirichlet_energy": self.dirichlet_energy,
            "dirichlet_extrapolated": self.dirichlet_extrapolated,
            "F_energy": self.F_energy,
            "energy_bound": self.energy_bound,
            "residual": self.residual,
            "cone": self.cone.cone,
            "cone_member": self.cone.member,
            "cone_min_derivative": self.cone.min_signed_derivative,
            "decay_deviation": self.decay_deviation,
            "negative_eigen_count": self.negative_eigen_count,
            "distance_to_radial": self.distance_to_radial,
            "snapshot": self.snapshot,
            "field_path": self.field_path,
        }


@dataclass
class BranchRecord:
    cone: str
    params: dict
    points: list[BranchPoint] = field(default_factory=list)
    termination: str = "unterminated"
    provenance: dict = field(default_factory=dict)

    def gammas(self) -> np.ndarray:
        return np.array([pt.gamma for pt in self.points])

    def snapshot_at(self, gamma: float, tol: float = 1e-9) -> BranchPoint | None:
        for pt in self.points:
            if pt.snapshot and abs(pt.gamma - gamma) <= tol:
                return pt
        return None

    def to_dict(self) -> dict:
        return {
            "cone": self.cone,
            "params": self.params,
            "termination": self.termination,
            "provenance": self.provenance,
            "points": [pt.to_dict() for pt in self.points],
        }

    def save(self, out_dir: str | Path, name: str) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        index = out / f"{name}.json"
        index.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        csv_path = out / f"{name}.csv"
        with open(csv_path, "w") as fh:
            fh.write(
                "gamma,sup_norm,dirichlet_energy,F_energy,cone_member,"
                "negative_eigen_count,residual\n"
            )
            for pt in self.points:
                fh.write(
                    f"{pt.gamma:.12g},{pt.sup_norm:.12g},"
                    f"{pt.dirichlet_energy:.12g},{pt.F_energy:.12g},"
                    f"{int(pt.cone.member)},{pt.negative_eigen_count},"
                    f"{pt.residual:.6g}\n"
                )
        return index


@dataclass(frozen=True)
class TraceOptions:
    gamma_min: float = -1.0
    ds0: float = 1e-2
    ds_min: float = 1e-5
    ds_max: float = 5e-2
    max_points: int = 200
    newton_tol: float = 1e-10
    residual_tol: float = 1e-9
    corrector_max_iter: int = 10
    compute_eigs: bool = True
    gamma_samples: tuple[float, ...] = ()
    keep_fields: bool = False
    store_dir: str | None = None


class _Tracer:
    """Pseudo-arclength stepper in (w, gamma) with secant predictor and
    bordered Newton corrector (two sparse solves per iteration)."""

    def __init__(self, space: SymmetrySpace, N: int, s: float, opts: TraceOptions):
        self.space = space
        self.N = N
        self.s = s
        self.opts = opts
        self.scale = 1.0

    def _params(self, gamma: float) -> ProblemParams:
        return ProblemParams(self.N, self.s, gamma)

    def correct(
        self,
        x: np.ndarray,
        gamma: float,
        tangent: tuple[np.ndarray, float] | None,
        anchor: tuple[np.ndarray, float] | None,
        ds: float,
    ) -> tuple[np.ndarray, float, int]:
        """Newton-correct (x, gamma); with tangent/anchor the pseudo-arclength
        constraint is enforced, otherwise gamma stays fixed."""
        sp = self.space
        for it in range(self.opts.corrector_max_iter):
            p = self._params(gamma)
            res = sp.residual_vec(x, p)
            rnorm = float(np.max(np.abs(res)))
            if tangent is None:
                cval = 0.0
            else:
                tx, tg = tangent
                ax, ag = anchor
                cval = (
                    sp.inner(tx, x - ax) / self.scale**2 + tg * (gamma - ag) - ds
                )
            if rnorm <= self.opts.newton_tol and abs(cval) <= 1e-12:
                return x, gamma, it
            J = sp.jacobian(x, p)
            lu = splu(J.tocsc())
            z1 = lu.solve(res)
            if tangent is None:
                x = x - z1
                continue
            rg = sp.residual_gamma_derivative(x, p)
            z2 = lu.solve(rg)
            tx, tg = tangent
            a_dot_z1 = sp.inner(tx, z1) / self.scale**2
            a_dot_z2 = sp.inner(tx, z2) / self.scale**2
            denom = tg - a_dot_z2
            if abs(denom) < 1e-14:
                raise ArithmeticError("singular bordered system")
            dgamma = (a_dot_z1 - cval) / denom
            dx = -z1 - dgamma * z2
            x = x + dx
            gamma = gamma + dgamma
        raise ArithmeticError("corrector did not converge")


def _diagnose(
    space: SymmetrySpace,
    x: np.ndarray,
    p: ProblemParams,
    cone: str,
    compute_eigs: bool,
    snapshot: bool = False,
    keep_field: bool = False,
) -> BranchPoint:
    w = space.field_from(x, p)
    rep = energy_report(w, space)
    dir_ex = dirichlet_energy_extrapolated(w)
    res = float(np.max(np.abs(space.residual_vec(x, p))))
    cd = cone_check(w, cone)
    fit = fit_decay_rate(w)
    neg = None
    if compute_eigs:
        neg, _ = negative_eigen_count(space, space.jacobian(x, p))
    xr = space.restrict(
        np.repeat(radial_solve_1d(space.grid, p)[:, None], space.grid.M_theta, axis=1)
    )
    return BranchPoint(
        gamma=p.gamma,
        sup_norm=w.sup_norm(),
        dirichlet_energy=rep.dirichlet,
        dirichlet_extrapolated=dir_ex,
        F_energy=rep.F,
        energy_bound=dirichlet_lower_bound(p),
        residual=res,
        cone=cd,
        decay_deviation=fit.relative_deviation,
        negative_eigen_count=neg,
        distance_to_radial=float(np.max(np.abs(x - xr))),
        snapshot=snapshot,
        field=w if (keep_field or snapshot) else None,
    )


def trace_branch(
    start: Field2D,
    cone: str,
    opts: TraceOptions,
    gamma_prev: float | None = None,
) -> BranchRecord:
    """Pseudo-arclength continuation of a converged non-radial solution.

    Every accepted point must pass the residual tolerance and stay in the
    declared cone (a cone exit is recorded as the termination cause, never
    silently accepted); requested gamma_samples are landed on exactly by a
    fixed-gamma correction and stored as snapshot points carrying fields.
    """
    p0 = start.params
    space = SymmetrySpace(start.grid, start.kelvin_even, start.theta_even)
    tracer = _Tracer(space, p0.N, p0.s, opts)
    x = space.restrict(start.values)
    gamma = p0.gamma
    tracer.scale = max(space.norm(x), 1.0)

    record = BranchRecord(
        cone=cone,
        params={"N": p0.N, "s": p0.s},
        provenance={
            "gamma_start": gamma,
            "grid": start.grid.describe(),
            "ds0": opts.ds0,
        },
    )
    pt = _diagnose(space, x, ProblemParams(p0.N, p0.s, gamma), cone,
                   opts.compute_eigs, snapshot=True, keep_field=opts.keep_fields)
    if pt.residual > opts.residual_tol:
        raise ValueError("trace_branch needs a converged starting point")
    if not pt.cone.member:
        record.termination = "ConeExit(start)"
        record.points.append(pt)
        return record
    record.points.append(pt)
    _maybe_store(record, pt, opts)

    # previous point for the secant: the radial solution at the same gamma
    # (amplitude zero) unless a previous gamma is supplied
    xr = space.restrict(
        np.repeat(
            radial_solve_1d(space.grid, ProblemParams(p0.N, p0.s, gamma))[:, None],
            space.grid.M_theta,
            axis=1,
        )
    )
    prev = (xr, gamma if gamma_prev is None else gamma_prev)
    cur = (x, gamma)
    ds = opts.ds0
    samples = sorted([g for g in opts.gamma_samples if g < gamma], reverse=True)

    while len(record.points) < opts.max_points:
        tx = cur[0] - prev[0]
        tg = cur[1] - prev[1]
        norm = np.sqrt(space.inner(tx, tx) / tracer.scale**2 + tg**2)
        if norm < 1e-15:
            record.termination = "StepCollapse(degenerate tangent)"
            break
        tx, tg = tx / norm, tg / norm
        if tg > 0:
            tx, tg = -tx, -tg  # walk toward decreasing gamma
        accepted = False
        while ds >= opts.ds_min:
            x_pred = cur[0] + ds * tx * tracer.scale**0   # tangent already scaled
            g_pred = cur[1] + ds * tg
            try:
                x_new, g_new, iters = tracer.correct(
                    x_pred, g_pred, (tx, tg), (cur[0], cur[1]), ds
                )
                accepted = True
                break
            except ArithmeticError:
                ds *= 0.5
        if not accepted:
            record.termination = "StepCollapse"
            break

        # land exactly on requested snapshots crossed by this step
        while samples and g_new <= samples[0] <= cur[1]:
            g_s = samples.pop(0)
            frac = (cur[1] - g_s) / max(cur[1] - g_new, 1e-300)
            x_s = cur[0] + frac * (x_new - cur[0])
            x_s, _, _ = tracer.correct(x_s, g_s, None, None, 0.0)
            pt_s = _diagnose(space, x_s, ProblemParams(p0.N, p0.s, g_s), cone,
                             opts.compute_eigs, snapshot=True, keep_field=True)
            record.points.append(pt_s)
            _maybe_store(record, pt_s, opts)
            if not pt_s.cone.member:
                record.termination = "ConeExit"
                return record

        pt = _diagnose(space, x_new, ProblemParams(p0.N, p0.s, g_new), cone,
                       opts.compute_eigs, keep_field=opts.keep_fields)
        record.points.append(pt)
        _maybe_store(record, pt, opts)
        if not pt.cone.member:
            record.termination = "ConeExit"
            return record
        if pt.residual > opts.residual_tol:
            record.termination = "ResidualExceeded"
            return record
        prev, cur = cur, (x_new, g_new)
        if iters <= 3:
            ds = min(2.0 * ds, opts.ds_max)
        if g_new <= opts.gamma_min:
            record.termination = "ReachedGammaMin"
            return record
    if record.termination == "unterminated":
        record.termination = "MaxPoints"
    return record


def _maybe_store(record: BranchRecord, pt: BranchPoint, opts: TraceOptions) -> None:
    if opts.store_dir and pt.field is not None:
        out = Path(opts.store_dir)
        out.mkdir(parents=True, exist_ok=True)
        base = out / f"{record.cone.replace('+', 'p').replace('-', 'm')}_g{pt.gamma:+.6f}"
        pt.field.save(base)
        pt.field_path = str(base)
