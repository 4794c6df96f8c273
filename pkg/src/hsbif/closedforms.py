"""Closed-form radial objects and the oracles that certify them numerically.

Every explicit function attached to the radial solution family is evaluated
here: the radial solutions and their dilates, the dilation kernel function,
the kernel functions at degeneracy points, the first singular eigenfunction,
the 1D reduction profiles, and the zonal harmonic slices.  All radial
sampling lives on log-uniform grids t = log r, where the Kelvin transform is
the reflection t -> -t composed with multiplication by e^{(N-2)t} and is
therefore exact on the grid.

Normalization: the toolkit works with the forced form of the equation (the
constant C_gamma sits on the right-hand side), under which the radial
solution carries no normalizing prefactor.  Metadata emitted with exported
profiles records the conversion to the unit-forcing form; see
``normalization_metadata``.

Derivatives of all closed-form kinds are analytic (simple power/rational
forms); no finite differencing is used for them.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.special import eval_jacobi

from .params import ProblemParams, derive_constants, gamma_j
from .quadrature import QuadratureResult, QuadratureSpec, integrate_log_line


class RadialKind(Enum):
    U_GAMMA = "u_gamma"
    U_GAMMA_LAMBDA = "u_gamma_lambda"
    Z_GAMMA = "z_gamma"
    Z_JI = "z_ji"
    PSI1_RAD = "psi1_rad"
    V_ONEDIM = "v_onedim"
    W_SINGULAR = "w_singular"


@dataclass(frozen=True)
class RadialProfile:
    """A closed-form radial object with analytic evaluation and derivative."""

    kind: RadialKind
    params: ProblemParams
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    def __call__(self, r):
        return eval_radial(self.kind, self.params, r, lam=self.lam)

    def derivative(self, r):
        return radial_derivative(self.kind, self.params, r, lam=self.lam)


def _exponents(p: ProblemParams):
    c = derive_constants(p)
    A = 0.5 * (p.N - 2) * (c.nu - 1.0)  # power at the origin
    B = (2.0 - p.s) * c.nu  # power inside 1 + r^B
    return c, A, B


def eval_radial(kind: RadialKind, p: ProblemParams, r, lam: float = 1.0):
    """Evaluate a closed-form radial object at radius r > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    c, A, B = _exponents(p)
    if kind is RadialKind.U_GAMMA:
        return r**A / (1.0 + r**B) ** ((p.N - 2) / (2.0 - p.s))
    if kind is RadialKind.U_GAMMA_LAMBDA:
        # dilate lam^{(N-2)/2} U(lam r)
        return lam ** (0.5 * (p.N - 2)) * eval_radial(
            RadialKind.U_GAMMA, p, lam * r
        )
    if kind is RadialKind.Z_GAMMA:
        return (
            r**A
            * (1.0 - r**B)
            / (1.0 + r**B) ** ((p.N - p.s) / (2.0 - p.s))
        )
    if kind in (RadialKind.Z_JI, RadialKind.PSI1_RAD):
        return r ** (A + 0.5 * B) / (1.0 + r**B) ** (
            (p.N - p.s) / (2.0 - p.s)
        )
    if kind is RadialKind.V_ONEDIM:
        return (1.0 + r**2) ** (-0.5 * (c.q_s - 2.0))
    if kind is RadialKind.W_SINGULAR:
        return r ** (-0.5 * (c.q_s - 2.0))
    raise ValueError(f"unknown radial kind {kind!r}")


def radial_derivative(kind: RadialKind, p: ProblemParams, r, lam: float = 1.0):
    """Analytic d/dr of a closed-form radial object."""
    r = np.asarray(r, dtype=float)
    c, A, B = _exponents(p)
    if kind is RadialKind.U_GAMMA:
        E = (p.N - 2) / (2.0 - p.s)
        f = eval_radial(kind, p, r)
        return f * (A / r - E * B * r ** (B - 1.0) / (1.0 + r**B))
    if kind is RadialKind.U_GAMMA_LAMBDA:
        return lam ** (0.5 * (p.N - 2)) * lam * radial_derivative(
            RadialKind.U_GAMMA, p, lam * r
        )
    if kind is RadialKind.Z_GAMMA:
        E = (p.N - p.s) / (2.0 - p.s)
        rB = r**B
        bracket = (
            A * (1.0 - rB) * (1.0 + rB)
            - B * rB * (1.0 + rB)
            - E * B * rB * (1.0 - rB)
        )
        return r ** (A - 1.0) * (1.0 + rB) ** (-E - 1.0) * bracket
    if kind in (RadialKind.Z_JI, RadialKind.PSI1_RAD):
        E = (p.N - p.s) / (2.0 - p.s)
        f = eval_radial(kind, p, r)
        return f * ((A + 0.5 * B) / r - E * B * r ** (B - 1.0) / (1.0 + r**B))
    if kind is RadialKind.V_ONEDIM:
        return -(c.q_s - 2.0) * r * (1.0 + r**2) ** (-0.5 * c.q_s)
    if kind is RadialKind.W_SINGULAR:
        return -0.5 * (c.q_s - 2.0) * r ** (-0.5 * c.q_s)
    raise ValueError(f"unknown radial kind {kind!r}")


# ---------------------------------------------------------------------------
# zonal harmonics and the degeneracy kernel functions
# ---------------------------------------------------------------------------


def zonal_harmonic(N: int, j: int, theta):
    """The unique (up to scale) O(N-1)-invariant degree-j harmonic on the
    sphere, realized as the Jacobi polynomial P_j^{(a,a)}(cos theta) with
    a = (N-3)/2.  This fixes the basis convention used throughout."""
    theta = np.asarray(theta, dtype=float)
    a = 0.5 * (N - 3)
    return eval_jacobi(j, a, a, np.cos(theta))


def eval_kernel_Zji(p: ProblemParams, j: int, r, theta, gamma_tol: float = 1e-9):
    """Kernel function at the degeneracy point gamma_j: radial factor times
    the zonal degree-j harmonic.  Refuses parameters away from gamma_j."""
    gj = gamma_j(p.N, p.s, j)
    if abs(p.gamma - gj) > gamma_tol * max(1.0, abs(gj)):
        raise ValueError(
            f"gamma={p.gamma} is not the degeneracy point gamma_{j}={gj}"
        )
    rad = eval_radial(RadialKind.Z_JI, p, r)
    return rad * zonal_harmonic(p.N, j, theta)


# ---------------------------------------------------------------------------
# Kelvin transform on log-symmetric radial grids
# ---------------------------------------------------------------------------


def is_log_symmetric(r: np.ndarray, tol: float = 1e-12) -> bool:
    """True when the grid satisfies r_i * r_{M-1-i} = 1 for all i."""
    r = np.asarray(r, dtype=float)
    return bool(np.all(np.abs(r * r[::-1] - 1.0) <= tol * np.maximum(r, 1.0)))


def log_symmetric_grid(T: float, m: int) -> np.ndarray:
    """Radii e^t for m uniform t-nodes on [-T, T] (m odd keeps r=1 on grid)."""
    return np.exp(np.linspace(-T, T, m))


def kelvin_radial(N: int, r: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Kelvin transform (k f)(r) = r^{2-N} f(1/r) of a sampled radial
    function; exact on log-symmetric grids (reflection plus weight)."""
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if not is_log_symmetric(r):
        raise ValueError("kelvin_radial requires a log-symmetric grid")
    return r ** (2.0 - N) * values[::-1]


# ---------------------------------------------------------------------------
# the radial <-> 1D correspondence
# ---------------------------------------------------------------------------


def radial_to_onedim(u, p: ProblemParams):
    """Map a radial profile u to v(r) = r^{a b} u(r^b).

    Accepts a callable and returns a callable; the inverse is
    ``onedim_to_radial``.  Sends the radial solution to (1+r^2)^{-(q-2)/2}.
    """
    c = derive_constants(p)
    ab = c.a_gamma * c.b_gamma_s

    def v(r):
        r = np.asarray(r, dtype=float)
        return r**ab * u(r**c.b_gamma_s)

    return v


def onedim_to_radial(v, p: ProblemParams):
    """Inverse of ``radial_to_onedim``: u(r) = r^{-a} v(r^{1/b})."""
    c = derive_constants(p)

    def u(r):
        r = np.asarray(r, dtype=float)
        return r ** (-c.a_gamma) * v(r ** (1.0 / c.b_gamma_s))

    return u


def onedim_derivative(profile: RadialProfile, p: ProblemParams):
    """Analytic derivative of v = radial_to_onedim(profile)."""
    c = derive_constants(p)
    ab = c.a_gamma * c.b_gamma_s
    b = c.b_gamma_s

    def dv(r):
        r = np.asarray(r, dtype=float)
        rb = r**b
        return ab * r ** (ab - 1.0) * profile(rb) + r**ab * b * r ** (
            b - 1.0
        ) * profile.derivative(rb)

    return dv


# ---------------------------------------------------------------------------
# norm equivalence and residual oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormEquivalence:
    lhs: float
    rhs: float
    relative_gap: float
    lhs_quadrature: QuadratureResult
    rhs_quadrature: QuadratureResult


def norm_equivalence_check(
    profile: RadialProfile,
    p: ProblemParams,
    spec: QuadratureSpec = QuadratureSpec(),
) -> NormEquivalence:
    """Check the weighted-norm identity between a radial profile and its 1D
    reduction:

      int_0^inf r^{N-1} ((u')^2 - gamma u^2/r^2) dr
        = ((2-s) nu / 2) int_0^inf r^{q-1} (v')^2 dr.

    Both sides are evaluated by Gauss-Legendre panels in t = log r; the
    relative gap |lhs-rhs|/|lhs| is returned (0 for the zero profile).
    """
    c = derive_constants(p)

    def lhs_t(t):
        r = np.exp(t)
        u = profile(r)
        du = profile.derivative(r)
        return r ** p.N * (du**2 - p.gamma * (u / r) ** 2)

    dv = onedim_derivative(profile, p)

    def rhs_t(t):
        r = np.exp(t)
        return r**c.q_s * dv(r) ** 2

    lq = integrate_log_line(lhs_t, spec)
    rq = integrate_log_line(rhs_t, spec)
    rhs = 0.5 * (2.0 - p.s) * c.nu * rq.value
    denom = abs(lq.value)
    gap = 0.0 if denom == 0.0 and rhs == 0.0 else abs(lq.value - rhs) / max(
        denom, 1e-300
    )
    if not (lq.converged and rq.converged):
        raise ArithmeticError("norm equivalence quadrature did not converge")
    return NormEquivalence(
        lhs=lq.value,
        rhs=rhs,
        relative_gap=gap,
        lhs_quadrature=lq,
        rhs_quadrature=rq,
    )


def mapped_radial_solution(p: ProblemParams):
    """The radial solution in Emden-Fowler variables:
    w(t) = (2 cosh((2-s) nu t / 2))^{-(N-2)/(2-s)}, even in t."""
    c = derive_constants(p)
    beta = 0.5 * (2.0 - p.s) * c.nu
    expo = (p.N - 2) / (2.0 - p.s)

    def w(t):
        t = np.asarray(t, dtype=float)
        return (2.0 * np.cosh(beta * t)) ** (-expo)

    return w


def mapped_singular_eigenfunction(p: ProblemParams):
    """First singular eigenfunction in Emden-Fowler variables:
    (2 cosh((2-s) nu t / 2))^{-(N-s)/(2-s)}, positive and even."""
    c = derive_constants(p)
    beta = 0.5 * (2.0 - p.s) * c.nu
    expo = (p.N - p.s) / (2.0 - p.s)

    def w(t):
        t = np.asarray(t, dtype=float)
        return (2.0 * np.cosh(beta * t)) ** (-expo)

    return w


def mapped_dilation_kernel(p: ProblemParams):
    """The dilation kernel function in Emden-Fowler variables:
    -2 sinh((2-s) nu t/2) (2 cosh((2-s) nu t/2))^{-(N-s)/(2-s)}, odd in t."""
    c = derive_constants(p)
    beta = 0.5 * (2.0 - p.s) * c.nu
    expo = (p.N - p.s) / (2.0 - p.s)

    def w(t):
        t = np.asarray(t, dtype=float)
        return -2.0 * np.sinh(beta * t) * (2.0 * np.cosh(beta * t)) ** (-expo)

    return w


def residual_radial(
    p: ProblemParams, lam: float = 1.0, T: float | None = None, h: float = 1e-3
) -> float:
    """Max-norm finite-difference residual of the dilated radial solution in
    the forced equation, discretized on a log-uniform grid.

    The equation is evaluated in the autonomous Emden-Fowler form (second
    order centered differences), where the exact solution is the translated
    profile w(t + log lam); the returned max-norm decays as O(h^2).
    """
    c = derive_constants(p)
    if T is None:
        T = 25.0 / ((p.N - 2) * c.nu)
    m = int(round(2 * T / h)) + 1
    t = np.linspace(-T, T, m)
    w = mapped_radial_solution(p)(t + math.log(lam))
    kappa = 0.25 * (p.N - 2) ** 2 - p.gamma
    lap = (2.0 * w[1:-1] - w[:-2] - w[2:]) / (t[1] - t[0]) ** 2
    res = lap + kappa * w[1:-1] - c.C_gamma * np.abs(w[1:-1]) ** (
        c.p_s - 2.0
    ) * w[1:-1]
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def normalization_metadata(p: ProblemParams) -> dict:
    """Both normalizations of the problem, recorded with every export.

    The toolkit solves the forced form (constant C_gamma on the right-hand
    side).  A solution U of the forced form yields a solution
    u(x) = cfac^{-2} U(cfac x) of the unit-forcing form whenever
    cfac^{2(p_s-1)} C_gamma = 1.
    """
    c = derive_constants(p)
    cfac = c.C_gamma ** (-1.0 / (2.0 * (c.p_s - 1.0)))
    return {
        "normalization": "forced (C_gamma on the right-hand side)",
        "C_gamma": c.C_gamma,
        "unit_forcing_scale_cfac": cfac,
        "prefactor_alternative_form": c.C_gamma
        ** ((p.N - 2) / (2.0 * (2.0 - p.s))),
    }


def export_profile_csv(path: str | Path, r: np.ndarray, values: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "value"])
        for ri, vi in zip(r, values):
            writer.writerow([f"{ri:.17g}", f"{vi:.17g}"])


def export_profile_json(
    path: str | Path,
    profile: RadialProfile,
    r: np.ndarray,
) -> None:
    p = profile.params
    record = {
        "kind": profile.kind.value,
        "lambda": profile.lam,
        "params": {"N": p.N, "s": p.s, "gamma": p.gamma},
        "normalization": normalization_metadata(p),
        "r": [float(x) for x in r],
        "value": [float(x) for x in profile(r)],
    }
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True))
