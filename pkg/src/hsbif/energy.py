"""Energy functional, Nehari projection, and the a-priori energy floor.

All integrals are over R^N; in the reduced (t, theta) variables they reduce
to weighted sums over the grid times the measure |S^{N-2}| of the equatorial
sphere.  The discrete quadratic form is taken from the reduced operator
itself (summation by parts is exact), so the Nehari constraint is satisfied
to roundoff after projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .fields import Field2D
from .operators import SymmetrySpace, kappa_of
from .params import ProblemParams, derive_constants


def equatorial_sphere_measure(N: int) -> float:
    """|S^{N-2}| = 2 pi^{(N-1)/2} / Gamma((N-1)/2)."""
    return 2.0 * math.pi ** (0.5 * (N - 1)) / math.exp(gammaln(0.5 * (N - 1)))


def sobolev_constant(N: int) -> float:
    """Best constant of the Sobolev inequality ||grad u||_2^2 >= S ||u||_{2*}^2:
    S = pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}."""
    return math.pi * N * (N - 2) * math.exp(
        (2.0 / N) * (gammaln(0.5 * N) - gammaln(float(N)))
    )


def dirichlet_lower_bound(p: ProblemParams) -> float:
    """Positive floor for the Dirichlet energy of any nontrivial solution
    with gamma <= 0, from the Sobolev/Hardy chain:

      ||grad v||_2^2 >= [ S^{N(2-s)/(2(N-2))} ((N-2)/2)^s / C_gamma ]^{(N-2)/(2-s)}.

    Sharp at gamma = 0, s = 0 (equality for the radial solution).
    """
    c = derive_constants(p)
    S = sobolev_constant(p.N)
    base = (
        S ** (p.N * (2.0 - p.s) / (2.0 * (p.N - 2)))
        * (0.5 * (p.N - 2)) ** p.s
        / c.C_gamma
    )
    return base ** ((p.N - 2) / (2.0 - p.s))


@dataclass(frozen=True)
class EnergyReport:
    F: float
    quadratic: float  # ||grad u||^2 - gamma ||u/x||^2
    p_term: float  # C_gamma int |u|^{p_s}/|x|^s
    dirichlet: float
    hardy: float  # int u^2/|x|^2
    nehari_residual: float  # |quadratic - p_term| / max(quadratic, 1)
    quadrature: dict


def _space_for(w: Field2D, space: SymmetrySpace | None) -> SymmetrySpace:
    if space is not None:
        return space
    return SymmetrySpace(w.grid, w.kelvin_even, w.theta_even)


def energy_report(w: Field2D, space: SymmetrySpace | None = None) -> EnergyReport:
    """All energy terms of a field (declared symmetries define the reduction;
    weights already account for the reflected copies)."""
    p = w.params
    c = derive_constants(p)
    sp = _space_for(w, space)
    x = sp.restrict(w.values)
    sphere = equatorial_sphere_measure(p.N)
    kap = kappa_of(p)
    q_form = sp.quadratic_form(x, kap)
    mass = sp.inner(x, x)
    p_int = float(np.dot(sp.weights, np.abs(x) ** c.p_s))
    quadratic = sphere * q_form
    p_term = sphere * c.C_gamma * p_int
    F = sphere * (0.5 * q_form - c.C_gamma / c.p_s * p_int)
    dirichlet = sphere * (q_form + p.gamma * mass)
    hardy = sphere * mass
    return EnergyReport(
        F=F,
        quadratic=quadratic,
        p_term=p_term,
        dirichlet=dirichlet,
        hardy=hardy,
        nehari_residual=abs(quadratic - p_term) / max(abs(quadratic), 1.0),
        quadrature={
            "scheme": "operator quadratic form + cell weights (2nd order)",
            "grid": w.grid.describe(),
        },
    )


def energy_F(w: Field2D, space: SymmetrySpace | None = None) -> float:
    return energy_report(w, space).F


def dirichlet_energy_extrapolated(w: Field2D) -> float:
    """Richardson-extrapolated Dirichlet energy: the field is re-evaluated
    on the 2h-subgrid and the O(h^2) quadrature/sampling bias is removed."""
    fine = energy_report(w).dirichlet
    gc = w.grid.coarsened()
    wc = Field2D(
        gc, w.values[::2, ::2], w.params, w.kelvin_even, w.theta_even
    )
    coarse = energy_report(wc).dirichlet
    return fine + (fine - coarse) / 3.0


def nehari_project(
    w: Field2D, space: SymmetrySpace | None = None
) -> tuple[Field2D, float]:
    """Scale a field onto the discrete Nehari set.

    Returns (c*w, c) with c^{p_s-2} = quadratic/p_term; raises on a
    degenerate denominator (the zero field).
    """
    p = w.params
    c = derive_constants(p)
    sp = _space_for(w, space)
    x = sp.restrict(w.values)
    kap = kappa_of(p)
    q_form = sp.quadratic_form(x, kap)
    p_int = c.C_gamma * float(np.dot(sp.weights, np.abs(x) ** c.p_s))
    if p_int <= 0.0 or q_form <= 0.0:
        raise ZeroDivisionError(
            "Nehari projection undefined: vanishing p-term or quadratic form"
        )
    scale = (q_form / p_int) ** (1.0 / (c.p_s - 2.0))
    return replace(w, values=scale * w.values), float(scale)


def nehari_scale_vec(
    space: SymmetrySpace, x: np.ndarray, p: ProblemParams
) -> float:
    """Nehari scaling factor for a reduced vector (solver-internal path)."""
    c = derive_constants(p)
    q_form = space.quadratic_form(x, kappa_of(p))
    p_int = c.C_gamma * float(np.dot(space.weights, np.abs(x) ** c.p_s))
    if p_int <= 0.0 or q_form <= 0.0:
        raise ZeroDivisionError("Nehari projection undefined for this vector")
    return (q_form / p_int) ** (1.0 / (c.p_s - 2.0))
