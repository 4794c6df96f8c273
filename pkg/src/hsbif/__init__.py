"""Numerical toolkit for the Hardy-Sobolev equation.

Closed-form radial solutions and their linearization, degeneracy points and
Morse indices (by formula and by independent discretized eigensolves), and
numerical tracing of the non-radial bifurcation branches in symmetry-reduced
coordinates, with cone-monotonicity and Kelvin-invariance monitors and
Nehari-manifold minimization as cross-checks.
"""

__version__ = "0.1.0"

from .params import (
    DerivedConstants,
    ProblemParams,
    SymmetryClass,
    derive_constants,
    gamma_j,
    harmonic_multiplicity,
    morse_index,
    morse_index_symmetric,
    mu_j,
)

__all__ = [
    "__version__",
    "DerivedConstants",
    "ProblemParams",
    "SymmetryClass",
    "derive_constants",
    "gamma_j",
    "harmonic_multiplicity",
    "morse_index",
    "morse_index_symmetric",
    "mu_j",
]
