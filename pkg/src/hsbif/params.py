"""Parameter algebra for the Hardy-Sobolev problem.

Validates the triple (N, s, gamma), derives the constants that every other
module consumes, and evaluates the closed integer/real formulas attached to
the radial solution family: degeneracy points gamma_j, sphere eigenvalues
mu_j, harmonic multiplicities, and Morse indices (full and symmetry
restricted).

Everything here is a pure function of value inputs; no state, no I/O.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class SymmetryClass(Enum):
    """Symmetry restriction used when counting negative directions.

    FULL:          no restriction (all spherical harmonics).
    AXIAL:         invariant under O(N-1) acting on the first N-1 variables;
                   exactly one harmonic per degree survives.
    AXIAL_EVEN:    additionally even in x_N; only even degrees survive.
    SECTOR:        invariant under rotations by 2*pi/j in the (x1,x2) plane
                   together with the reflection x2 -> -x2 (needs a degree j).
    """

    FULL = "full"
    AXIAL = "o(n-1)"
    AXIAL_EVEN = "o(n-1)-even"
    SECTOR = "sector"


@dataclass(frozen=True)
class ProblemParams:
    """The admissible parameter triple (N, s, gamma).

    N >= 3 integer dimension, 0 <= s < 2, gamma < (N-2)^2/4.
    """

    N: int
    s: float
    gamma: float

    def __post_init__(self) -> None:
        if not isinstance(self.N, int) or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N!r}")
        if not 0.0 <= self.s < 2.0:
            raise ValueError(f"s must lie in [0, 2), got {self.s}")
        cap = (self.N - 2) ** 2 / 4.0
        if not self.gamma < cap:
            raise ValueError(
                f"gamma must be < (N-2)^2/4 = {cap}, got {self.gamma}"
            )

    @property
    def hardy_threshold(self) -> float:
        """(N-2)^2/4, the upper barrier for gamma."""
        return (self.N - 2) ** 2 / 4.0


@dataclass(frozen=True)
class DerivedConstants:
    """All constants derived from (N, s, gamma).

    nu      = sqrt(1 - 4*gamma/(N-2)^2)
    p_s     = 2(N-s)/(N-2)           critical Hardy-Sobolev exponent
    q_s     = 2(N-s)/(2-s)           fractional dimension of the 1D reduction
    C_gamma = (N-s)(N-2)*nu^2        forcing constant of the normalized problem
    a_gamma = (N-2)(1-nu)/2          exponent of the radial change of unknown
    b_gamma_s = 2/((2-s)*nu)         stretching of the radial change of variable
    """

    nu: float
    p_s: float
    q_s: float
    C_gamma: float
    a_gamma: float
    b_gamma_s: float


def derive_constants(p: ProblemParams) -> DerivedConstants:
    """Evaluate the six derived constants for a valid parameter triple."""
    N, s, gamma = p.N, p.s, p.gamma
    nu = math.sqrt(1.0 - 4.0 * gamma / (N - 2) ** 2)
    return DerivedConstants(
        nu=nu,
        p_s=2.0 * (N - s) / (N - 2),
        q_s=2.0 * (N - s) / (2.0 - s),
        C_gamma=(N - s) * (N - 2) * nu**2,
        a_gamma=0.5 * (N - 2) * (1.0 - nu),
        b_gamma_s=2.0 / ((2.0 - s) * nu),
    )


def gamma_j(N: int, s: float, j: int) -> float:
    """The j-th degeneracy point of the radial solution curve.

    gamma_j = (N-2)^2/4 - j(N-2+j)(N-2)^2 / ((2-s)(2N-2-s)).

    Strictly decreasing in j, tends to -infinity.  gamma_0 is the existence
    threshold (N-2)^2/4 itself; gamma_1 = 0 exactly when s = 0.
    """
    _check_degree(j)
    if not 0.0 <= s < 2.0:
        raise ValueError(f"s must lie in [0, 2), got {s}")
    if not isinstance(N, int) or N < 3:
        raise ValueError(f"N must be an integer >= 3, got {N!r}")
    return (N - 2) ** 2 / 4.0 - (
        j * (N - 2 + j) * (N - 2) ** 2 / ((2.0 - s) * (2.0 * N - 2.0 - s))
    )


def mu_j(N: int, j: int) -> int:
    """j-th eigenvalue of -Laplace-Beltrami on the unit sphere: j(N-2+j)."""
    _check_degree(j)
    return j * (N - 2 + j)


def harmonic_multiplicity(N: int, j: int) -> int:
    """Dimension of degree-j spherical harmonics on S^{N-1}.

    (N+2j-2)(N+j-3)! / ((N-2)! j!), evaluated in exact integer arithmetic
    so large (N, j) never overflow.
    """
    _check_degree(j)
    if j == 0:
        return 1
    return (
        (N + 2 * j - 2)
        * math.factorial(N + j - 3)
        // (math.factorial(N - 2) * math.factorial(j))
    )


def negative_degree_cutoff(p: ProblemParams) -> float:
    """Right endpoint of the half-open degree interval entering the Morse sum.

    A degree j contributes negative directions iff 0 <= j < cutoff; a j
    landing exactly on the endpoint is the degenerate case and is excluded.
    """
    N, s, gamma = p.N, p.s, p.gamma
    disc = (N - s) ** 2 - 4.0 * gamma * (2.0 - s) * (2.0 * N - 2.0 - s) / (
        (N - 2) ** 2
    )
    return 0.5 * (2 - N) + 0.5 * math.sqrt(disc)


def _degrees_below_cutoff(p: ProblemParams) -> range:
    cut = negative_degree_cutoff(p)
    # Half-open interval [0, cut): a degree landing on the endpoint (the
    # degenerate case gamma = gamma_j) is excluded.  Snap near-integer
    # cutoffs so float fuzz at an exact degeneracy cannot flip the count.
    nearest = round(cut)
    if abs(cut - nearest) < 1e-12:
        j_top = int(nearest) - 1
    else:
        j_top = math.floor(cut)
    return range(0, max(j_top, -1) + 1)


def morse_index(p: ProblemParams) -> int:
    """Morse index of the radial solution: sum of multiplicities over the
    degrees strictly below the cutoff."""
    return sum(harmonic_multiplicity(p.N, j) for j in _degrees_below_cutoff(p))


def sector_invariant_dimension(N: int, j: int, degree: int) -> int:
    """Dimension of degree-`degree` harmonics invariant under rotations by
    2*pi/j in the (x1,x2) plane and the reflection x2 -> -x2.

    Counting the admissible (angular period, chain) pairs in the explicit
    harmonic expansion: one cosine mode for each multiple l = 0, j, 2j, ...
    up to `degree`, each carrying C(degree - l + N - 3, N - 3) radial chains.
    """
    if j < 1:
        raise ValueError(f"sector symmetry needs j >= 1, got {j}")
    _check_degree(degree)
    total = 0
    ell = 0
    while ell <= degree:
        total += math.comb(degree - ell + N - 3, N - 3)
        ell += j
    return total


def morse_index_symmetric(
    p: ProblemParams, sym: SymmetryClass, sector_j: int | None = None
) -> int:
    """Morse index of the radial solution restricted to a symmetry class.

    AXIAL counts one direction per degree below the cutoff, AXIAL_EVEN only
    the even degrees, SECTOR the invariant harmonics of the dihedral-type
    subgroup indexed by ``sector_j``.
    """
    degrees = _degrees_below_cutoff(p)
    if sym is SymmetryClass.FULL:
        return sum(harmonic_multiplicity(p.N, j) for j in degrees)
    if sym is SymmetryClass.AXIAL:
        return len(degrees)
    if sym is SymmetryClass.AXIAL_EVEN:
        return sum(1 for j in degrees if j % 2 == 0)
    if sym is SymmetryClass.SECTOR:
        if sector_j is None:
            raise ValueError("SECTOR symmetry requires sector_j >= 1")
        return sum(sector_invariant_dimension(p.N, sector_j, j) for j in degrees)
    raise ValueError(f"unknown symmetry class {sym!r}")


def radial_singular_eigenvalue(p: ProblemParams) -> float:
    """The unique negative radial eigenvalue of the |x|^{-2}-weighted
    linearization: -(2-s)^2 nu^2 (q_s - 1)/4."""
    c = derive_constants(p)
    return -((2.0 - p.s) ** 2) * c.nu**2 * (c.q_s - 1.0) / 4.0


def singular_eigenvalue(p: ProblemParams, j: int) -> float:
    """Degree-j singular eigenvalue Lambda = Lambda_1^rad + mu_j (formula)."""
    return radial_singular_eigenvalue(p) + mu_j(p.N, j)


def _check_degree(j: int) -> None:
    if not isinstance(j, int) or j < 0:
        raise ValueError(f"degree must be an integer >= 0, got {j!r}")
