"""Composite Gauss-Legendre quadrature in the log variable t = log r.

Radial integrals over (0, infinity) are evaluated as integrals over the real
t line; all closed-form integrands of the toolkit decay exponentially on both
sides, so a finite window [-T, T] with panels of fixed order converges fast.
The window is grown automatically until the integrand falls below a floor,
and the estimated truncation remainder is reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel layout for composite Gauss-Legendre integration in t."""

    order: int = 24
    panel_width: float = 1.0
    floor: float = 1e-14
    t_max: float = 200.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    half_width: float
    truncation_estimate: float
    converged: bool


def integrate_log_line(
    integrand_t: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec = QuadratureSpec(),
) -> QuadratureResult:
    """Integrate f(t) dt over the real line for a double-sided decaying f.

    The window [-T, T] grows in whole panels until |f| at the edges is below
    ``spec.floor`` (relative to the peak seen so far) or ``spec.t_max`` is
    hit, in which case the non-convergence flag is set.
    """
    nodes, weights = np.polynomial.legendre.leggauss(spec.order)

    def panel(a: float, b: float) -> float:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * float(np.sum(weights * integrand_t(mid + half * nodes)))

    total = 0.0
    peak = 0.0
    w = spec.panel_width
    # center panel [-w/2, w/2], then mirrored panels outward
    total += panel(-0.5 * w, 0.5 * w)
    peak = max(peak, abs(total) / w)
    edge = 0.5 * w
    converged = False
    while edge < spec.t_max:
        right = panel(edge, edge + w)
        left = panel(-edge - w, -edge)
        total += left + right
        peak = max(peak, abs(left) / w, abs(right) / w)
        edge += w
        tail = max(
            float(np.max(np.abs(integrand_t(np.array([edge]))))),
            float(np.max(np.abs(integrand_t(np.array([-edge]))))),
        )
        if tail <= spec.floor * max(peak, 1.0):
            converged = True
            break
    tail = max(
        float(np.abs(integrand_t(np.array([edge]))[0])),
        float(np.abs(integrand_t(np.array([-edge]))[0])),
    )
    # crude geometric-tail bound: value at the edge times a unit e-fold
    return QuadratureResult(
        value=total,
        half_width=edge,
        truncation_estimate=tail,
        converged=converged,
    )


def integrate_radial(
    integrand_r: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec = QuadratureSpec(),
) -> QuadratureResult:
    """Integrate g(r) dr over (0, infinity) via the substitution r = e^t."""

    def f(t: np.ndarray) -> np.ndarray:
        r = np.exp(t)
        return integrand_r(r) * r

    return integrate_log_line(f, spec)
