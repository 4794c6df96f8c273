"""Grids and fields for the symmetry-reduced problem on the (t, theta) strip.

The axially symmetric equation is posed in Emden-Fowler variables
w(t, theta) = e^{(N-2)t/2} u(e^t, theta), t = log r, where it becomes
autonomous:

    -w_tt - w_thth - (N-2) cot(theta) w_th + ((N-2)^2/4 - gamma) w
        = C_gamma |w|^{p_s-2} w.

Kelvin invariance of u is evenness of w in t, so a t-grid symmetric about 0
makes the Kelvin projection exact on nodes.  The polar-angle direction is
discretized in flux (divergence) form with the sin^{N-2}(theta) weight, which
builds in the Neumann pole conditions, reduces at the pole rows to the
regularized (N-1) w_thth limit operator, and is exactly self-adjoint in the
discrete weighted inner product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .closedforms import (
    mapped_dilation_kernel,
    mapped_radial_solution,
    mapped_singular_eigenfunction,
    zonal_harmonic,
)
from .params import ProblemParams, derive_constants


def default_half_width(p: ProblemParams) -> float:
    """Default t-truncation 25/((N-2) nu): the radial profile is below
    ~1e-12 at the boundary."""
    c = derive_constants(p)
    return 25.0 / ((p.N - 2) * c.nu)


class Grid2D:
    """Tensor grid: t uniform on [-T, T] (M_t nodes, odd so t=0 is a node),
    theta uniform on [0, pi] (M_theta nodes, odd so pi/2 is a node)."""

    def __init__(self, N: int, T: float, M_t: int, M_theta: int):
        if M_t < 5 or M_t % 2 == 0:
            raise ValueError(f"M_t must be odd and >= 5, got {M_t}")
        if M_theta < 5 or M_theta % 2 == 0:
            raise ValueError(f"M_theta must be odd and >= 5, got {M_theta}")
        if T <= 0:
            raise ValueError(f"T must be positive, got {T}")
        self.N = N
        self.T = float(T)
        self.M_t = M_t
        self.M_theta = M_theta
        # build t from integer offsets so t[i] == -t[M_t-1-i] exactly
        # (Kelvin evenness is then exact on nodes, not just to roundoff)
        half = (M_t - 1) // 2
        self.t = (np.arange(M_t) - half) * (T / half)
        self.theta = np.linspace(0.0, np.pi, M_theta)
        self.h_t = self.t[1] - self.t[0]
        self.h_theta = self.theta[1] - self.theta[0]
        # interface weights sin^{N-2} at half nodes; poles carry none
        half = self.theta[:-1] + 0.5 * self.h_theta
        self.flux = np.sin(half) ** (N - 2)
        self.cellint = self._cell_integrals()

    def _cell_integrals(self) -> np.ndarray:
        """Exact integral of sin^{N-2} over each control cell (half cells
        at the poles), by 16-point Gauss-Legendre per cell."""
        nodes, weights = np.polynomial.legendre.leggauss(16)
        lo = np.maximum(self.theta - 0.5 * self.h_theta, 0.0)
        hi = np.minimum(self.theta + 0.5 * self.h_theta, np.pi)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        return half * np.sum(weights[None, :] * np.sin(pts) ** (self.N - 2), axis=1)

    def refined(self) -> "Grid2D":
        """Grid with both spacings halved (same T)."""
        return Grid2D(self.N, self.T, 2 * self.M_t - 1, 2 * self.M_theta - 1)

    def coarsened(self) -> "Grid2D":
        """Grid with both spacings doubled (same T); needs (M-1) divisible by 2."""
        if (self.M_t - 1) % 2 or (self.M_theta - 1) % 2:
            raise ValueError("grid cannot be coarsened")
        return Grid2D(self.N, self.T, (self.M_t + 1) // 2, (self.M_theta + 1) // 2)

    def signature(self) -> tuple:
        return (self.N, round(self.T, 12), self.M_t, self.M_theta)

    def describe(self) -> dict:
        return {"N": self.N, "T": self.T, "M_t": self.M_t, "M_theta": self.M_theta}


def grid_for(p: ProblemParams, M_t: int = 801, M_theta: int = 129,
             T: float | None = None) -> Grid2D:
    return Grid2D(p.N, default_half_width(p) if T is None else T, M_t, M_theta)


@dataclass
class Field2D:
    """Values of w on a Grid2D with declared symmetries.

    kelvin_even: w(t, theta) = w(-t, theta)  (Kelvin invariance of u)
    theta_even:  w(t, theta) = w(t, pi - theta)  (evenness in x_N)
    """

    grid: Grid2D
    values: np.ndarray
    params: ProblemParams
    kelvin_even: bool = True
    theta_even: bool = False

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.M_t, self.grid.M_theta):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.M_t}, {self.grid.M_theta})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    # -- symmetry handling -------------------------------------------------

    def symmetry_violation(self) -> float:
        """Largest deviation from the declared symmetries (before projection)."""
        v = 0.0
        if self.kelvin_even:
            v = max(v, float(np.max(np.abs(self.values - self.values[::-1, :]))))
        if self.theta_even:
            v = max(v, float(np.max(np.abs(self.values - self.values[:, ::-1]))))
        return v

    def project_symmetry(self) -> "Field2D":
        """Average with the reflected copies so the flags hold exactly."""
        w = self.values
        if self.kelvin_even:
            w = 0.5 * (w + w[::-1, :])
        if self.theta_even:
            w = 0.5 * (w + w[:, ::-1])
        return replace(self, values=w)

    def kelvin(self) -> "Field2D":
        """Kelvin transform: reflection t -> -t in these variables."""
        return replace(self, values=self.values[::-1, :].copy())

    def theta_reflect(self) -> "Field2D":
        """The reflection theta -> pi - theta (exchanges the K1 cones)."""
        return replace(self, values=self.values[:, ::-1].copy())

    # -- diagnostics --------------------------------------------------------

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def boundary_decay(self) -> float:
        """max |w| on the two t-boundary rows."""
        return float(max(np.max(np.abs(self.values[0])), np.max(np.abs(self.values[-1]))))

    def sup_distance(self, other: "Field2D") -> float:
        if self.grid.signature() != other.grid.signature():
            raise ValueError("fields live on different grids")
        return float(np.max(np.abs(self.values - other.values)))

    def theta_average(self) -> np.ndarray:
        """Angular average with the sin^{N-2} cell weights (degree-0 part)."""
        w = self.grid.cellint
        return self.values @ w / np.sum(w)

    def angular_variation(self) -> float:
        """sup |w - theta-average|: zero exactly for radial fields."""
        return float(np.max(np.abs(self.values - self.theta_average()[:, None])))

    # -- serialization -------------------------------------------------------

    def save(self, path_base: str | Path) -> None:
        """Write <base>.npy (tensor) and <base>.json (header)."""
        base = Path(path_base)
        np.save(base.with_suffix(".npy"), self.values)
        header = {
            "params": {"N": self.params.N, "s": self.params.s, "gamma": self.params.gamma},
            "grid": self.grid.describe(),
            "kelvin_even": self.kelvin_even,
            "theta_even": self.theta_even,
            "tensor": base.with_suffix(".npy").name,
            "layout": "values[i_t, i_theta]; t uniform on [-T,T], theta uniform on [0,pi]",
        }
        base.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True))

    @staticmethod
    def load(path_base: str | Path) -> "Field2D":
        base = Path(path_base)
        header = json.loads(base.with_suffix(".json").read_text())
        values = np.load(base.with_suffix(".npy"))
        g = header["grid"]
        pp = header["params"]
        return Field2D(
            grid=Grid2D(g["N"], g["T"], g["M_t"], g["M_theta"]),
            values=values,
            params=ProblemParams(pp["N"], pp["s"], pp["gamma"]),
            kelvin_even=header["kelvin_even"],
            theta_even=header["theta_even"],
        )


# ---------------------------------------------------------------------------
# Emden-Fowler map and mapped closed forms
# ---------------------------------------------------------------------------


def emden_fowler_map(u_values: np.ndarray, t: np.ndarray, N: int) -> np.ndarray:
    """u(r, theta) samples -> w(t, theta) = e^{(N-2)t/2} u(e^t, theta).

    u_values may be 1D (radial samples at r = e^t) or 2D with t along the
    first axis.
    """
    u_values = np.asarray(u_values, dtype=float)
    scale = np.exp(0.5 * (N - 2) * np.asarray(t, dtype=float))
    if u_values.ndim == 1:
        return scale * u_values
    return scale[:, None] * u_values


def emden_fowler_unmap(w_values: np.ndarray, t: np.ndarray, N: int) -> np.ndarray:
    """Inverse of ``emden_fowler_map``."""
    w_values = np.asarray(w_values, dtype=float)
    scale = np.exp(-0.5 * (N - 2) * np.asarray(t, dtype=float))
    if w_values.ndim == 1:
        return scale * w_values
    return scale[:, None] * w_values


def radial_field(grid: Grid2D, p: ProblemParams, lam: float = 1.0) -> Field2D:
    """The exact mapped radial solution as a Field2D (dilation = translation
    in t, so lam != 1 breaks the Kelvin evenness flag)."""
    w1d = mapped_radial_solution(p)(grid.t + np.log(lam))
    vals = np.repeat(w1d[:, None], grid.M_theta, axis=1)
    return Field2D(grid, vals, p, kelvin_even=(lam == 1.0), theta_even=True)


def kernel_field(grid: Grid2D, p: ProblemParams, j: int) -> Field2D:
    """Mapped degeneracy kernel: psi1(t) * P_j(cos theta), Kelvin-even,
    theta-even exactly when j is even."""
    rad = mapped_singular_eigenfunction(p)(grid.t)
    ang = zonal_harmonic(p.N, j, grid.theta)
    return Field2D(
        grid,
        rad[:, None] * ang[None, :],
        p,
        kelvin_even=True,
        theta_even=(j % 2 == 0),
    )


def dilation_kernel_field(grid: Grid2D, p: ProblemParams) -> Field2D:
    """Mapped dilation kernel (odd in t: not Kelvin invariant)."""
    rad = mapped_dilation_kernel(p)(grid.t)
    vals = np.repeat(rad[:, None], grid.M_theta, axis=1)
    return Field2D(grid, vals, p, kelvin_even=False, theta_even=True)
