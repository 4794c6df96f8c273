import math

import numpy as np
import pytest

from hsbif.energy import (
    dirichlet_energy_extrapolated,
    dirichlet_lower_bound,
    energy_F,
    energy_report,
    equatorial_sphere_measure,
    nehari_project,
    sobolev_constant,
)
from hsbif.fields import Field2D, grid_for, radial_field
from hsbif.operators import radial_field_discrete
from hsbif.params import ProblemParams, derive_constants


def test_sphere_measures():
    assert equatorial_sphere_measure(3) == pytest.approx(2 * math.pi)
    assert equatorial_sphere_measure(4) == pytest.approx(4 * math.pi)


def test_sobolev_constant_n3():
    # S_3 = 3 (pi/2)^{4/3}
    assert sobolev_constant(3) == pytest.approx(3 * (math.pi / 2) ** (4 / 3), rel=1e-12)


def test_energy_zero_field():
    p = ProblemParams(3, 0.0, -0.2)
    g = grid_for(p, M_t=101, M_theta=17)
    w = Field2D(g, np.zeros((101, 17)), p)
    assert energy_F(w) == 0.0


def test_energy_oracles_at_radial_solution():
    # N=3, s=0 closed forms: quadratic = 3 pi^2 nu / 4, F = pi^2 nu / 4,
    # Hardy integral = 2 pi^2 / nu
    for gam in (0.0, -0.4):
        p = ProblemParams(3, 0.0, gam)
        c = derive_constants(p)
        g = grid_for(p, M_t=801, M_theta=17)
        rep = energy_report(radial_field_discrete(g, p))
        assert rep.quadratic == pytest.approx(3 * math.pi**2 * c.nu / 4, rel=2e-4)
        assert rep.F == pytest.approx(math.pi**2 * c.nu / 4, rel=2e-4)
        assert rep.hardy == pytest.approx(2 * math.pi**2 / c.nu, rel=5e-4)
        assert rep.dirichlet == pytest.approx(
            3 * math.pi**2 * c.nu / 4 + gam * 2 * math.pi**2 / c.nu, rel=5e-4
        )
        # the discrete radial solution sits on the discrete Nehari set
        assert rep.nehari_residual < 1e-9


def test_dirichlet_extrapolation_improves():
    p = ProblemParams(3, 0.0, 0.0)
    g = grid_for(p, M_t=401, M_theta=17)
    w = radial_field_discrete(g, p)
    exact = 3 * math.pi**2 / 4
    raw = energy_report(w).dirichlet
    extra = dirichlet_energy_extrapolated(w)
    assert abs(extra - exact) < abs(raw - exact)


def test_energy_lower_bound_sharp_at_sobolev_point():
    # at gamma=0, s=0 the bound equals the radial Dirichlet energy
    p = ProblemParams(3, 0.0, 0.0)
    assert dirichlet_lower_bound(p) == pytest.approx(3 * math.pi**2 / 4, rel=1e-12)
    # for gamma < 0 the radial solution sits strictly above the bound
    for gam in (-0.1, -0.5, -2.0):
        pg = ProblemParams(3, 0.0, gam)
        c = derive_constants(pg)
        dirichlet = 3 * math.pi**2 * c.nu / 4 + gam * 2 * math.pi**2 / c.nu
        assert dirichlet > dirichlet_lower_bound(pg)


def test_nehari_projection_examples():
    p = ProblemParams(3, 0.0, -0.3)
    g = grid_for(p, M_t=401, M_theta=33)
    w = radial_field_discrete(g, p)
    proj, c1 = nehari_project(w)
    assert c1 == pytest.approx(1.0, abs=1e-9)
    doubled = Field2D(g, 2.0 * w.values, p, theta_even=True)
    proj2, c2 = nehari_project(doubled)
    assert c2 == pytest.approx(0.5, rel=1e-9)
    assert proj2.sup_distance(w) < 1e-8
    rng = np.random.default_rng(4)
    bump = Field2D(
        g,
        np.abs(rng.normal(size=w.values.shape)) * w.values,
        p,
    ).project_symmetry()
    projected, _ = nehari_project(bump)
    assert energy_report(projected).nehari_residual <= 1e-10


def test_nehari_projection_rejects_zero():
    p = ProblemParams(3, 0.0, -0.3)
    g = grid_for(p, M_t=101, M_theta=17)
    with pytest.raises(ZeroDivisionError):
        nehari_project(Field2D(g, np.zeros((101, 17)), p))


def test_scaling_of_energy_along_ray():
    # F(c w) has a unique maximum in c > 0 exactly at the Nehari scaling
    p = ProblemParams(3, 0.0, -0.3)
    g = grid_for(p, M_t=201, M_theta=33)
    w = radial_field(g, p)
    half = Field2D(g, 0.7 * w.values, p)
    _, c_star = nehari_project(half)
    cs = np.linspace(0.2, 3.0, 61) * c_star
    vals = [energy_F(Field2D(g, cc * half.values, p)) for cc in cs]
    k_star = int(np.argmax(vals))
    assert cs[k_star] == pytest.approx(c_star, rel=0.06)
