import json
import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from hsbif.closedforms import (
    NormEquivalence,
    RadialKind,
    RadialProfile,
    eval_kernel_Zji,
    eval_radial,
    export_profile_csv,
    export_profile_json,
    is_log_symmetric,
    kelvin_radial,
    log_symmetric_grid,
    mapped_dilation_kernel,
    mapped_radial_solution,
    mapped_singular_eigenfunction,
    norm_equivalence_check,
    normalization_metadata,
    onedim_to_radial,
    radial_derivative,
    radial_to_onedim,
    residual_radial,
    zonal_harmonic,
)
from hsbif.params import ProblemParams, derive_constants, gamma_j

P334 = ProblemParams(3, 0.0, -0.75)


def exact_onedim_dirichlet(p: ProblemParams) -> float:
    """Independent oracle for the radial quadratic form (per unit sphere
    measure): (2-s) nu (q-2)^2 Gamma((q+2)/2) Gamma((q-2)/2) / (4 Gamma(q))."""
    c = derive_constants(p)
    q = c.q_s
    return (
        (2.0 - p.s)
        * c.nu
        * (q - 2.0) ** 2
        * gamma_fn((q + 2.0) / 2.0)
        * gamma_fn((q - 2.0) / 2.0)
        / (4.0 * gamma_fn(q))
    )


def test_eval_radial_examples():
    p = ProblemParams(4, 0.0, 0.0)
    assert eval_radial(RadialKind.U_GAMMA, p, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert eval_radial(RadialKind.Z_GAMMA, P334, 1.0) == pytest.approx(0.0, abs=1e-16)
    # near-origin power law r^{(N-2)(nu-1)/2}: nu=2 at gamma=-0.75, N=3
    r = np.array([1e-6, 1e-8])
    vals = eval_radial(RadialKind.U_GAMMA, P334, r)
    assert vals == pytest.approx(np.sqrt(r), rel=1e-5)


def test_eval_radial_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        eval_radial(RadialKind.U_GAMMA, P334, 0.0)
    with pytest.raises(ValueError):
        eval_radial(RadialKind.U_GAMMA, P334, np.array([1.0, -2.0]))


def test_dilate_matches_scaling_law():
    p = ProblemParams(4, 0.5, -1.0)
    r = np.linspace(0.2, 4.0, 17)
    lam = 1.7
    direct = eval_radial(RadialKind.U_GAMMA_LAMBDA, p, r, lam=lam)
    scaled = lam ** ((p.N - 2) / 2) * eval_radial(RadialKind.U_GAMMA, p, lam * r)
    assert direct == pytest.approx(scaled, rel=1e-14)


@pytest.mark.parametrize(
    "kind",
    [RadialKind.U_GAMMA, RadialKind.Z_GAMMA, RadialKind.PSI1_RAD,
     RadialKind.V_ONEDIM, RadialKind.W_SINGULAR],
)
def test_analytic_derivatives_match_finite_differences(kind):
    p = ProblemParams(4, 0.5, -1.2)
    r = np.linspace(0.3, 3.0, 11)
    h = 1e-6
    fd = (eval_radial(kind, p, r + h) - eval_radial(kind, p, r - h)) / (2 * h)
    assert radial_derivative(kind, p, r) == pytest.approx(fd, rel=1e-8, abs=1e-10)


def test_kelvin_identities_machine_precision():
    r = log_symmetric_grid(12.0, 801)
    assert is_log_symmetric(r)
    for p in (P334, ProblemParams(4, 1.0, -2.0)):
        U = eval_radial(RadialKind.U_GAMMA, p, r)
        Z = eval_radial(RadialKind.Z_GAMMA, p, r)
        assert np.max(np.abs(kelvin_radial(p.N, r, U) - U)) < 1e-13 * np.max(U)
        assert np.max(np.abs(kelvin_radial(p.N, r, Z) + Z)) < 1e-13 * np.max(np.abs(Z))


def test_kelvin_is_involution_on_arbitrary_samples():
    r = log_symmetric_grid(8.0, 257)
    rng = np.random.default_rng(7)
    f = rng.normal(size=r.size)
    back = kelvin_radial(3, r, kelvin_radial(3, r, f))
    assert back == pytest.approx(f, rel=1e-12, abs=1e-12)


def test_kelvin_rejects_asymmetric_grid():
    with pytest.raises(ValueError):
        kelvin_radial(3, np.linspace(0.5, 2.0, 10), np.zeros(10))


def test_kelvin_fixed_point_unique_in_dilation_family():
    r = log_symmetric_grid(10.0, 401)
    p = ProblemParams(3, 0.5, -0.4)
    for lam, expect_zero in ((0.5, False), (1.0, True), (2.0, False)):
        U = eval_radial(RadialKind.U_GAMMA_LAMBDA, p, r, lam=lam)
        dev = np.max(np.abs(kelvin_radial(p.N, r, U) - U)) / np.max(U)
        if expect_zero:
            assert dev < 1e-13
        else:
            assert dev > 1e-3


def test_radial_to_onedim_sends_U_to_V_and_back():
    for p in (P334, ProblemParams(5, 1.3, -2.0)):
        u = RadialProfile(RadialKind.U_GAMMA, p)
        v = radial_to_onedim(u, p)
        r = np.linspace(0.05, 6.0, 121)
        assert v(r) == pytest.approx(
            eval_radial(RadialKind.V_ONEDIM, p, r), rel=1e-13
        )
        u_back = onedim_to_radial(v, p)
        assert u_back(r) == pytest.approx(u(r), rel=1e-13)


def test_onedim_map_is_identity_at_gamma0_s0():
    p = ProblemParams(3, 0.0, 0.0)
    rng = np.random.default_rng(3)
    samples = rng.uniform(0.2, 4.0, size=20)
    u = RadialProfile(RadialKind.PSI1_RAD, p)
    v = radial_to_onedim(u, p)
    assert v(samples) == pytest.approx(u(samples), rel=1e-14)


def test_norm_equivalence_against_beta_function_oracle():
    for p in (
        ProblemParams(3, 0.0, 0.0),
        ProblemParams(4, 0.5, -1.0),
        ProblemParams(3, 0.0, -0.75),
    ):
        ne = norm_equivalence_check(RadialProfile(RadialKind.U_GAMMA, p), p)
        assert isinstance(ne, NormEquivalence)
        assert ne.relative_gap <= 1e-8
        assert ne.lhs == pytest.approx(exact_onedim_dirichlet(p), rel=1e-10)


def test_norm_equivalence_zero_profile():
    p = ProblemParams(3, 0.0, 0.0)

    class Zero:
        params = p

        def __call__(self, r):
            return np.zeros_like(np.asarray(r, dtype=float))

        derivative = __call__

    ne = norm_equivalence_check(Zero(), p)
    assert ne.lhs == 0.0 and ne.rhs == 0.0 and ne.relative_gap == 0.0


def test_residual_radial_second_order():
    # two-grid ratio approx 4 for a spread of parameter tuples
    for (N, s, g) in [(3, 0.0, 0.0), (4, 1.0, -2.0), (5, 0.7, -3.0)]:
        p = ProblemParams(N, s, g)
        r1 = residual_radial(p, h=2e-3)
        r2 = residual_radial(p, h=1e-3)
        assert 3.2 < r1 / r2 < 4.8
    assert residual_radial(ProblemParams(4, 1.0, -2.0), h=1e-3) <= 1e-6


def test_residual_radial_dilation_translates():
    p = ProblemParams(3, 0.0, -0.3)
    assert residual_radial(p, lam=2.0, h=1e-3) == pytest.approx(
        residual_radial(p, lam=1.0, h=1e-3), rel=0.3
    )


def test_zonal_harmonics_low_degree():
    th = np.linspace(0.0, np.pi, 33)
    for N in (3, 4, 5, 7):
        assert zonal_harmonic(N, 0, th) == pytest.approx(np.ones_like(th))
        assert zonal_harmonic(N, 1, th) == pytest.approx(
            0.5 * (N - 1) * np.cos(th), rel=1e-13, abs=1e-13
        )
        # degree-2 zonal harmonic vanishes where cos^2(theta) = 1/N
        root = math.acos(1.0 / math.sqrt(N))
        assert abs(zonal_harmonic(N, 2, root)) < 1e-13


def test_kernel_function_values():
    N, s = 3, 0.0
    for j in (1, 2):
        p = ProblemParams(N, s, gamma_j(N, s, j))
        if j == 1:
            assert eval_kernel_Zji(p, j, 1.0, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
            plus = eval_kernel_Zji(p, j, 0.7, 0.0)
            minus = eval_kernel_Zji(p, j, 0.7, math.pi)
            assert plus == pytest.approx(-minus, rel=1e-13)
        else:
            root = math.acos(1.0 / math.sqrt(N))
            assert abs(eval_kernel_Zji(p, j, 0.9, root)) < 1e-14


def test_kernel_function_guards_gamma():
    with pytest.raises(ValueError):
        eval_kernel_Zji(ProblemParams(3, 0.0, -0.1), 1, 1.0, 0.3)


def test_mapped_profiles_match_direct_map():
    p = ProblemParams(4, 1.0, -2.0)
    t = np.linspace(-6, 6, 101)
    r = np.exp(t)
    w = mapped_radial_solution(p)(t)
    assert w == pytest.approx(
        r ** ((p.N - 2) / 2) * eval_radial(RadialKind.U_GAMMA, p, r), rel=1e-12
    )
    weig = mapped_singular_eigenfunction(p)(t)
    assert weig == pytest.approx(
        r ** ((p.N - 2) / 2) * eval_radial(RadialKind.PSI1_RAD, p, r), rel=1e-12
    )
    wz = mapped_dilation_kernel(p)(t)
    assert wz == pytest.approx(
        r ** ((p.N - 2) / 2) * eval_radial(RadialKind.Z_GAMMA, p, r),
        rel=1e-12, abs=1e-12,
    )
    # mapped radial value at t=0 and parity checks
    assert mapped_radial_solution(p)(0.0) == pytest.approx(
        2.0 ** (-(p.N - 2) / (2 - p.s))
    )
    assert np.max(np.abs(w - w[::-1])) < 1e-15
    assert np.max(np.abs(wz + wz[::-1])) < 1e-15


def test_mapped_radial_gamma0_s0_n4_is_sech():
    p = ProblemParams(4, 0.0, 0.0)
    t = np.linspace(-4, 4, 41)
    assert mapped_radial_solution(p)(t) == pytest.approx(
        1.0 / (2.0 * np.cosh(t)), rel=1e-14
    )


def test_exports(tmp_path):
    p = ProblemParams(3, 0.5, -0.4)
    prof = RadialProfile(RadialKind.U_GAMMA, p)
    r = log_symmetric_grid(4.0, 33)
    csv_path = tmp_path / "profile.csv"
    export_profile_csv(csv_path, r, prof(r))
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "r,value"
    assert len(lines) == 34
    json_path = tmp_path / "profile.json"
    export_profile_json(json_path, prof, r)
    rec = json.loads(json_path.read_text())
    assert rec["params"] == {"N": 3, "s": 0.5, "gamma": -0.4}
    assert "unit_forcing_scale_cfac" in rec["normalization"]
    meta = normalization_metadata(p)
    c = derive_constants(p)
    assert meta["unit_forcing_scale_cfac"] ** (2 * (c.p_s - 1)) * c.C_gamma == pytest.approx(1.0)
