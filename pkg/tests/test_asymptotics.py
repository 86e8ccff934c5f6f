import numpy as np
import pytest

from helmres.asymptotics import (ExpansionError, expand_case1, expand_case2,
                                 expand_case3, expand_case4, expand_case4_zero)
from helmres.operators import reference_operators

from oracles import (CASE3_K1_BALL, CASE4_K1, CASE4_PAIRING,
                     CASE4_ZERO_K1_BALL, NEUMANN_NU1, NEWTON_TOP_EIGENVALUE,
                     NEWTON_TOP_ONE_E_SQ)


# ---------------------------------------------------------------------------
# case 1
# ---------------------------------------------------------------------------

def test_case1_pure_velocity_reduction(scene_prod):
    # v = 1, v1 = rho1 = 0: the expansion is purely imaginary and matches
    # the radial-oracle closed form -i <1,e>^2 / (8 pi lambda^2)
    ex = expand_case1(scene_prod(case=1, v2=1.0))
    lam = ex.intermediates["lambda"]
    assert abs(lam - NEWTON_TOP_EIGENVALUE) < 0.01 * NEWTON_TOP_EIGENVALUE
    assert abs(ex.kappa0 - np.pi / 2) < 0.01 * np.pi / 2
    assert ex.kappa1_plus.real == 0.0
    predicted = -ex.intermediates["one_e_sq"] / (8 * np.pi * lam ** 2)
    assert np.isclose(ex.kappa1_plus.imag, predicted)
    # the continuum value is exactly -1 on the unit ball
    assert abs(ex.kappa1_plus.imag + 1.0) < 0.02
    assert abs(ex.intermediates["one_e_sq"] - NEWTON_TOP_ONE_E_SQ) \
        < 0.01 * NEWTON_TOP_ONE_E_SQ


def test_case1_rho1_flips_only_trace_term(scene_small):
    base = expand_case1(scene_small(case=1, v2=1.5, v12=0.3, rho1=0.4))
    flip = expand_case1(scene_small(case=1, v2=1.5, v12=0.3, rho1=-0.4))
    # imaginary part unchanged, the rho1 contribution negates
    assert np.isclose(base.kappa1_plus.imag, flip.kappa1_plus.imag)
    v, lam = np.sqrt(1.5), base.intermediates["lambda"]
    trace_term = 0.5 * 0.4 * v * np.sqrt(lam) * base.intermediates["trace_pair"]
    assert np.isclose(flip.kappa1_plus.real - base.kappa1_plus.real,
                      2 * trace_term)


def test_case1_real_scalar_products(scene_small):
    ex = expand_case1(scene_small(case=1, v2=1.0))
    # kappa = 0 blocks are real, so the pairings carry no imaginary part
    assert np.isrealobj(ex.intermediates["gamma0_e"])
    assert np.isrealobj(ex.intermediates["gamma1_e"])


def test_case1_branch_antisymmetry(scene_small):
    ex = expand_case1(scene_small(case=1, v2=1.3, v12=0.2, rho1=0.1))
    assert np.isclose(ex.kappa1_plus.real, -ex.kappa1_minus.real)
    assert np.isclose(ex.kappa1_plus.imag, ex.kappa1_minus.imag)
    assert ex.kappa1_plus.imag <= 0


# ---------------------------------------------------------------------------
# case 2
# ---------------------------------------------------------------------------

def test_case2_unit_ball_values(scene_prod):
    ex = expand_case2(scene_prod(case=2, rho=1.0))
    assert abs(ex.kappa0 - np.sqrt(3)) < 0.01 * np.sqrt(3)
    assert abs(ex.kappa1_plus.real) < 1e-12
    assert abs(ex.kappa1_plus.imag + 1.5) < 0.03 * 1.5


def test_case2_rho_powers(scene_small):
    base = expand_case2(scene_small(case=2, rho=1.0))
    four = expand_case2(scene_small(case=2, rho=4.0))
    assert np.isclose(four.kappa0, 2.0 * base.kappa0)
    assert np.isclose(four.kappa1_plus.imag, 4.0 * base.kappa1_plus.imag)


def test_case2_v12_shifts_real_only(scene_small):
    base = expand_case2(scene_small(case=2, rho=2.0))
    bump = expand_case2(scene_small(case=2, rho=2.0, v12=0.6))
    assert np.isclose(bump.kappa1_plus.imag, base.kappa1_plus.imag)
    assert np.isclose(bump.kappa1_plus.real - base.kappa1_plus.real,
                      0.5 * 0.6 * base.kappa0)


# ---------------------------------------------------------------------------
# case 3
# ---------------------------------------------------------------------------

def test_case3_matches_exact_sphere_expansion(scene_prod):
    ex = expand_case3(scene_prod(case=3, v2=1.0, rho=1.0))
    assert abs(ex.kappa1_plus - CASE3_K1_BALL) < 0.03 * abs(CASE3_K1_BALL)


def test_case3_kappa0_consistency(scene_small):
    # kappa0 of the balanced case is v times the soft-density kappa0
    sc2 = scene_small(case=2, rho=2.5)
    sc3 = scene_small(case=3, v2=1.7, rho=2.5)
    k2 = expand_case2(sc2).kappa0
    k3 = expand_case3(sc3).kappa0
    assert abs(k3 - np.sqrt(1.7) * k2) < 1e-12 * k3


def test_case3_first_order_solve_residual(scene_small):
    # the returned (kappa1, u1, phi1) solve the bordered derivative system
    scene = scene_small(case=3, v2=1.2, rho=0.8, rho1=0.3, v12=0.1)
    ex = expand_case3(scene)
    refs = reference_operators(scene)
    md = refs.minnaert()
    v2 = 1.2
    rho = 0.8
    kappa0 = ex.kappa0
    u0 = ex.intermediates["u_ring"]
    phi0 = ex.intermediates["phi_ring"]
    for branch, k1, u1, phi1, rhs_u, rhs_phi in (
        (+1, ex.kappa1_plus, ex.intermediates["u1_plus"],
         ex.intermediates["phi1_plus"], ex.intermediates["rhs_u_plus"],
         ex.intermediates["rhs_phi_plus"]),
        (-1, ex.kappa1_minus, ex.intermediates["u1_minus"],
         ex.intermediates["phi1_minus"], ex.intermediates["rhs_u_minus"],
         ex.intermediates["rhs_phi_minus"]),
    ):
        kc = branch * kappa0
        # volume row: -2 kc k1 (1SL P phi0) + v^2 u1 - kc^2 1SL P phi1
        slp0 = refs.oneSL0 @ (refs.Pstar @ phi0)
        slp1 = refs.oneSL0 @ (refs.Pstar @ phi1)
        row_u = -2.0 * kc * k1 * slp0 + v2 * u1 - kappa0 ** 2 * slp1
        res_u = np.linalg.norm(row_u - rhs_u) / np.linalg.norm(rhs_u)
        # boundary row: g1N u1 + (1/2 + K*)_perp phi1 + rho P phi1
        half = 0.5 * np.eye(scene.surface.n) + refs.Kstar0
        row_phi = (refs.g1N0 @ u1
                   + refs.Pperp @ half @ (refs.Pperp @ phi1)
                   + rho * (refs.Pstar @ phi1))
        res_phi = np.linalg.norm(row_phi - rhs_phi) / np.linalg.norm(rhs_phi)
        assert res_u < 1e-8
        assert res_phi < 1e-8


def test_case3_linear_in_rho1(scene_small):
    vals = []
    for rho1 in (-0.4, 0.0, 0.4):
        ex = expand_case3(scene_small(case=3, v2=1.0, rho=1.0, rho1=rho1))
        vals.append(ex.kappa1_plus)
    # affine dependence: second difference vanishes
    assert abs(vals[0] + vals[2] - 2 * vals[1]) < 1e-10
    slope_central = (vals[2] - vals[0]) / 0.8
    slope_forward = (vals[2] - vals[1]) / 0.4
    assert abs(slope_central - slope_forward) < 1e-10


def test_case3_sweep_cross_validation(scene_prod):
    from helmres.finder import sweep
    scene = scene_prod(case=3, v2=1.0, rho=1.0)
    # compare against the exact-sphere expansion values; the per-scale gap
    # bottoms out at the volume-quadrature floor of the pencil
    model = lambda e: np.sqrt(3) + CASE3_K1_BALL * e
    rows, slope = sweep([0.08, 0.04, 0.02], 3, scene, asym=model)
    gaps = [abs(r.kappa - model(r.eps)) for r in rows]
    assert gaps[0] > gaps[-1]
    assert all(g < 5.5e-3 for g in gaps)


# ---------------------------------------------------------------------------
# case 4 and the square-root branch
# ---------------------------------------------------------------------------

def test_case4_first_mode(scene_prod):
    ex = expand_case4(scene_prod(case=4, v2=1.0, rho=1.0))
    nu = ex.intermediates["nu"]
    assert abs(nu - NEUMANN_NU1) < 0.02 * NEUMANN_NU1
    assert abs(ex.intermediates["trace_pairing"] - CASE4_PAIRING) \
        < 0.03 * CASE4_PAIRING
    assert abs(ex.kappa1_plus - CASE4_K1) < 0.03 * CASE4_K1
    assert np.isclose(ex.kappa1_minus, -ex.kappa1_plus)


def test_case4_v12_structure(scene_small):
    base = expand_case4(scene_small(case=4, v2=1.0, rho=1.0))
    bump = expand_case4(scene_small(case=4, v2=1.0, rho=1.0, v12=0.5))
    nu = base.intermediates["nu"]
    assert np.isclose(bump.kappa1_plus - base.kappa1_plus,
                      -0.5 * np.sqrt(nu) * 0.5)


def test_case4_zero_unit_ball(scene_prod):
    ex = expand_case4_zero(scene_prod(case=4, v2=1.0, rho=1.0))
    assert ex.sqrt_eps_branch
    assert abs(ex.kappa0 - np.sqrt(3)) < 0.01 * np.sqrt(3)
    assert abs(ex.kappa1_relative - CASE4_ZERO_K1_BALL) \
        < 0.1 * abs(CASE4_ZERO_K1_BALL)
    # the eps-slope of the kernel pair: interior part is the constant
    # rho c0 c_Omega / (|Omega| + v^4 c_Omega) = 3/4 on the unit ball
    assert abs(ex.intermediates["de_u0_scale"] - 0.75) < 0.01


def test_case4_zero_c0_invariance(scene_small):
    a = expand_case4_zero(scene_small(case=4, v2=1.0, rho=1.0), c0=1.0)
    b = expand_case4_zero(scene_small(case=4, v2=1.0, rho=1.0), c0=2.5)
    assert abs(a.kappa1_relative - b.kappa1_relative) < 1e-10


def test_case4_zero_linear_in_rho(scene_small):
    a = expand_case4_zero(scene_small(case=4, v2=1.0, rho=1.0))
    b = expand_case4_zero(scene_small(case=4, v2=1.0, rho=2.0))
    assert abs(b.kappa1_relative - 2.0 * a.kappa1_relative) \
        < 1e-8 * abs(a.kappa1_relative)


def test_case4_zero_speed_dependence(scene_small):
    # d/dt of the kernel-pair eps-slope in t = v^4 has the closed form
    # -rho c0 c_Om^2 / (|Om| + t c_Om)^2; check by central difference over
    # the assembled quantity
    scene = scene_small(case=4, v2=1.0, rho=1.0)
    refs = reference_operators(scene)
    md = refs.minnaert()

    def de_u0_scale(v2):
        sc = scene_small(case=4, v2=v2, rho=1.0)
        return expand_case4_zero(sc).intermediates["de_u0_scale"]

    d = 1e-4
    fd = (de_u0_scale(np.sqrt(1.0 + d)) - de_u0_scale(np.sqrt(1.0 - d))) \
        / (2 * d)
    exact = -md.c_omega ** 2 / (md.volume + md.c_omega) ** 2
    assert abs(fd - exact) < 1e-5 * abs(exact)


def test_case_gate(scene_small):
    with pytest.raises(ExpansionError):
        expand_case1(scene_small(case=2, rho=1.0))
    with pytest.raises(ExpansionError):
        expand_case4_zero(scene_small(case=3, v2=1.0, rho=1.0))
