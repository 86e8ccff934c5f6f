import numpy as np
import pytest

from helmres.geometry import Material, Scene, SurfaceQuadrature, VolumeQuadrature
from helmres.kernels import SeriesKind
from helmres.operators import (ReferenceOperators, assemble, assemble_series,
                               minnaert, neumann_eigenpairs, newton_spectrum,
                               projector, reference_operators)

from oracles import (NEUMANN_NU1, NEWTON_TOP_EIGENVALUE, radial_newton_modes)


@pytest.fixture(scope="module")
def refs642(sphere642, ball1000):
    return ReferenceOperators(sphere642, ball1000)


@pytest.fixture(scope="module")
def refs1212(sphere1212, ball1000):
    return ReferenceOperators(sphere1212, ball1000)


def test_single_layer_unit_density(refs1212):
    one = np.ones(refs1212.surface.n)
    assert np.abs(refs1212.S0 @ one - 1.0).max() < 5e-3


def test_gauss_identity_exact(refs642):
    one = np.ones(refs642.surface.n)
    assert np.abs(refs642.K0 @ one + 0.5).max() < 1e-12
    # weighted-column identity of the adjoint trace
    w = refs642.ws
    assert np.abs(w @ refs642.Kstar0 + 0.5 * w).max() < 1e-12


def test_calderon_identity(refs642):
    num = np.linalg.norm(refs642.S0 @ refs642.Kstar0
                         - refs642.K0 @ refs642.S0, 2)
    den = np.linalg.norm(refs642.S0, 2) * np.linalg.norm(refs642.K0, 2)
    assert num < 0.01 * den


def test_double_layer_spectrum_range(refs642):
    eig = np.linalg.eigvals(refs642.K0)
    assert np.abs(eig.imag).max() < 1e-8
    assert eig.real.min() > -0.55
    assert eig.real.max() < 0.55


def test_symmetrized_blocks_spd(refs642):
    d = np.sqrt(refs642.ws)
    s_sym = refs642.S0 * (d[:, None] / d[None, :])
    assert np.linalg.norm(s_sym - s_sym.T, 2) < 1e-10 * np.linalg.norm(s_sym, 2)
    assert np.linalg.eigvalsh(0.5 * (s_sym + s_sym.T)).min() > 0
    d = np.sqrt(refs642.wv)
    n_sym = refs642.N0 * (d[:, None] / d[None, :])
    assert np.linalg.norm(n_sym - n_sym.T, 2) < 1e-10 * np.linalg.norm(n_sym, 2)
    lam = np.linalg.eigvalsh(0.5 * (n_sym + n_sym.T))
    # positivity holds to discretization level: the deep tail of the compact
    # operator may dip slightly negative at quadrature-noise size
    assert lam.max() > 0.4
    assert lam.min() > -1e-3 * lam.max()
    assert np.all(lam[len(lam) // 2:] > 0)


def test_minnaert_unit_ball(scene_prod, sphere1212, ball1000):
    md = minnaert(scene_prod(case="fixed"))
    assert abs(md.omega_m2 - 3.0) < 0.01 * 3.0
    assert md.c_omega > 0
    assert np.all(md.psi > 0)
    fine = Scene(surface=sphere1212, volume=ball1000, material=Material())
    md2 = minnaert(fine)
    assert abs(md2.omega_m2 - 3.0) < abs(md.omega_m2 - 3.0)


def test_minnaert_radius_scaling(sphere642, ball1000):
    r = 2.0
    surf = SurfaceQuadrature(nodes=r * sphere642.nodes,
                             normals=sphere642.normals,
                             weights=r * r * sphere642.weights)
    vol = VolumeQuadrature(nodes=r * ball1000.nodes,
                           weights=r ** 3 * ball1000.weights)
    md = minnaert(Scene(surface=surf, volume=vol, material=Material()))
    assert abs(md.omega_m2 - 3.0 / r ** 2) < 0.01 * 3.0 / r ** 2


def test_newton_spectrum_against_radial_oracle(sphere642, ball2000):
    scene = Scene(surface=sphere642, volume=ball2000, material=Material())
    sp = newton_spectrum(scene, 5)
    assert abs(sp.eigenvalues[0] - NEWTON_TOP_EIGENVALUE) \
        < 0.01 * NEWTON_TOP_EIGENVALUE
    assert np.all(sp.eigenvalues > 0)
    assert np.all(np.diff(sp.eigenvalues) <= 1e-14)
    assert np.all(sp.residuals < 1e-8)
    # the leading mode is radial: its angular variance over radial shells
    # stays below 2 percent of its size
    e = sp.eigenvectors[:, 0]
    r = np.linalg.norm(ball2000.nodes, axis=1)
    var = 0.0
    for rv in np.unique(np.round(r, 9)):
        sel = np.abs(r - rv) < 1e-9
        var = max(var, float(np.std(e[sel]) / np.abs(e).max()))
    assert var < 0.02


def test_neumann_eigenpairs_unit_ball(sphere642, ball2000):
    scene = Scene(surface=sphere642, volume=ball2000, material=Material())
    pairs = neumann_eigenpairs(scene, 4)
    assert abs(pairs[0].nu - NEUMANN_NU1) < 0.02 * NEUMANN_NU1
    for p in pairs:
        assert abs(np.sum(ball2000.weights * p.u)) < 1e-10
        assert abs(np.sum(ball2000.weights * p.u ** 2) - 1.0) < 1e-10
        assert p.residual < 1e-8


def test_projectors(scene_prod):
    scene = scene_prod(case="fixed")
    refs = reference_operators(scene)
    p = projector("Pstar", scene).entries
    assert np.linalg.norm(p @ p - p, 2) < 1e-10
    psi = refs.psi
    assert np.allclose(p @ psi, psi, atol=1e-10 * np.abs(psi).max())
    p0 = projector("P0", scene).entries
    assert np.linalg.norm(p0 @ p0 - p0, 2) < 1e-10
    one = np.ones(scene.surface.n)
    assert np.allclose(p0 @ one, one, atol=1e-10)
    pperp = projector("Pperp", scene).entries
    assert np.allclose(pperp, np.eye(scene.surface.n) - p)
    # the constant mode annihilates the half-plus-trace block both ways
    half = 0.5 * np.eye(scene.surface.n) + refs.Kstar0
    assert np.linalg.norm(p @ half @ p, 2) \
        < 1e-12 * np.linalg.norm(refs.Kstar0, 2)


def test_series_identities(refs642):
    md = refs642.minnaert()
    p = refs642.Pstar
    pn = np.linalg.norm(p, 2)
    r2 = np.linalg.norm(p @ refs642.K2s @ p + p / md.omega_m2, 2)
    assert r2 < 0.02 * pn
    r3 = np.linalg.norm(p @ refs642.K3s @ p
                        - 1j * md.volume / (4 * np.pi) * p, 2)
    assert r3 < 0.02 * pn


def test_series_rank_one_blocks(scene_small):
    scene = scene_small(case="fixed")
    n1 = assemble_series(SeriesKind.N1, scene).entries
    expect = 0.25j / np.pi * np.outer(np.ones(scene.volume.n),
                                      scene.volume.weights)
    assert np.allclose(n1, expect)
    sl1 = assemble_series(SeriesKind.SL1, scene).entries
    expect = 0.25j / np.pi * np.outer(np.ones(scene.volume.n),
                                      scene.surface.weights)
    assert np.allclose(sl1, expect)


def test_assemble_spaces_and_kinds(scene_small):
    scene = scene_small(case="fixed")
    blk = assemble("N", 0.3, scene)
    assert blk.row_space == ("vol", 0) and blk.col_space == ("vol", 0)
    assert blk.shape == (scene.volume.n, scene.volume.n)
    blk = assemble("g1SL", 0.0, scene)
    assert blk.shape == (scene.surface.n, scene.surface.n)
    with pytest.raises(Exception):
        assemble("bogus", 0.0, scene)


def test_newton_top_eigenvalue_radial_oracle_self_check():
    modes = radial_newton_modes(n=1200, k=2)
    assert abs(modes[0][0] - NEWTON_TOP_EIGENVALUE) < 1e-6
    assert abs(modes[0][1] ** 2 - 128.0 / np.pi ** 3) < 1e-5
