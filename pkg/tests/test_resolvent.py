import numpy as np
import pytest

from helmres.geometry import Material, Scene
from helmres.resolvent import (GaussianSource, ProbeError,
                               apply_resolvent_difference, check_transmission,
                               pseudo_resolvent_residual, total_field)


SRC = GaussianSource(center=(3.0, 0.5, 0.2), width=0.3)
EVAL_PTS = np.array([[0.5, 2.5, 0.3], [-1.5, 1.0, 2.0], [2.0, -2.0, 1.0]])


def test_requires_upper_half_plane(scene_small):
    scene = scene_small(case="fixed", v2=2.0, rho=1.0)
    with pytest.raises(ProbeError):
        apply_resolvent_difference(1.0 - 0.2j, SRC, EVAL_PTS, scene)


def test_free_scene_zero_difference(scene_small):
    scene = scene_small(case="fixed", v2=1.0, rho=1.0)
    probe = apply_resolvent_difference(1.5j, SRC, EVAL_PTS, scene)
    assert np.abs(probe.values).max() == 0.0


def test_full_vs_volume_reduced(scene_small):
    scene = scene_small(case="fixed", v2=2.5, rho=1.0)
    full = apply_resolvent_difference(1.5j, SRC, EVAL_PTS, scene)
    red = apply_resolvent_difference(1.5j, SRC, EVAL_PTS, scene,
                                     reduced="volume")
    assert np.abs(full.values - red.values).max() \
        < 1e-10 * np.abs(full.values).max()


def test_full_vs_surface_reduced(scene_small):
    scene = scene_small(case="fixed", v2=1.0, rho=4.0)
    full = apply_resolvent_difference(1.5j, SRC, EVAL_PTS, scene)
    red = apply_resolvent_difference(1.5j, SRC, EVAL_PTS, scene,
                                     reduced="surface")
    assert np.abs(full.values - red.values).max() \
        < 1e-10 * np.abs(full.values).max()


def test_pseudo_resolvent_identity(scene_small):
    scene = scene_small(case="fixed", v2=2.0, rho=3.0)
    res = pseudo_resolvent_residual(scene, 2.0j, 1.5j, SRC, EVAL_PTS,
                                    grid_n=10)
    assert res < 1e-6


def test_pseudo_resolvent_identity_off_axis_kappas(scene_small):
    scene = scene_small(case="fixed", v2=0.5, rho=2.0)
    res = pseudo_resolvent_residual(scene, 0.7 + 1.8j, -0.4 + 1.3j, SRC,
                                    EVAL_PTS, grid_n=8)
    assert res < 1e-6


def test_field_analytic_in_kappa(scene_small):
    # second differences of the field along a segment in the upper half
    # plane stay bounded (smooth kappa dependence)
    scene = scene_small(case="fixed", v2=2.0, rho=3.0)
    h = 0.05
    vals = [apply_resolvent_difference(1.5j + t * h, SRC, EVAL_PTS, scene).values
            for t in (-1.0, 0.0, 1.0)]
    second = np.abs(vals[0] - 2 * vals[1] + vals[2]) / h ** 2
    scale = np.abs(vals[1]).max()
    assert np.all(second < 50.0 * scale)


def test_transmission_free_scene_noise_level(scene_prod):
    scene = scene_prod(case="fixed", v2=1.0, rho=1.0)
    dj, nm = check_transmission(1.2j, SRC, scene)
    assert dj < 2e-3
    assert nm < 2e-2


def test_transmission_density_jump(scene_prod):
    scene = scene_prod(case="fixed", v2=1.0, rho=4.0)
    dj, nm = check_transmission(1.2j, SRC, scene)
    assert dj < 0.02
    # the one-sided derivative probe is limited by the near-field fidelity
    # of the cell-charge layer model; the mismatch decreases under
    # refinement (see the refinement test below)
    assert nm < 0.2


@pytest.mark.slow
def test_transmission_refinement(scene_prod, sphere1212, ball1000):
    coarse = scene_prod(case="fixed", v2=1.0, rho=4.0)
    fine = Scene(surface=sphere1212, volume=ball1000,
                 material=Material(case="fixed", v2=1.0, rho=4.0))
    dj_c, nm_c = check_transmission(1.2j, SRC, coarse)
    dj_f, nm_f = check_transmission(1.2j, SRC, fine)
    assert dj_f < dj_c or dj_f < 1e-3
    assert nm_f < nm_c


def test_two_inclusion_coupling_decays(sphere162, ball300):
    # the two-sphere field differs from the superposition of single-sphere
    # fields by a coupling that decays with separation
    kappa = 1.5j
    mat = Material(case="fixed", v2=2.0, rho=1.0)
    gaps = []
    for sep in (2.5, 4.0, 6.0):
        centers = np.array([[0.0, 0.0, 0.0], [sep, 0.0, 0.0]])
        pair = Scene(surface=sphere162, volume=ball300, centers=centers,
                     material=mat)
        both = apply_resolvent_difference(kappa, SRC, EVAL_PTS, pair)
        s1 = apply_resolvent_difference(
            kappa, SRC, EVAL_PTS,
            Scene(surface=sphere162, volume=ball300,
                  centers=np.array([[0.0, 0.0, 0.0]]), material=mat))
        s2 = apply_resolvent_difference(
            kappa, SRC, EVAL_PTS,
            Scene(surface=sphere162, volume=ball300,
                  centers=np.array([[sep, 0.0, 0.0]]), material=mat))
        gaps.append(np.abs(both.values - s1.values - s2.values).max())
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[0] > 0


def test_total_field_sanity(scene_small):
    scene = scene_small(case="fixed", v2=1.0, rho=1.0)
    pts = np.array([[2.0, 0.0, 0.0]])
    kappa = 1.5j
    val = total_field(kappa, SRC, pts, scene)
    # exact radial convolution of the free kernel with the Gaussian
    d = np.linalg.norm(np.array(SRC.center) - pts[0])
    s = np.linspace(0.0, 8.0 * SRC.width, 20001)
    f = SRC.amplitude * np.exp(-s ** 2 / (2.0 * SRC.width ** 2))
    integrand = s * f * (np.exp(1j * kappa * (d + s))
                         - np.exp(1j * kappa * np.abs(d - s)))
    exact = np.trapezoid(integrand, s) / (2j * kappa * d)
    assert abs(val[0] - exact) < 1e-4 * abs(exact)
