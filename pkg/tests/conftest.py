import numpy as np
import pytest

from helmres.geometry import (Material, Scene, make_ball_volume_quadrature,
                              make_unit_sphere_quadrature)


@pytest.fixture(scope="session")
def sphere162():
    return make_unit_sphere_quadrature(162)


@pytest.fixture(scope="session")
def sphere642():
    return make_unit_sphere_quadrature(642)


@pytest.fixture(scope="session")
def sphere1212():
    return make_unit_sphere_quadrature(1212)


@pytest.fixture(scope="session")
def ball300():
    return make_ball_volume_quadrature(300)


@pytest.fixture(scope="session")
def ball1000():
    return make_ball_volume_quadrature(1000)


@pytest.fixture(scope="session")
def ball2000():
    return make_ball_volume_quadrature(2000)


@pytest.fixture(scope="session")
def scene_small(sphere162, ball300):
    """Coarse testing scene factory."""
    def make(**mat):
        return Scene(surface=sphere162, volume=ball300,
                     material=Material(**mat))
    return make


@pytest.fixture(scope="session")
def scene_prod(sphere642, ball1000):
    """Production-resolution scene factory."""
    def make(**mat):
        return Scene(surface=sphere642, volume=ball1000,
                     material=Material(**mat))
    return make


@pytest.fixture(scope="session")
def icosahedron_off(tmp_path_factory):
    """Closed unit-circumradius icosahedron in OFF format."""
    from helmres.geometry import _ICO_FACES, _ICO_VERTS
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS[0])
    path = tmp_path_factory.mktemp("mesh") / "icosahedron.off"
    lines = ["OFF", f"{len(verts)} {len(_ICO_FACES)} 0"]
    lines += [" ".join(f"{c:.17g}" for c in v) for v in verts]
    lines += ["3 " + " ".join(map(str, f)) for f in _ICO_FACES]
    path.write_text("\n".join(lines) + "\n")
    return path
