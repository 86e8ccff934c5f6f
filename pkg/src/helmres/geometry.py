"""Quadratures for the reference inclusion and scene placement.

Surface and volume integrals are discretized Nystrom-style: one node per
dual cell, with positive weights.  The reference shapes are the unit sphere
(geodesic icosphere) and the unit ball (radial Gauss-Legendre shells times
icosphere directions); arbitrary closed triangle meshes can be ingested from
OFF files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Invalid mesh, quadrature request, or scene configuration."""


# ---------------------------------------------------------------------------
# icosphere
# ---------------------------------------------------------------------------

_ICO_T = (1.0 + np.sqrt(5.0)) / 2.0

_ICO_VERTS = np.array(
    [
        [-1, _ICO_T, 0], [1, _ICO_T, 0], [-1, -_ICO_T, 0], [1, -_ICO_T, 0],
        [0, -1, _ICO_T], [0, 1, _ICO_T], [0, -1, -_ICO_T], [0, 1, -_ICO_T],
        [_ICO_T, 0, -1], [_ICO_T, 0, 1], [-_ICO_T, 0, -1], [-_ICO_T, 0, 1],
    ],
    dtype=float,
)

_ICO_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [5, 4, 9], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=int,
)


def icosphere(frequency: int):
    """Geodesic subdivision of the icosahedron projected to the unit sphere.

    Each icosahedron face is split into ``frequency**2`` triangles, giving
    ``10*frequency**2 + 2`` vertices and ``20*frequency**2`` faces.
    """
    if frequency < 1:
        raise GeometryError("subdivision frequency must be >= 1")
    f = int(frequency)
    verts = []
    index = {}

    def vid(p):
        key = tuple(np.round(p, 12))
        if key not in index:
            index[key] = len(verts)
            verts.append(p)
        return index[key]

    faces = []
    base = _ICO_VERTS / np.linalg.norm(_ICO_VERTS[0])
    for tri in _ICO_FACES:
        a, b, c = base[tri]
        # barycentric lattice on the face, rows i from apex a
        rows = []
        for i in range(f + 1):
            row = []
            for j in range(i + 1):
                p = a + (b - a) * (i / f) + (c - b) * (j / f) if i else a.copy()
                p = p / np.linalg.norm(p)
                row.append(vid(p))
            rows.append(row)
        for i in range(f):
            for j in range(i + 1):
                faces.append([rows[i][j], rows[i + 1][j], rows[i + 1][j + 1]])
                if j < i:
                    faces.append([rows[i][j], rows[i + 1][j + 1], rows[i][j + 1]])
    return np.array(verts), np.array(faces, dtype=int)


def _spherical_face_areas(verts, faces):
    # Van Oosterom-Strackee solid angle of each spherical triangle
    a = verts[faces[:, 0]]
    b = verts[faces[:, 1]]
    c = verts[faces[:, 2]]
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c)
           + np.einsum("ij,ij->i", a, c))
    return np.abs(2.0 * np.arctan2(num, den))


# ---------------------------------------------------------------------------
# quadrature containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceQuadrature:
    """Discretized closed surface: nodes, unit outward normals, areas."""

    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    shape_tag: str = "UnitSphere"

    def __post_init__(self):
        n = np.linalg.norm(self.normals, axis=1)
        if not np.allclose(n, 1.0, atol=1e-12):
            raise GeometryError("normals must be unit vectors")
        if np.any(self.weights <= 0):
            raise GeometryError("surface weights must be positive")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    @property
    def enclosed_volume(self) -> float:
        # divergence theorem on the discrete data
        return float(np.sum(self.weights * np.einsum("ij,ij->i", self.nodes, self.normals)) / 3.0)

    @property
    def circumradius(self) -> float:
        return float(np.max(np.linalg.norm(self.nodes, axis=1)))

    @property
    def mesh_width(self) -> float:
        """Mean linear cell size."""
        return float(np.sqrt(np.mean(self.weights)))

    def scaled(self, center, eps) -> "SurfaceQuadrature":
        return SurfaceQuadrature(
            nodes=np.asarray(center) + eps * self.nodes,
            normals=self.normals,
            weights=eps * eps * self.weights,
            shape_tag=self.shape_tag,
        )


@dataclass(frozen=True)
class VolumeQuadrature:
    """Discretized solid: interior nodes and positive cell volumes."""

    nodes: np.ndarray
    weights: np.ndarray
    shape_tag: str = "UnitBall"

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise GeometryError("volume weights must be positive")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    def scaled(self, center, eps) -> "VolumeQuadrature":
        return VolumeQuadrature(
            nodes=np.asarray(center) + eps * self.nodes,
            weights=eps ** 3 * self.weights,
            shape_tag=self.shape_tag,
        )


def make_unit_sphere_quadrature(n: int) -> SurfaceQuadrature:
    """Near-uniform quadrature on the unit sphere with at least ``n`` nodes.

    Nodes are icosphere vertices (so normals coincide with node positions);
    weights are the barycentric dual cells built from exact spherical
    triangle areas, hence they sum to 4*pi to machine precision.
    """
    if n < 64:
        raise GeometryError("unit sphere quadrature needs n >= 64")
    freq = 1
    while 10 * freq * freq + 2 < n:
        freq += 1
    verts, faces = icosphere(freq)
    areas = _spherical_face_areas(verts, faces)
    w = np.zeros(len(verts))
    np.add.at(w, faces.ravel(), np.repeat(areas / 3.0, 3))
    return SurfaceQuadrature(nodes=verts, normals=verts.copy(), weights=w,
                             shape_tag="UnitSphere")


def make_ball_volume_quadrature(n: int) -> VolumeQuadrature:
    """Product quadrature on the unit ball with at least ``n`` cells.

    Radial Gauss-Legendre shells (exact for the r^2 Jacobian, so the weights
    sum to 4*pi/3 up to roundoff) times icosphere directions; the direction
    count and shell count are balanced so radial and angular resolutions
    match.
    """
    if n < 256:
        raise GeometryError("ball volume quadrature needs n >= 256")
    best = None
    for freq in range(1, 41):
        n_ang = 10 * freq * freq + 2
        n_r = int(np.ceil(n / n_ang))
        if n_r < 2:
            n_r = 2
        balance = abs(np.log(n_r * np.sqrt(4.0 * np.pi / n_ang)))
        if best is None or balance < best[0]:
            best = (balance, freq, n_r)
    _, freq, n_r = best
    directions = make_unit_sphere_quadrature(10 * freq * freq + 2)
    x, wx = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * wx * r * r
    nodes = (r[:, None, None] * directions.nodes[None, :, :]).reshape(-1, 3)
    weights = (wr[:, None] * directions.weights[None, :]).ravel()
    return VolumeQuadrature(nodes=nodes, weights=weights, shape_tag="UnitBall")


# ---------------------------------------------------------------------------
# OFF ingestion
# ---------------------------------------------------------------------------

def load_mesh(path) -> SurfaceQuadrature:
    """Read a closed, consistently oriented triangle mesh in OFF format.

    One quadrature node per triangle (the centroid), weight the triangle
    area, normal the winding normal; all faces are flipped together when the
    signed volume comes out negative.
    """
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise GeometryError(f"{path}: not an OFF file")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4  # skip edge count
        verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            cnt = int(tokens[pos])
            if cnt != 3:
                raise GeometryError(f"{path}: only triangle faces supported")
            faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
            pos += 4
    except (IndexError, ValueError) as exc:
        raise GeometryError(f"{path}: malformed OFF data") from exc
    faces = np.array(faces, dtype=int)

    # closed orientable surface: every directed edge paired with its reverse
    edges = {}
    for tri in faces:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    for (a, b), cnt in edges.items():
        if cnt != 1 or edges.get((b, a), 0) != 1:
            raise GeometryError(f"{path}: surface not closed or inconsistently oriented")

    v0, v1, v2 = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    cross = np.cross(v1 - v0, v2 - v0)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    if np.any(areas <= 0):
        raise GeometryError(f"{path}: degenerate triangle")
    signed_volume = float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)
    if abs(signed_volume) < 1e-12 * np.sum(areas) ** 1.5:
        raise GeometryError(f"{path}: zero signed volume, orientation undetermined")
    normals = cross / (2.0 * areas[:, None])
    if signed_volume < 0:
        normals = -normals
    centroids = (v0 + v1 + v2) / 3.0
    return SurfaceQuadrature(nodes=centroids, normals=normals, weights=areas,
                             shape_tag="TriMesh")


def make_mesh_volume_quadrature(surf: SurfaceQuadrature, n: int = 1024) -> VolumeQuadrature:
    """Interior quadrature for a closed mesh, star-shaped about its centroid.

    The solid is decomposed into cones over the faces; each cone carries a
    radial Gauss-Legendre rule exact for the conical Jacobian.  Best-effort:
    accuracy degrades if the mesh is not star-shaped.
    """
    centroid = (surf.weights @ surf.nodes) / surf.area
    heights = np.einsum("ij,ij->i", surf.nodes - centroid, surf.normals)
    if np.any(heights <= 0):
        raise GeometryError("mesh is not star-shaped about its centroid")
    cone_vol = surf.weights * heights / 3.0
    n_r = max(2, int(np.ceil(n / surf.n)))
    x, wx = np.polynomial.legendre.leggauss(n_r)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * wx * 3.0 * t * t
    nodes = (centroid + t[:, None, None] * (surf.nodes - centroid)[None, :, :])
    weights = wt[:, None] * cone_vol[None, :]
    return VolumeQuadrature(nodes=nodes.reshape(-1, 3), weights=weights.ravel(),
                            shape_tag="StarMesh")


# ---------------------------------------------------------------------------
# material models and scenes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Material:
    """Material coefficients of the inclusions.

    ``case`` selects one of the four scale-dependent laws for the interior
    speed squared and density (with coefficients ``v2``, ``v12``, ``rho``,
    ``rho1``), or ``"fixed"`` for scale-independent per-inclusion values
    ``v2_list`` / ``rho_list``.  ``rho_inf`` marks inclusions whose density
    is taken to the rigid limit in the generalized pencil.
    """

    case: int | str = "fixed"
    v2: float = 1.0
    v12: float = 0.0
    rho: float = 1.0
    rho1: float = 0.0
    v2_list: tuple = ()
    rho_list: tuple = ()
    v_inf: tuple = ()
    rho_inf: tuple = ()

    def __post_init__(self):
        if self.case not in (1, 2, 3, 4, "fixed"):
            raise GeometryError(f"unknown material case {self.case!r}")
        for name in ("v2", "rho"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"material scalar {name} must be positive")

    def at_eps(self, eps: float, n_inclusions: int = 1):
        """Interior (v^2, rho) of every inclusion at scale ``eps``.

        The four scale-dependent laws are the truncated polynomials
          case 1: v2*eps^2*(1 + (v12/v2) eps),  rho = 1 + rho1*eps
          case 2: 1 + v12*eps,                  rho = rho*eps^2
          case 3: eps*(v2 + v12*eps),           rho = eps*(rho + rho1*eps)
          case 4: eps^2*(v2 + v12*eps),         rho = eps*(rho + rho1*eps)
        """
        if self.case == "fixed":
            v2 = np.array(self.v2_list or [self.v2] * n_inclusions, dtype=float)
            rho = np.array(self.rho_list or [self.rho] * n_inclusions, dtype=float)
            return v2, rho
        e = float(eps)
        if self.case == 1:
            v2 = e * e * (self.v2 + self.v12 * e)
            rho = 1.0 + self.rho1 * e
        elif self.case == 2:
            v2 = 1.0 + self.v12 * e
            rho = self.rho * e * e
        elif self.case == 3:
            v2 = e * (self.v2 + self.v12 * e)
            rho = e * (self.rho + self.rho1 * e)
        else:  # case 4
            v2 = e * e * (self.v2 + self.v12 * e)
            rho = e * (self.rho + self.rho1 * e)
        if v2 <= 0 or rho <= 0:
            raise GeometryError("material law produced a nonpositive coefficient")
        return (np.full(n_inclusions, v2), np.full(n_inclusions, rho))


def tilde_rho(rho):
    """Density jump coupling 2*(rho-1)/(rho+1), elementwise."""
    rho = np.asarray(rho, dtype=float)
    return 2.0 * (rho - 1.0) / (rho + 1.0)


@dataclass(frozen=True)
class Scene:
    """Reference inclusion plus placement and material data."""

    surface: SurfaceQuadrature
    volume: VolumeQuadrature
    centers: np.ndarray = field(default_factory=lambda: np.zeros((1, 3)))
    eps: float = 1.0
    material: Material = field(default_factory=Material)

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, float)))
        if self.eps <= 0:
            raise GeometryError("eps must be positive")
        c = self.centers
        rad = self.eps * self.surface.circumradius
        for i in range(len(c)):
            for j in range(i + 1, len(c)):
                if np.linalg.norm(c[i] - c[j]) <= 2.0 * rad:
                    raise GeometryError(
                        f"inclusions {i} and {j} overlap at eps={self.eps}"
                    )

    @property
    def n_inclusions(self) -> int:
        return len(self.centers)

    def materials_at(self, eps=None):
        e = self.eps if eps is None else eps
        return self.material.at_eps(e, self.n_inclusions)


def place(scene: Scene, ell: int):
    """Surface and volume quadratures of inclusion ``ell`` at physical scale."""
    if not 0 <= ell < scene.n_inclusions:
        raise GeometryError(f"inclusion index {ell} out of range")
    c = scene.centers[ell]
    return scene.surface.scaled(c, scene.eps), scene.volume.scaled(c, scene.eps)
