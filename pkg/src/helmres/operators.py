"""Dense Nystrom blocks of the volume and boundary integral operators,
their wavenumber-series blocks, projectors, and derived spectral data.

Conventions
-----------
* A block maps nodal values to nodal values: entry (i, j) is
  kernel(x_i, y_j) * w_j, with closed-form singular-cell diagonals where
  source and target quadratures coincide.
* Adjoints are taken in the quadrature-weighted inner products
  <u, v> = sum_i w_i conj(u_i) v_i.
* The double-layer trace gets its diagonal from the Gauss identity, making
  K0 @ 1 = -1/2 exact; the single-layer Neumann trace ("g1SL") is its
  weighted adjoint, so -1/2 is an exact eigenvalue of both.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels as K
from .geometry import Scene, SurfaceQuadrature, VolumeQuadrature, place
from .kernels import SeriesKind


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorBlock:
    entries: np.ndarray
    row_space: tuple          # ("vol"|"bdy", inclusion index)
    col_space: tuple
    kappa: complex
    kind: str

    @property
    def shape(self):
        return self.entries.shape


# ---------------------------------------------------------------------------
# low-level block assembly on explicit quadratures
# ---------------------------------------------------------------------------

def n_block(z, vol_t: VolumeQuadrature, vol_s: VolumeQuadrature, same: bool):
    """Volume potential block (Newton potential at z = 0)."""
    m = K.pairwise_green(z, vol_t.nodes, vol_s.nodes, same_points=same) * vol_s.weights
    if same:
        a = K.ball_radius(vol_s.weights)
        np.fill_diagonal(m, K.ball_self_integral(z, a))
    return m.real if z == 0 else m


def n_block_dz(z, vol_t, vol_s, same: bool):
    m = K.pairwise_green_dz(z, vol_t.nodes, vol_s.nodes, same_points=same) * vol_s.weights
    if same:
        a = K.ball_radius(vol_s.weights)
        np.fill_diagonal(m, K.ball_self_integral_dz(z, a))
    return m


def one_sl_block(z, vol_t: VolumeQuadrature, surf_s: SurfaceQuadrature):
    """Single-layer potential sampled at interior volume nodes."""
    m = K.pairwise_green(z, vol_t.nodes, surf_s.nodes) * surf_s.weights
    return m.real if z == 0 else m


def one_sl_block_dz(z, vol_t, surf_s):
    return K.pairwise_green_dz(z, vol_t.nodes, surf_s.nodes) * surf_s.weights


def g1n_block(z, surf_t: SurfaceQuadrature, vol_s: VolumeQuadrature):
    """Neumann trace of the volume potential (no jump, interior = average)."""
    m = (K.pairwise_green_dn(z, surf_t.nodes, vol_s.nodes, surf_t.normals,
                             at_target=True) * vol_s.weights)
    return m.real if z == 0 else m


def g1n_block_dz(z, surf_t, vol_s):
    return (K.pairwise_green_dn_dz(z, surf_t.nodes, vol_s.nodes, surf_t.normals,
                                   at_target=True) * vol_s.weights)


def g0n_block(z, surf_t: SurfaceQuadrature, vol_s: VolumeQuadrature):
    """Dirichlet trace of the volume potential."""
    m = K.pairwise_green(z, surf_t.nodes, vol_s.nodes) * vol_s.weights
    return m.real if z == 0 else m


def s_block(z, surf_t: SurfaceQuadrature, surf_s: SurfaceQuadrature, same: bool):
    """Dirichlet trace of the single layer (S0 at z = 0)."""
    m = K.pairwise_green(z, surf_t.nodes, surf_s.nodes, same_points=same) * surf_s.weights
    if same:
        a = K.disk_radius(surf_s.weights)
        np.fill_diagonal(m, K.disk_self_integral(z, a))
    return m.real if z == 0 else m


def k0_block(surf: SurfaceQuadrature):
    """Double-layer trace at z = 0 with the Gauss-enforced diagonal.

    Row sums equal -1/2 exactly by construction.
    """
    m = (K.pairwise_green_dn(0.0, surf.nodes, surf.nodes, surf.normals,
                             at_target=False, same_points=True) * surf.weights).real
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, -0.5 - m.sum(axis=1))
    return m


def kstar_diag(surf: SurfaceQuadrature):
    """Diagonal shared by K0 and its weighted adjoint g1SL_z for every z."""
    return np.diag(k0_block(surf)).copy()


def g1sl_block(z, surf_t: SurfaceQuadrature, surf_s: SurfaceQuadrature,
               same: bool, diag=None):
    """Averaged Neumann trace of the single layer (principal value).

    The one-sided traces are this block -/+ 1/2 (exterior/interior).  On the
    diagonal, the z-dependent corrections vanish on the flat equal-area disk,
    so the z = 0 Gauss diagonal is reused.
    """
    m = (K.pairwise_green_dn(z, surf_t.nodes, surf_s.nodes, surf_t.normals,
                             at_target=True, same_points=same) * surf_s.weights)
    if same:
        np.fill_diagonal(m, kstar_diag(surf_s) if diag is None else diag)
    return m.real if z == 0 else m


def g1sl_block_dz(z, surf_t, surf_s, same: bool):
    m = (K.pairwise_green_dn_dz(z, surf_t.nodes, surf_s.nodes, surf_t.normals,
                                at_target=True, same_points=same) * surf_s.weights)
    if same:
        np.fill_diagonal(m, 0.0)
    return m


def series_block(kind: SeriesKind, surf: SurfaceQuadrature = None,
                 vol: VolumeQuadrature = None):
    """Assembled series blocks; N1/SL1 are explicit rank-one products."""
    c = 0.25j / np.pi
    if kind is SeriesKind.N1:
        return c * np.outer(np.ones(vol.n), vol.weights)
    if kind is SeriesKind.SL1:
        return c * np.outer(np.ones(vol.n), surf.weights)
    d = surf.nodes[:, None, :] - surf.nodes[None, :, :]
    nd = np.einsum("ik,ijk->ij", surf.normals, d)
    if kind is SeriesKind.K2star:
        r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        np.fill_diagonal(r, np.inf)
        m = -nd / (8.0 * np.pi * r) * surf.weights
        np.fill_diagonal(m, 0.0)   # flat-disk limit
        return m
    if kind is SeriesKind.K3star:
        m = 1j * nd / (12.0 * np.pi) * surf.weights
        np.fill_diagonal(m, 0.0)
        return m
    raise AssemblyError(f"unknown series kind {kind}")


# ---------------------------------------------------------------------------
# spec-level assemble() on scenes (physically placed inclusions)
# ---------------------------------------------------------------------------

_KINDS = {
    "N": ("vol", "vol"),
    "1SL": ("vol", "bdy"),
    "g1N": ("bdy", "vol"),
    "g0N": ("bdy", "vol"),
    "g1SL": ("bdy", "bdy"),
    "S0": ("bdy", "bdy"),
    "K0": ("bdy", "bdy"),
}


def assemble(kind: str, kappa, scene: Scene, ell_row: int = 0, ell_col: int = 0):
    """One operator block between (placed) inclusions of the scene."""
    if kind not in _KINDS:
        raise AssemblyError(f"unknown block kind {kind!r}")
    rs, cs = _KINDS[kind]
    surf_r, vol_r = place(scene, ell_row)
    surf_c, vol_c = place(scene, ell_col)
    same = ell_row == ell_col
    if kind == "N":
        m = n_block(kappa, vol_r, vol_c, same)
    elif kind == "1SL":
        m = one_sl_block(kappa, vol_r, surf_c)
    elif kind == "g1N":
        m = g1n_block(kappa, surf_r, vol_c)
    elif kind == "g0N":
        m = g0n_block(kappa, surf_r, vol_c)
    elif kind == "g1SL":
        if same:
            m = g1sl_block(kappa, surf_r, surf_c, True)
        else:
            m = g1sl_block(kappa, surf_r, surf_c, False)
    elif kind == "S0":
        m = s_block(kappa, surf_r, surf_c, same)
    else:  # K0
        if kappa != 0:
            raise AssemblyError("K0 is assembled at kappa = 0 only")
        if not same:
            raise AssemblyError("K0 is a same-boundary trace")
        m = k0_block(surf_r)
    return OperatorBlock(entries=m, row_space=(rs, ell_row), col_space=(cs, ell_col),
                         kappa=complex(kappa), kind=kind)


def assemble_series(kind: SeriesKind, scene: Scene):
    """Series block on the reference (unit-scale) inclusion."""
    m = series_block(kind, surf=scene.surface, vol=scene.volume)
    spaces = {
        SeriesKind.N1: (("vol", 0), ("vol", 0)),
        SeriesKind.SL1: (("vol", 0), ("bdy", 0)),
        SeriesKind.K2star: (("bdy", 0), ("bdy", 0)),
        SeriesKind.K3star: (("bdy", 0), ("bdy", 0)),
    }[kind]
    return OperatorBlock(entries=m, row_space=spaces[0], col_space=spaces[1],
                         kappa=0.0, kind=kind.value)


# ---------------------------------------------------------------------------
# reference-operator workspace
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MinnaertData:
    omega_m2: float
    c_omega: float
    volume: float
    psi: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray   # columns, unit weighted-L2 norm
    residuals: np.ndarray


@dataclass(frozen=True, eq=False)
class NeumannPair:
    nu: float
    u: np.ndarray
    phi: np.ndarray
    residual: float


class ReferenceOperators:
    """Cache of unit-scale blocks and factorizations for one reference shape."""

    def __init__(self, surface: SurfaceQuadrature, volume: VolumeQuadrature):
        self.surface = surface
        self.volume = volume
        self.ws = surface.weights
        self.wv = volume.weights
        self.vol_measure = surface.enclosed_volume

        self.S0 = s_block(0.0, surface, surface, True)
        self.K0 = k0_block(surface)
        w = self.ws
        self.Kstar0 = (self.K0.T * w[None, :]) / w[:, None]
        self.N0 = n_block(0.0, volume, volume, True)
        self.g1N0 = g1n_block(0.0, surface, volume)
        self.g0N0 = g0n_block(0.0, surface, volume)
        self.oneSL0 = one_sl_block(0.0, volume, surface)
        self.K2s = series_block(SeriesKind.K2star, surf=surface)
        self.K3s = series_block(SeriesKind.K3star, surf=surface)
        self.N1 = series_block(SeriesKind.N1, vol=volume)
        self.SL1 = series_block(SeriesKind.SL1, surf=surface, vol=volume)

        self._S0_lu = sla.lu_factor(self.S0)
        self.psi = sla.lu_solve(self._S0_lu, np.ones(surface.n))
        self.c_omega = float(self.ws @ self.psi)
        self.Pstar = np.outer(self.psi, self.ws) / self.c_omega
        self.P0 = np.outer(np.ones(surface.n), self.ws * self.psi) / self.c_omega
        self.Pperp = np.eye(surface.n) - self.Pstar
        half_kstar_perp = self.Pperp @ (0.5 * np.eye(surface.n) + self.Kstar0) @ self.Pperp
        self._perp_lu = sla.lu_factor(half_kstar_perp + self.Pstar)

    # -- solves -------------------------------------------------------------

    def solve_S0(self, rhs):
        return sla.lu_solve(self._S0_lu, rhs)

    def inv_half_kstar_perp(self, y):
        """(1/2 + g1SL0)_perp^{-1} restricted to ran(P_perp)."""
        x = sla.lu_solve(self._perp_lu, self.Pperp @ y)
        return self.Pperp @ x

    # -- derived data ---------------------------------------------------------

    def minnaert(self) -> MinnaertData:
        vol = self.vol_measure
        return MinnaertData(omega_m2=self.c_omega / vol, c_omega=self.c_omega,
                            volume=vol, psi=self.psi)

    def newton_spectrum(self, k: int) -> SpectralResult:
        d = np.sqrt(self.wv)
        sym = self.N0 * (d[:, None] / d[None, :])
        sym = 0.5 * (sym + sym.T)
        lam, y = sla.eigh(sym)
        lam = lam[::-1][:k]
        y = y[:, ::-1][:, :k]
        vecs = y / d[:, None]
        res = np.array([
            np.linalg.norm((self.N0 @ vecs[:, j] - lam[j] * vecs[:, j]) * d)
            for j in range(k)
        ]) / np.linalg.norm(sym, 2)
        return SpectralResult(eigenvalues=lam, eigenvectors=vecs, residuals=res)

    def neumann_eigenpairs(self, k: int) -> list[NeumannPair]:
        nv = self.volume.n
        vol = self.vol_measure
        ones = np.ones(nv)
        proj = np.eye(nv) - np.outer(ones, self.wv) / np.sum(self.wv)
        # boundary elimination of the layer density
        t = self.Pperp @ sla.lu_solve(self._perp_lu, self.Pperp @ self.g1N0)
        core = proj @ (self.N0 - self.oneSL0 @ t) @ proj
        # the wanted modes are the largest 1/nu, i.e. largest |mu|
        import scipy.sparse.linalg as spla

        n_ask = min(max(3 * k + 6, 12), nv - 2)
        try:
            mu, vecs = spla.eigs(core, k=n_ask, which="LM", v0=ones / np.sqrt(nv))
        except Exception:
            mu, vecs = sla.eig(core)
        keep = []
        dropped = 0
        for j, m in enumerate(mu):
            if abs(m.imag) > 1e-6 * max(abs(m.real), 1e-300):
                continue
            if m.real <= 1e-12:
                if abs(m) > 1e-10:
                    dropped += 1
                continue
            keep.append((1.0 / m.real, j))
        if dropped:
            warnings.warn(f"discarded {dropped} nonpositive Neumann modes "
                          "(discretization artifacts)")
        keep.sort()
        out = []
        for nu, j in keep[:k]:
            u = np.real(vecs[:, j])
            u = proj @ u
            u = u / np.sqrt(np.sum(self.wv * u * u))
            phi_perp = -self.inv_half_kstar_perp(self.g1N0 @ u)
            h = (u / nu - self.N0 @ u) - self.oneSL0 @ phi_perp
            c_nu = float(np.sum(self.wv * h)) / vol
            phi = c_nu * self.psi + phi_perp
            # trace of u reconstructed through the layer representation; the
            # residual certifies the algebraic consistency of the solve
            g0u = nu * (self.g0N0 @ u + self.S0 @ phi)
            rhs = g0u / nu - self.g0N0 @ u
            res = np.linalg.norm(self.S0 @ phi - rhs) / max(np.linalg.norm(phi), 1e-300)
            out.append(NeumannPair(nu=nu, u=u, phi=phi, residual=float(res)))
        return out

    def dirichlet_trace_of_mode(self, u, lam):
        """gamma_0 of a Newton-operator eigenfunction via u = N0 u / lam."""
        return (self.g0N0 @ u) / lam

    def neumann_trace_of_mode(self, u, lam):
        return (self.g1N0 @ u) / lam


_REF_CACHE: dict = {}


def reference_operators(scene: Scene) -> ReferenceOperators:
    key = (id(scene.surface), id(scene.volume))
    ops = _REF_CACHE.get(key)
    if ops is None or ops.surface is not scene.surface or ops.volume is not scene.volume:
        ops = ReferenceOperators(scene.surface, scene.volume)
        if len(_REF_CACHE) > 16:
            _REF_CACHE.clear()
        _REF_CACHE[key] = ops
    return ops


# -- spec-level wrappers ------------------------------------------------------

def minnaert(scene: Scene) -> MinnaertData:
    return reference_operators(scene).minnaert()


def newton_spectrum(scene: Scene, k: int) -> SpectralResult:
    return reference_operators(scene).newton_spectrum(k)


def neumann_eigenpairs(scene: Scene, k: int) -> list[NeumannPair]:
    return reference_operators(scene).neumann_eigenpairs(k)


def projector(which: str, scene: Scene) -> OperatorBlock:
    ops = reference_operators(scene)
    m = {"P0": ops.P0, "Pstar": ops.Pstar, "Pperp": ops.Pperp}.get(which)
    if m is None:
        raise AssemblyError(f"unknown projector {which!r}")
    return OperatorBlock(entries=m, row_space=("bdy", 0), col_space=("bdy", 0),
                         kappa=0.0, kind=which)
