"""Assembly of the acoustic operator pencil.

Forms
-----
``full``      2x2 block pencil over all inclusions:
              [[v^2 + (v^2-1) k^2 N_k,  (v^2-1) k^2 1_O SL_k],
               [-tr * g1 N_k,           I - tr * g1 SL_k]],
              tr = 2(rho-1)/(rho+1), assembled at physical placement.
``not1``      equivalent rescaling for v != 1, rho != 1:
              [[v^2/(v^2-1) + k^2 N_k,  k^2 1_O SL_k],
               [-g1 N_k,                tr^{-1} - g1 SL_k]].
``wz``        the ``not1`` shape with the coefficients replaced by their
              rigid limits where flagged: w -> 1 (speed limit),
              z -> 1/2 (density limit).
``volume``    the decoupled volume block v^2 + (v^2-1) k^2 N_k (rho = 1).
``surface``   the decoupled boundary block I - tr * g1 SL_k (v = 1).

``assemble_rescaled`` builds the reference-domain pencil whose kernel points
at wavenumber k coincide with the resonances of the eps-scaled problem: all
kernels are evaluated at z = eps*k on the unit-scale quadratures, rows and
columns carry the exponents (a, b, c) of the material case, and cross
-inclusion couplings are translated by (y_l - y_m)/eps.  The boundary column
may carry the (P + eps^s P_perp) splitting of the asymptotic normal forms;
this right multiplication by an invertible map leaves kernel points
unchanged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import operators as ops
from .geometry import Scene, place, tilde_rho


class PencilError(ValueError):
    pass


# exponents (a, b, c) and boundary-column splitting power per material case
CASE_EXPONENTS = {1: (2, 1, 1), 2: (0, 1, 1), 3: (1, 1, 1), 4: (2, 1, 1)}
CASE_SPLIT = {1: 0, 2: 2, 3: 1, 4: 0}


@dataclass(frozen=True, eq=False)
class QMatrix:
    matrix: np.ndarray
    kappa: complex
    eps: float
    form: str
    weights: np.ndarray           # quadrature weights of the stacked spaces
    nv: int                       # volume nodes per inclusion (0 if absent)
    nb: int                       # boundary nodes per inclusion (0 if absent)
    n_inclusions: int
    materials: tuple = ()
    col_transform: np.ndarray | None = field(default=None)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def to_physical(self, x):
        """Map a solved kernel vector back to nodal (u, phi) coordinates."""
        return x if self.col_transform is None else self.col_transform @ x

    def split_vector(self, x):
        """Per-inclusion (u, phi) views of a physical kernel vector."""
        n, nv, nb = self.n_inclusions, self.nv, self.nb
        us = [x[ell * nv:(ell + 1) * nv] for ell in range(n)] if nv else []
        off = n * nv
        phis = [x[off + ell * nb:off + (ell + 1) * nb] for ell in range(n)] if nb else []
        return us, phis


def _stack_weights(scene, nv_scale, nb_scale, vol=True, bdy=True):
    n = scene.n_inclusions
    parts = []
    if vol:
        parts += [scene.volume.weights * nv_scale] * n
    if bdy:
        parts += [scene.surface.weights * nb_scale] * n
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# physically placed forms
# ---------------------------------------------------------------------------

def _placed_quads(scene):
    return [place(scene, ell) for ell in range(scene.n_inclusions)]


def _full_blocks(kappa, scene, deriv=False):
    """(VV, VB, BV, BB) lists of lists of raw kernel blocks at placement."""
    quads = _placed_quads(scene)
    n = scene.n_inclusions
    nb_ = [[None] * n for _ in range(n)]
    vb = [[None] * n for _ in range(n)]
    bv = [[None] * n for _ in range(n)]
    bb = [[None] * n for _ in range(n)]
    for i in range(n):
        si, vi = quads[i]
        for j in range(n):
            sj, vj = quads[j]
            same = i == j
            if deriv:
                nb_[i][j] = ops.n_block_dz(kappa, vi, vj, same)
                vb[i][j] = ops.one_sl_block_dz(kappa, vi, sj)
                bv[i][j] = ops.g1n_block_dz(kappa, si, vj)
                bb[i][j] = ops.g1sl_block_dz(kappa, si, sj, same)
            else:
                nb_[i][j] = ops.n_block(kappa, vi, vj, same)
                vb[i][j] = ops.one_sl_block(kappa, vi, sj)
                bv[i][j] = ops.g1n_block(kappa, si, vj)
                bb[i][j] = ops.g1sl_block(kappa, si, sj, same)
    return nb_, vb, bv, bb


def assemble_q(kappa, scene: Scene, form: str = "full", deriv: bool = False,
               eps: float | None = None) -> QMatrix:
    """Assemble the pencil (or its d/d kappa) for the placed scene."""
    e = scene.eps if eps is None else eps
    if eps is not None and eps != scene.eps:
        scene = Scene(surface=scene.surface, volume=scene.volume,
                      centers=scene.centers, eps=eps, material=scene.material)
    v2, rho = scene.materials_at(e)
    tr = tilde_rho(rho)
    n = scene.n_inclusions
    kappa = complex(kappa)

    if form in ("not1", "wz"):
        for i in range(n):
            v_ok = form == "wz" and i < len(scene.material.v_inf) and scene.material.v_inf[i]
            r_ok = form == "wz" and i < len(scene.material.rho_inf) and scene.material.rho_inf[i]
            if np.isclose(v2[i], 1.0) and not v_ok:
                raise PencilError(f"form {form!r} needs v^2 != 1 (inclusion {i})")
            if np.isclose(rho[i], 1.0) and not r_ok:
                raise PencilError(f"form {form!r} needs rho != 1 (inclusion {i})")

    if form == "volume":
        quads = _placed_quads(scene)
        blocks = [[None] * n for _ in range(n)]
        for i in range(n):
            _, vi = quads[i]
            for j in range(n):
                _, vj = quads[j]
                nb_ = ops.n_block(kappa, vi, vj, i == j)
                if deriv:
                    nb_dz = ops.n_block_dz(kappa, vi, vj, i == j)
                    blocks[i][j] = (v2[i] - 1.0) * (2.0 * kappa * nb_
                                                    + kappa ** 2 * nb_dz)
                else:
                    blocks[i][j] = (v2[i] - 1.0) * kappa ** 2 * nb_
                    if i == j:
                        blocks[i][j] += v2[i] * np.eye(blocks[i][j].shape[0])
        m = np.block(blocks)
        w = _stack_weights(scene, e ** 3, e ** 2, vol=True, bdy=False)
        return QMatrix(matrix=m, kappa=kappa, eps=e, form=form, weights=w,
                       nv=scene.volume.n, nb=0, n_inclusions=n,
                       materials=(tuple(v2), tuple(rho)))

    if form == "surface":
        quads = _placed_quads(scene)
        blocks = [[None] * n for _ in range(n)]
        for i in range(n):
            si, _ = quads[i]
            for j in range(n):
                sj, _ = quads[j]
                blk = (ops.g1sl_block_dz(kappa, si, sj, i == j) if deriv
                       else ops.g1sl_block(kappa, si, sj, i == j))
                blocks[i][j] = -tr[i] * blk
                if i == j and not deriv:
                    blocks[i][j] = blocks[i][j] + np.eye(blk.shape[0])
        m = np.block(blocks)
        w = _stack_weights(scene, e ** 3, e ** 2, vol=False, bdy=True)
        return QMatrix(matrix=m, kappa=kappa, eps=e, form=form, weights=w,
                       nv=0, nb=scene.surface.n, n_inclusions=n,
                       materials=(tuple(v2), tuple(rho)))

    N, VB, BV, BB = _full_blocks(kappa, scene, deriv)
    if deriv:
        N0blk, VB0blk = _full_blocks(kappa, scene, False)[:2]

    vv = [[None] * n for _ in range(n)]
    vb = [[None] * n for _ in range(n)]
    bv = [[None] * n for _ in range(n)]
    bb = [[None] * n for _ in range(n)]
    for i in range(n):
        if form == "full":
            cv, cb, dv, db = v2[i], v2[i] - 1.0, tr[i], 1.0
        else:  # not1 / wz
            v_inf = (form == "wz" and i < len(scene.material.v_inf)
                     and scene.material.v_inf[i])
            r_inf = (form == "wz" and i < len(scene.material.rho_inf)
                     and scene.material.rho_inf[i])
            cv = 1.0 if v_inf else v2[i] / (v2[i] - 1.0)
            cb = 1.0
            dv = 1.0
            db = 0.5 if r_inf else 1.0 / tr[i]
        for j in range(n):
            if deriv:
                vb_k = cb * (2.0 * kappa * VB0blk[i][j] + kappa ** 2 * VB[i][j])
                vv_k = cb * (2.0 * kappa * N0blk[i][j] + kappa ** 2 * N[i][j])
                bv_k = -dv * BV[i][j]
                bb_k = -dv * BB[i][j]
            else:
                vv_k = cb * kappa ** 2 * N[i][j]
                vb_k = cb * kappa ** 2 * VB[i][j]
                bv_k = -dv * BV[i][j]
                bb_k = -dv * BB[i][j]
                if i == j:
                    vv_k = vv_k + cv * np.eye(vv_k.shape[0])
                    bb_k = bb_k + db * np.eye(bb_k.shape[0])
            vv[i][j], vb[i][j], bv[i][j], bb[i][j] = vv_k, vb_k, bv_k, bb_k
    m = np.block([
        [np.block(vv), np.block(vb)],
        [np.block(bv), np.block(bb)],
    ])
    w = _stack_weights(scene, e ** 3, e ** 2)
    return QMatrix(matrix=m, kappa=kappa, eps=e, form=form, weights=w,
                   nv=scene.volume.n, nb=scene.surface.n, n_inclusions=n,
                   materials=(tuple(v2), tuple(rho)))


# ---------------------------------------------------------------------------
# rescaled reference-domain pencil
# ---------------------------------------------------------------------------

def _shifted(quad, offset):
    if not np.any(offset):
        return quad
    cls = type(quad)
    kw = dict(nodes=quad.nodes + offset, weights=quad.weights, shape_tag=quad.shape_tag)
    if hasattr(quad, "normals"):
        kw["normals"] = quad.normals
    return cls(**kw)


def assemble_rescaled(kappa, eps: float, case_id: int, scene: Scene,
                      split: bool = True, deriv: bool = False) -> QMatrix:
    """Reference-domain pencil M^(a,b,c) of the material case at scale eps."""
    if case_id not in CASE_EXPONENTS:
        raise PencilError(f"unsupported material case {case_id!r}")
    if eps <= 0:
        raise PencilError("eps must be positive")
    a, b, c = CASE_EXPONENTS[case_id]
    d = b + c - a
    mat = scene.material
    if mat.case != case_id:
        raise PencilError(f"scene material case {mat.case!r} != requested {case_id}")
    v2e, rhoe = (x[0] for x in scene.materials_at(eps))
    beta = (1.0 - rhoe) / (1.0 + rhoe)
    # scaled interior speed: v^2(eps)/eps^a restated from the truncated law
    if case_id in (1, 4):
        v2_scaled = mat.v2 + mat.v12 * eps          # v^2(eps) eps^-2
    elif case_id == 2:
        v2_scaled = 1.0 + mat.v12 * eps             # a = 0
    else:
        v2_scaled = mat.v2 + mat.v12 * eps          # v^2(eps) eps^-1

    kappa = complex(kappa)
    z = eps * kappa
    n = scene.n_inclusions
    surf, vol = scene.surface, scene.volume
    offs = scene.centers / eps

    vv = [[None] * n for _ in range(n)]
    vb = [[None] * n for _ in range(n)]
    bv = [[None] * n for _ in range(n)]
    bb = [[None] * n for _ in range(n)]
    c_vv = (v2e - 1.0) * eps ** (2 - a)
    c_vb = (v2e - 1.0) * eps ** (1 - b)
    c_bv = beta * eps ** (1 - c)
    c_bb = eps ** (-d)
    for i in range(n):
        for j in range(n):
            same = i == j
            off = offs[i] - offs[j]
            ti_s, ti_v = _shifted(surf, off), _shifted(vol, off)
            if deriv:
                # chain rule: d/d kappa = explicit kappa factors + eps * d/dz
                nb_ = ops.n_block(z, ti_v, vol, same)
                nb_dz = ops.n_block_dz(z, ti_v, vol, same)
                sl = ops.one_sl_block(z, ti_v, surf)
                sl_dz = ops.one_sl_block_dz(z, ti_v, surf)
                vv[i][j] = c_vv * (2.0 * kappa * nb_ + kappa ** 2 * eps * nb_dz)
                vb[i][j] = c_vb * (2.0 * kappa * sl + kappa ** 2 * eps * sl_dz)
                bv[i][j] = c_bv * eps * ops.g1n_block_dz(z, ti_s, vol)
                bb[i][j] = c_bb * beta * eps * ops.g1sl_block_dz(z, ti_s, surf, same)
            else:
                vv[i][j] = c_vv * kappa ** 2 * ops.n_block(z, ti_v, vol, same)
                vb[i][j] = c_vb * kappa ** 2 * ops.one_sl_block(z, ti_v, surf)
                bv[i][j] = c_bv * ops.g1n_block(z, ti_s, vol)
                bb[i][j] = c_bb * beta * ops.g1sl_block(z, ti_s, surf, same)
                if same:
                    vv[i][j] = vv[i][j] + v2_scaled * np.eye(vol.n)
                    bb[i][j] = bb[i][j] + 0.5 * c_bb * np.eye(surf.n)
    m = np.block([
        [np.block(vv), np.block(vb)],
        [np.block(bv), np.block(bb)],
    ])

    col_t = None
    s = CASE_SPLIT[case_id]
    if split and s:
        refs = ops.reference_operators(scene)
        mix = refs.Pstar + eps ** s * refs.Pperp
        t = sla.block_diag(*([np.eye(vol.n)] * n + [mix] * n))
        m = m @ t
        col_t = t

    w = _stack_weights(scene, 1.0, 1.0)
    return QMatrix(matrix=m, kappa=kappa, eps=eps, form=f"rescaled{(a, b, c)}",
                   weights=w, nv=vol.n, nb=surf.n, n_inclusions=n,
                   materials=((v2e,) * n, (rhoe,) * n), col_transform=col_t)


def dump_pencil(q: QMatrix, path):
    """Debug dump of a pencil as ASCII lines ``i j re im``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# form={q.form} kappa={q.kappa} eps={q.eps} dim={q.dim}\n")
        for i in range(q.dim):
            row = q.matrix[i]
            for j in range(q.dim):
                v = row[j]
                fh.write(f"{i} {j} {v.real:.17g} {v.imag:.17g}\n")


# ---------------------------------------------------------------------------
# smallest singular value
# ---------------------------------------------------------------------------

def smallest_singular(q: QMatrix, dense_cutoff: int = 800, iters: int = 16):
    """Smallest singular value and right singular vector of the pencil,
    in the quadrature-weighted norms."""
    dmat = np.sqrt(q.weights)
    a = q.matrix * (dmat[:, None] / dmat[None, :])
    n = a.shape[0]
    if n <= dense_cutoff:
        try:
            _, s, vh = sla.svd(a)
        except sla.LinAlgError:
            _, s, vh = sla.svd(a, lapack_driver="gesvd")
        sigma = float(s[-1])
        x = vh[-1].conj()
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lu = sla.lu_factor(a)
            v = np.ones(n, dtype=complex) / np.sqrt(n)
            for _ in range(iters):
                y = sla.lu_solve(lu, v, trans=2)   # A^H y = v
                x = sla.lu_solve(lu, y)            # A x = y
                nrm = np.linalg.norm(x)
                if not np.isfinite(nrm) or nrm == 0.0:
                    return 0.0, v / dmat
                v = x / nrm
        sigma = float(np.linalg.norm(a @ v))
        x = v
    return sigma, x / dmat
