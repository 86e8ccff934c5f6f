"""Resonance location: grid scan for candidates, augmented-Newton refinement,
and branch tracking over a scale sweep.

A resonance is a wavenumber where the pencil acquires a nontrivial kernel;
the scan detects dips of the smallest singular value on a rectangular grid in
the lower half-plane, and refinement runs Newton on the bordered system

    [ Q(k) x ]          [ Q(k)   Q'(k) x ] [dx]     [ -Q x      ]
    [ c^H x - 1 ] = 0,  [ c^H    0      ] [dk]  =  [ 1 - c^H x ],

whose Jacobian uses the analytic wavenumber derivative of every kernel.  The
pipeline is deterministic: fixed grids, fixed iteration order, no random
seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .geometry import Scene
from .qfunction import QMatrix, assemble_q, assemble_rescaled, smallest_singular


class FinderError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchWindow:
    re_min: float
    re_max: float
    im_min: float
    im_max: float = 1e-3
    n_re: int = 12
    n_im: int = 8

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("empty search window")
        if self.n_re < 8 or self.n_im < 8:
            raise ValueError("grid must be at least 8x8")

    def grid(self):
        re = np.linspace(self.re_min, self.re_max, self.n_re)
        im = np.linspace(self.im_min, self.im_max, self.n_im)
        return re[:, None] + 1j * im[None, :]


@dataclass(frozen=True, eq=False)
class Resonance:
    kappa: complex
    vector: np.ndarray      # physical kernel vector (u (+) phi), unit norm
    residual: float         # ||Q x|| / ||Q||
    newton_iters: int
    eps: float
    case_id: int | str
    sigma_min: float = np.nan


def build_pencil(kappa, eps, case_id, scene: Scene, deriv=False,
                 split=False) -> QMatrix:
    """Material-case dispatch: rescaled reference pencil for the four
    asymptotic cases, physically placed full pencil otherwise."""
    if case_id in (1, 2, 3, 4):
        return assemble_rescaled(kappa, eps, case_id, scene, split=split,
                                 deriv=deriv)
    return assemble_q(kappa, scene, form="full", deriv=deriv, eps=eps)


def scan(window: SearchWindow, eps, case_id, scene: Scene):
    """Strict local minima of sigma_min on the window grid, below the
    adaptive threshold median/10.  Returns candidate wavenumbers."""
    grid = window.grid()
    sig = np.empty(grid.shape)
    for idx in np.ndindex(grid.shape):
        q = build_pencil(grid[idx], eps, case_id, scene)
        sig[idx], _ = smallest_singular(q)
    thresh = np.median(sig) / 10.0
    cands = []
    nr, ni = grid.shape
    for i in range(nr):
        for j in range(ni):
            v = sig[i, j]
            if v >= thresh:
                continue
            neigh = [sig[i + di, j + dj]
                     for di in (-1, 0, 1) for dj in (-1, 0, 1)
                     if (di or dj) and 0 <= i + di < nr and 0 <= j + dj < ni]
            if all(v < x for x in neigh):
                cands.append(complex(grid[i, j]))
    cands.sort(key=lambda z: (z.real, z.imag))
    return cands


def refine(kappa0, eps, case_id, scene: Scene, tol: float = 1e-11,
           max_iters: int = 25) -> Resonance:
    """Newton on the bordered system from a scan candidate."""
    q = build_pencil(kappa0, eps, case_id, scene)
    sigma, x = smallest_singular(q)
    nrm_q = np.linalg.norm(q.matrix, np.inf)
    c = x.conj() / (np.vdot(x, x).real)     # c^H x = 1 at the start
    kappa = complex(kappa0)
    iters = 0
    for iters in range(1, max_iters + 1):
        res = q.matrix @ x
        resn = np.linalg.norm(res) / nrm_q
        if resn < tol and abs(c @ x - 1.0) < 1e-12:
            iters -= 1
            break
        dq = build_pencil(kappa, eps, case_id, scene, deriv=True)
        n = q.dim
        jac = np.zeros((n + 1, n + 1), dtype=complex)
        jac[:n, :n] = q.matrix
        jac[:n, n] = dq.matrix @ x
        jac[n, :n] = c
        rhs = np.concatenate([-res, [1.0 - c @ x]])
        try:
            step = sla.solve(jac, rhs)
        except sla.LinAlgError as exc:
            raise FinderError(f"singular Newton system at kappa={kappa}") from exc
        x = x + step[:n]
        kappa = kappa + complex(step[n])
        if not np.isfinite(kappa) or abs(kappa - kappa0) > 10.0 * (1.0 + abs(kappa0)):
            raise FinderError(f"Newton diverged from seed {kappa0}")
        q = build_pencil(kappa, eps, case_id, scene)
    else:
        raise FinderError(f"no convergence in {max_iters} iterations from {kappa0}")
    phys = q.to_physical(x)
    phys = phys / np.linalg.norm(phys)
    resn = np.linalg.norm(q.matrix @ x) / (nrm_q * np.linalg.norm(x))
    return Resonance(kappa=kappa, vector=phys, residual=float(resn),
                     newton_iters=iters, eps=float(eps), case_id=case_id,
                     sigma_min=float(sigma))


def sweep(eps_list, case_id, scene: Scene, seed=None, window: SearchWindow = None,
          asym=None, tol: float = 1e-11):
    """Track one resonance branch over decreasing eps.

    The first scale is seeded from ``seed``, from ``asym(eps)`` when given,
    or from a window scan; later scales reuse the previous kappa.  Returns
    the list of Resonance objects and the fitted log-log slope of
    |kappa(eps) - asym(eps)| when an asymptotic model is supplied.
    """
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise FinderError("eps_list must be strictly decreasing")
    rows = []
    kappa = None
    for eps in eps_list:
        if kappa is None:
            if seed is not None:
                start = complex(seed)
            elif asym is not None:
                start = complex(asym(eps))
            elif window is not None:
                cands = scan(window, eps, case_id, scene)
                if not cands:
                    raise FinderError("scan produced no candidates")
                start = cands[0]
            else:
                raise FinderError("sweep needs a seed, asym model, or window")
        else:
            start = kappa
        r = refine(start, eps, case_id, scene, tol=tol)
        if window is not None and not (
                window.re_min - 0.5 <= r.kappa.real <= window.re_max + 0.5):
            raise FinderError(f"branch left the window at eps={eps}")
        rows.append(r)
        kappa = r.kappa
    slope = None
    if asym is not None and len(rows) >= 2:
        gaps = np.array([abs(r.kappa - asym(r.eps)) for r in rows])
        if np.all(gaps > 0):
            slope = float(np.polyfit(np.log(eps_list), np.log(gaps), 1)[0])
    return rows, slope
