"""Closed-form leading and first-order resonance coefficients for the four
material regimes, plus the square-root branch emerging from zero energy.

All inner products are quadrature-weighted; boundary traces of volume
potentials are direct kernel sums from volume to boundary nodes.  Every
coefficient is assembled from the cached unit-scale operator blocks, so a
result is a pure function of the reference shape and the material scalars.

The zero-energy branch is computed by the reduction-to-a-scalar route: the
pencil is projected onto the complement of the symmetry vector
W = 1 (+) v^2 S0^{-1} 1, giving a scalar function f(eps, kappa) whose Taylor
coefficients determine the branch

    kappa_pm(eps) = +- z0 (1 + kappa1 * eps) sqrt(eps) + O(eps^2),
    z0 = v sqrt(rho) w_M,
    kappa1 = (f20 + f12 z0^2 + f04 z0^4) / (2 c0 |Omega| z0^2),

where fmn is the (eps^m kappa^n) Taylor coefficient of f.  All three terms
contribute at the same order once z0 = O(1); the coefficients come from two
bordered solves of the zeroth-order block (one for the eps-slope of the
kernel pair, one for the kappa^2-curvature).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .geometry import Scene
from .operators import ReferenceOperators, reference_operators


class ExpansionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ExpansionResult:
    case_id: int | str
    kappa0: float
    kappa1_plus: complex
    kappa1_minus: complex
    sqrt_eps_branch: bool = False
    kappa1_relative: float | None = None     # kappa1 of the sqrt(eps) branch
    intermediates: dict[str, Any] = field(default_factory=dict)

    def kappa(self, eps: float, branch: int = +1) -> complex:
        """Predicted resonance at scale eps on the +/- branch."""
        if self.sqrt_eps_branch:
            return branch * self.kappa0 * (1.0 + self.kappa1_relative * eps) * np.sqrt(eps)
        k1 = self.kappa1_plus if branch > 0 else self.kappa1_minus
        return branch * self.kappa0 + k1 * eps

    def to_dict(self):
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, np.ndarray):
                return None
            return v
        inter = {k: enc(v) for k, v in self.intermediates.items() if enc(v) is not None}
        return {
            "case": self.case_id,
            "kappa0": self.kappa0,
            "kappa1_plus": enc(complex(self.kappa1_plus)),
            "kappa1_minus": enc(complex(self.kappa1_minus)),
            "sqrt_eps_branch": self.sqrt_eps_branch,
            "kappa1_relative": self.kappa1_relative,
            "intermediates": inter,
        }


def _require_case(scene: Scene, case_id: int):
    if scene.material.case != case_id:
        raise ExpansionError(
            f"scene material case {scene.material.case!r}, expected {case_id}")


def _simple_gap(values, index, rel=1e-6):
    lam = values[index]
    for j, other in enumerate(values):
        if j != index and abs(other - lam) <= rel * abs(lam):
            return False
    return True


# ---------------------------------------------------------------------------
# case 1: soft-speed scaling, volume modes of the Newton operator
# ---------------------------------------------------------------------------

def expand_case1(scene: Scene, mode_index: int = 0) -> ExpansionResult:
    _require_case(scene, 1)
    mat = scene.material
    v = np.sqrt(mat.v2)
    refs = reference_operators(scene)
    modes = refs.newton_spectrum(mode_index + 4)
    lam = float(modes.eigenvalues[mode_index])
    if not _simple_gap(modes.eigenvalues, mode_index):
        raise ExpansionError(f"Newton eigenvalue {lam} is not simple")
    e = modes.eigenvectors[:, mode_index]
    one_e = float(np.sum(refs.wv * e))
    g0e = refs.dirichlet_trace_of_mode(e, lam)
    g1e = refs.neumann_trace_of_mode(e, lam)
    trace_pair = float(np.sum(refs.ws * g0e * g1e))
    kappa0 = v / np.sqrt(lam)
    real_part = mat.v12 / (2.0 * v * np.sqrt(lam)) \
        - 0.5 * mat.rho1 * v * np.sqrt(lam) * trace_pair
    imag_part = -1j * mat.v2 / (8.0 * np.pi * lam ** 2) * one_e ** 2
    return ExpansionResult(
        case_id=1, kappa0=kappa0,
        kappa1_plus=real_part + imag_part,
        kappa1_minus=-real_part + imag_part,
        intermediates={
            "lambda": lam, "one_e": one_e, "one_e_sq": one_e ** 2,
            "trace_pair": trace_pair, "v": float(v),
            "gamma0_e": g0e, "gamma1_e": g1e,
        },
    )


# ---------------------------------------------------------------------------
# case 2: soft-density scaling, the surface (Minnaert) mode
# ---------------------------------------------------------------------------

def _phi_ring(refs: ReferenceOperators, rho_omega2: float):
    """phi = S0^{-1} 1 - rho*w_M^2 * (1/2 + g1SL0)_perp^{-1} P_perp K2* psi."""
    corr = refs.inv_half_kstar_perp(refs.K2s @ refs.psi)
    return refs.psi - rho_omega2 * corr, corr


def expand_case2(scene: Scene) -> ExpansionResult:
    _require_case(scene, 2)
    mat = scene.material
    refs = reference_operators(scene)
    md = refs.minnaert()
    omega_m = np.sqrt(md.omega_m2)
    kappa0 = np.sqrt(mat.rho) * omega_m
    phi0, corr = _phi_ring(refs, mat.rho * md.omega_m2)
    real_part = 0.5 * mat.v12 * kappa0
    imag_part = -1j * md.volume / (8.0 * np.pi) * mat.rho * md.omega_m2 ** 2
    return ExpansionResult(
        case_id=2, kappa0=float(kappa0),
        kappa1_plus=real_part + imag_part,
        kappa1_minus=-real_part + imag_part,
        intermediates={
            "omega_m2": md.omega_m2, "c_omega": md.c_omega, "volume": md.volume,
            "phi_ring": phi0, "phi_perp": corr,
        },
    )


# ---------------------------------------------------------------------------
# case 3: balanced scaling; first order from the 2x2 bordered system
# ---------------------------------------------------------------------------

def expand_case3(scene: Scene) -> ExpansionResult:
    _require_case(scene, 3)
    mat = scene.material
    refs = reference_operators(scene)
    md = refs.minnaert()
    v2 = mat.v2
    rho = mat.rho
    omega_m2 = md.omega_m2
    kappa0 = np.sqrt(v2 * rho * omega_m2)
    vol, c_om = md.volume, md.c_omega
    wv, ws = refs.wv, refs.ws
    psi = refs.psi

    u0 = rho * omega_m2 * np.ones(scene.volume.n)
    phi_perp0 = refs.inv_half_kstar_perp(refs.g1N0 @ np.ones(scene.volume.n))
    phi0 = psi - rho * omega_m2 * phi_perp0

    def bracket(a, b):
        # [a, b]_{-1/2} = <S0 a, b> with quadrature weights
        return np.sum(ws * np.conj(refs.S0 @ a) * b)

    # discrete ingredients of the bordered first-order system; every
    # coefficient is assembled, no continuum identity is substituted, so the
    # reconstruction solves the derivative system to solver precision
    s0vec = refs.oneSL0 @ (refs.Pstar @ phi0)        # field of the P-mode
    g1n_s0 = refs.g1N0 @ s0vec
    zeta = refs.inv_half_kstar_perp(g1n_s0)

    results = {}
    for branch in (+1, -1):
        kc = branch * kappa0
        # order-eps block applied to (u0, phi0)
        slp = s0vec
        sl1p = refs.SL1 @ (refs.Pstar @ phi0)
        slperp = refs.oneSL0 @ (refs.Pperp @ phi0)
        u_hat = -(mat.v12 * u0 - kc ** 2 * (refs.N0 @ u0)
                  + kc ** 2 * (v2 * slp - kc * sl1p) - kc ** 2 * slperp)
        phi_hat = -(-2.0 * rho * (refs.g1N0 @ u0)
                    + kc ** 2 * (refs.K2s @ (refs.Pstar @ phi0))
                    - 2.0 * rho * (refs.Kstar0 @ (refs.Pperp @ phi0))
                    + (0.5 * mat.rho1 - rho ** 2) * (refs.Pstar @ phi0))
        # unknowns (kappa_hat, c_phi): volume row gives
        #   u1 = (u_hat + kappa_hat * s0vec) / v2,
        # the P-component of the boundary row and the normalization close
        # the 2x2 system
        phi_hat_perp = refs.inv_half_kstar_perp(
            phi_hat - (refs.g1N0 @ u_hat) / v2)
        m11 = np.sum(ws * g1n_s0) / v2
        m12 = rho * c_om
        r1 = np.sum(ws * (phi_hat - (refs.g1N0 @ u_hat) / v2))
        m21 = (np.sum(wv * np.conj(u0) * s0vec) - bracket(phi0, zeta)) / v2
        m22 = bracket(phi0, psi)
        r2 = -np.sum(wv * np.conj(u0) * u_hat) / v2 \
            - bracket(phi0, phi_hat_perp)
        det = m11 * m22 - m12 * m21
        if abs(det) < 1e-12 * max(abs(m11 * m22), abs(m12 * m21), 1e-30):
            raise ExpansionError(
                "degenerate first-order system (discretization failure)")
        kap_hat, c_phi = np.linalg.solve(np.array([[m11, m12], [m21, m22]]),
                                         np.array([r1, r2]))
        k1 = branch * (kap_hat - c_phi * kappa0 ** 2) / (2.0 * kappa0)
        u1 = (u_hat + kap_hat * s0vec) / v2
        phi1 = c_phi * psi + phi_hat_perp - kap_hat / v2 * zeta
        results[branch] = (complex(k1), u1, phi1, u_hat, phi_hat)

    return ExpansionResult(
        case_id=3, kappa0=float(kappa0),
        kappa1_plus=results[+1][0],
        kappa1_minus=results[-1][0],
        intermediates={
            "omega_m2": omega_m2, "c_omega": c_om, "volume": vol,
            "u_ring": u0, "phi_ring": phi0, "phi_perp": phi_perp0,
            "u1_plus": results[+1][1], "phi1_plus": results[+1][2],
            "rhs_u_plus": results[+1][3], "rhs_phi_plus": results[+1][4],
            "u1_minus": results[-1][1], "phi1_minus": results[-1][2],
            "rhs_u_minus": results[-1][3], "rhs_phi_minus": results[-1][4],
        },
    )


# ---------------------------------------------------------------------------
# case 4: positive Neumann modes and the zero-energy sqrt(eps) branch
# ---------------------------------------------------------------------------

def expand_case4(scene: Scene, mode_index: int = 0) -> ExpansionResult:
    _require_case(scene, 4)
    mat = scene.material
    refs = reference_operators(scene)
    pairs = refs.neumann_eigenpairs(mode_index + 3)
    if mode_index >= len(pairs):
        raise ExpansionError("requested Neumann mode not found")
    pair = pairs[mode_index]
    nu = pair.nu

    def pairing_of(p):
        g0u = p.nu * (refs.g0N0 @ p.u + refs.S0 @ p.phi)
        return float(np.real(np.sum(refs.ws * g0u * p.phi))), g0u

    # symmetry-degenerate clusters are admissible when every member yields
    # the same trace pairing; a spread signals a genuinely mixed cluster
    cluster = [p for p in pairs if abs(p.nu - nu) <= 1e-6 * nu]
    vals = [pairing_of(p)[0] for p in cluster]
    if len(vals) > 1 and (max(vals) - min(vals)) > 0.02 * abs(np.mean(vals)):
        raise ExpansionError(
            f"Neumann eigenvalue {nu} is degenerate with inconsistent modes")
    v = np.sqrt(mat.v2)
    pairing, g0u = pairing_of(pair)
    kappa0 = v * np.sqrt(nu)
    k1 = 0.5 * np.sqrt(nu) * (mat.rho * v * pairing - mat.v12 / v)
    return ExpansionResult(
        case_id=4, kappa0=float(kappa0),
        kappa1_plus=complex(k1), kappa1_minus=complex(-k1),
        intermediates={
            "nu": nu, "trace_pairing": pairing, "gamma0_u": g0u,
            "u": pair.u, "phi": pair.phi,
        },
    )


def expand_case4_zero(scene: Scene, c0: float = 1.0) -> ExpansionResult:
    """Square-root branch from the zero Neumann eigenvalue.

    The scalar-reduction Taylor coefficients are built from the kernel pair
    x0 = 0 (+) c0*psi and two bordered solves; kappa1 is independent of c0.
    """
    _require_case(scene, 4)
    mat = scene.material
    refs = reference_operators(scene)
    md = refs.minnaert()
    v2, rho, rho1, v12 = mat.v2, mat.rho, mat.rho1, mat.v12
    vol, c_om = md.volume, md.c_omega
    wv, ws = refs.wv, refs.ws
    nv, nb = scene.volume.n, scene.surface.n
    psi = refs.psi
    ones_v = np.ones(nv)

    def pair_w(u1, phi1, u2, phi2):
        # <u1 (+) phi1, u2 (+) phi2> with the S0-weighted boundary product
        s = np.sum(wv * np.conj(u1) * u2) if u1 is not None else 0.0
        if phi1 is not None:
            s = s + np.sum(ws * np.conj(refs.S0 @ phi1) * phi2)
        return s

    w_norm2 = vol + v2 ** 2 * c_om          # <W, W>, W = 1 (+) v^2 psi

    def apply_w_pairing(u, phi):
        s = 0.0
        if u is not None:
            s = s + np.sum(wv * u)
        if phi is not None:
            s = s + v2 * np.sum(ws * np.conj(refs.S0 @ psi) * phi)
        return s

    def solve_d0(u_star, phi_star):
        """Invert the projected zeroth-order block with zero normalization:
        u = u*/v^2,  P phi = 0,  P_perp phi from the boundary solve."""
        u = u_star / v2
        arg = phi_star - (refs.g1N0 @ u_star) / v2
        phi = refs.inv_half_kstar_perp(arg)
        return u, phi

    def project_off_w(u, phi):
        t = apply_w_pairing(u, phi) / w_norm2
        return (u - t * ones_v if u is not None else -t * ones_v,
                phi - t * v2 * psi if phi is not None else -t * v2 * psi)

    # eps-slope of the kernel pair: M10 x0 = 0 (+) (-2 rho c0 g1SL0 psi)
    m10_phi = -2.0 * rho * c0 * (refs.Kstar0 @ psi)
    u_star, phi_star = project_off_w(None, m10_phi)
    de_u, de_phi = solve_d0(-u_star, -phi_star)

    # kappa^2-curvature: M02 x0 = (-c0 * 1SL0 psi) (+) 0
    m02_u = -c0 * (refs.oneSL0 @ psi)
    u_star2, phi_star2 = project_off_w(m02_u, None)
    k2_u, k2_phi = solve_d0(-u_star2, -phi_star2)

    def apply_m10(u, phi):
        return (v12 * u,
                -2.0 * rho * (refs.g1N0 @ u + refs.Kstar0 @ phi))

    def apply_m20_x0():
        beta2 = 2.0 * rho ** 2 - 2.0 * rho1
        return (np.zeros(nv), beta2 * c0 * (refs.Kstar0 @ psi))

    def apply_m02(u, phi):
        return (-(refs.N0 @ u) - refs.oneSL0 @ phi, np.zeros(nb))

    # Taylor coefficients of the reduced scalar
    f10 = apply_w_pairing(*apply_m10(np.zeros(nv), c0 * psi))
    f02 = apply_w_pairing(*apply_m02(np.zeros(nv), c0 * psi))
    m20u, m20p = apply_m20_x0()
    m10u, m10p = apply_m10(de_u, de_phi)
    f20 = apply_w_pairing(m20u + m10u, m20p + m10p)
    a_u, a_p = apply_m10(k2_u, k2_phi)
    b_u, b_p = apply_m02(de_u, de_phi)
    f12 = apply_w_pairing(a_u + b_u, a_p + b_p)
    c_u, c_p = apply_m02(k2_u, k2_phi)
    f04 = apply_w_pairing(c_u, c_p)

    z0_sq = f10 / (-f02)                      # = v^2 rho w_M^2 up to quadrature
    z0 = np.sqrt(z0_sq)
    kappa1 = (f20 + f12 * z0_sq + f04 * z0_sq ** 2) / (2.0 * c0 * vol * z0_sq)
    return ExpansionResult(
        case_id=4, kappa0=float(np.real(z0)), sqrt_eps_branch=True,
        kappa1_plus=complex(kappa1), kappa1_minus=complex(kappa1),
        kappa1_relative=float(np.real(kappa1)),
        intermediates={
            "omega_m2": md.omega_m2, "volume": vol, "c_omega": c_om,
            "z0": complex(z0), "f10": complex(f10), "f02": complex(f02),
            "f20": complex(f20), "f12": complex(f12), "f04": complex(f04),
            "de_u0": de_u, "de_phi0": de_phi,
            "de_u0_scale": float(np.real(de_u[0])) if len(de_u) else 0.0,
        },
    )
