"""Helmholtz fundamental solution, normal derivatives, and low-order
wavenumber-series coefficients.

Series conventions (z the wavenumber, r = |x-y|, n the target normal):

* volume kernel  exp(izr)/(4 pi r) = 1/(4 pi r) + i z/(4 pi) + O(z^2), so the
  first-order volume and single-layer blocks are the rank-one i/(4 pi)
  couplings ``N1`` and ``SL1``;
* boundary kernel d/dn_x exp(izr)/(4 pi r) expands as
  k0 + z^2 * k2(x, y) + z^3 * k3(x, y) + O(z^4) with
  k2 = -(n.(x-y))/(8 pi r) and k3 = -i (n.(x-y))/(12 pi).

``K2star`` is the z^2 coefficient k2.  ``K3star`` is defined with the
opposite sign of k3, i.e. K3star = +i (n.(x-y))/(12 pi), so that the
projected identities P* K2* P* = -(1/w_M^2) P* and
P* K3* P* = +i(|Omega|/4 pi) P* hold with a uniform convention; the
boundary-kernel series then reads  k0 + z^2 K2star - z^3 K3star.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import backend


class KernelKind(Enum):
    SingleLayer = "single_layer"
    NormalDerivAtTarget = "normal_deriv_target"
    NormalDerivAtSource = "normal_deriv_source"


class SeriesKind(Enum):
    N1 = "N1"
    SL1 = "SL1"
    K2star = "K2star"
    K3star = "K3star"


class KernelDomainError(ValueError):
    pass


def green(kappa, r):
    """exp(i kappa r)/(4 pi r) for r > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise KernelDomainError("green requires r > 0")
    return np.exp(1j * kappa * r) / (4.0 * np.pi * r)


def green_normal_deriv(kappa, x, y, normal, at_target=True):
    """Directional derivative of `green` along ``normal``.

    ``at_target=True`` differentiates in x, otherwise in y.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d = x - y
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise KernelDomainError("coincident points")
    sign = 1.0 if at_target else -1.0
    nd = float(np.dot(np.asarray(normal, float), d))
    return sign * (1j * kappa - 1.0 / r) * np.exp(1j * kappa * r) / (4.0 * np.pi * r) * nd / r


def series_coefficient(kind: SeriesKind, x=None, y=None, normal=None):
    """Pointwise series coefficient; see the module docstring for signs."""
    if kind in (SeriesKind.N1, SeriesKind.SL1):
        return 0.25j / np.pi
    if normal is None:
        raise KernelDomainError("K-series coefficients need the target normal")
    d = np.asarray(x, float) - np.asarray(y, float)
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise KernelDomainError("coincident points")
    nd = float(np.dot(np.asarray(normal, float), d))
    if kind is SeriesKind.K2star:
        return -nd / (8.0 * np.pi * r)
    if kind is SeriesKind.K3star:
        return 1j * nd / (12.0 * np.pi)
    raise KernelDomainError(f"unknown series kind {kind}")


# ---------------------------------------------------------------------------
# singular-cell (diagonal) rules
#
# Volume cells are replaced by the equal-volume ball of radius a, surface
# cells by the equal-area flat disk of radius a; both integrals have closed
# forms for every wavenumber, with Taylor branches near z = 0 to avoid
# cancellation.  The boundary normal-derivative kernel integrates to zero
# over the flat disk for every z, so its diagonal carries only the Gauss-rule
# correction applied at assembly time.
# ---------------------------------------------------------------------------

def ball_radius(volume_weight):
    return (3.0 * np.asarray(volume_weight) / (4.0 * np.pi)) ** (1.0 / 3.0)


def disk_radius(area_weight):
    return np.sqrt(np.asarray(area_weight) / np.pi)


def ball_self_integral(z, a):
    """Integral of exp(iz|y|)/(4 pi |y|) over the ball |y| < a."""
    a = np.asarray(a, dtype=float)
    if z == 0:
        return a * a / 2.0
    za = z * a
    small = np.abs(za) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = (np.exp(1j * za) * (1.0 - 1j * za) - 1.0) / (z * z)
    series = a * a / 2.0 + 1j * z * a ** 3 / 3.0 - z * z * a ** 4 / 8.0
    return np.where(small, series, exact)


def ball_self_integral_dz(z, a):
    """d/dz of `ball_self_integral`."""
    a = np.asarray(a, dtype=float)
    if z == 0:
        return 1j * a ** 3 / 3.0
    za = z * a
    small = np.abs(za) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        h = (np.exp(1j * za) * (1.0 - 1j * za) - 1.0) / (z * z)
        exact = a * a * np.exp(1j * za) / z - 2.0 * h / z
    series = 1j * a ** 3 / 3.0 - z * a ** 4 / 4.0 - 1j * z * z * a ** 5 / 10.0
    return np.where(small, series, exact)


def disk_self_integral(z, a):
    """Integral of exp(iz|y|)/(4 pi |y|) over the flat disk |y| < a."""
    a = np.asarray(a, dtype=float)
    if z == 0:
        return a / 2.0
    za = z * a
    small = np.abs(za) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = (np.exp(1j * za) - 1.0) / (2j * z)
    series = a / 2.0 + 1j * z * a * a / 4.0 - z * z * a ** 3 / 12.0
    return np.where(small, series, exact)


def disk_self_integral_dz(z, a):
    """d/dz of `disk_self_integral`."""
    a = np.asarray(a, dtype=float)
    if z == 0:
        return 1j * a * a / 4.0
    za = z * a
    small = np.abs(za) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        s = (np.exp(1j * za) - 1.0) / (2j * z)
        exact = a * np.exp(1j * za) / (2.0 * z) - s / z
    series = 1j * a * a / 4.0 - z * a ** 3 / 6.0 - 1j * z * z * a ** 4 / 16.0
    return np.where(small, series, exact)


# re-exported pairwise evaluators (backend-selected)
pairwise_green = backend.green
pairwise_green_dz = backend.green_dz
pairwise_green_dn = backend.green_dn
pairwise_green_dn_dz = backend.green_dn_dz
