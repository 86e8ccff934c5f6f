"""NumPy reference implementation of the pairwise kernel evaluations.

These four functions are the assembly hot spots; `helmres.backend` swaps in
the Cython build when available.  All return dense complex matrices with one
row per target point and one column per source point.  Entries at coincident
points (``same_points=True`` diagonals) are set to zero; the operator
assembly overwrites them with the closed-form singular-cell rules.
"""

import numpy as np


def _dist(targets, sources, same_points):
    d = targets[:, None, :] - sources[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    if same_points:
        np.fill_diagonal(r, 1.0)   # placeholder; the diagonal is zeroed below
    return d, r


def _zero_diag(out, same_points):
    if same_points:
        np.fill_diagonal(out, 0.0)
    return out


def green(z, targets, sources, same_points=False):
    """exp(i z r) / (4 pi r)."""
    _, r = _dist(targets, sources, same_points)
    return _zero_diag(np.exp(1j * z * r) / (4.0 * np.pi * r), same_points)


def green_dz(z, targets, sources, same_points=False):
    """d/dz of `green`: (i/4pi) exp(i z r)."""
    _, r = _dist(targets, sources, same_points)
    return _zero_diag((0.25j / np.pi) * np.exp(1j * z * r), same_points)


def green_dn(z, targets, sources, normals, at_target=True, same_points=False):
    """Normal derivative of `green`.

    ``at_target``: differentiate in the target point along ``normals`` (one
    per target); otherwise in the source point along ``normals`` (one per
    source).
    """
    d, r = _dist(targets, sources, same_points)
    if at_target:
        nd = np.einsum("ik,ijk->ij", normals, d)
        sign = 1.0
    else:
        nd = np.einsum("jk,ijk->ij", normals, d)
        sign = -1.0
    out = sign * (1j * z - 1.0 / r) * np.exp(1j * z * r) \
        / (4.0 * np.pi * r) * (nd / r)
    return _zero_diag(out, same_points)


def green_dn_dz(z, targets, sources, normals, at_target=True, same_points=False):
    """d/dz of `green_dn`: -(z/4pi) exp(i z r) (n.(x-y))/r, with the same
    sign convention as `green_dn`."""
    d, r = _dist(targets, sources, same_points)
    if at_target:
        nd = np.einsum("ik,ijk->ij", normals, d)
        sign = 1.0
    else:
        nd = np.einsum("jk,ijk->ij", normals, d)
        sign = -1.0
    out = sign * (-z / (4.0 * np.pi)) * np.exp(1j * z * r) * (nd / r)
    return _zero_diag(out, same_points)
