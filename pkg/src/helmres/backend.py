"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
always available.  Set ``HELMRES_BACKEND=python`` (or ``compiled``) to force
a choice, e.g. for benchmarking.
"""

import os

from . import _kernels_py

_FORCED = os.environ.get("HELMRES_BACKEND", "").strip().lower()

if _FORCED in ("python", "numpy"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        _impl = _kernels_py
        BACKEND = "python"


def _c_contig(a):
    import numpy as np

    return np.ascontiguousarray(a, dtype=np.float64)


def green(z, targets, sources, same_points=False):
    return _impl.green(complex(z), _c_contig(targets), _c_contig(sources), same_points)


def green_dz(z, targets, sources, same_points=False):
    return _impl.green_dz(complex(z), _c_contig(targets), _c_contig(sources), same_points)


def green_dn(z, targets, sources, normals, at_target=True, same_points=False):
    return _impl.green_dn(
        complex(z), _c_contig(targets), _c_contig(sources), _c_contig(normals),
        at_target, same_points,
    )


def green_dn_dz(z, targets, sources, normals, at_target=True, same_points=False):
    return _impl.green_dn_dz(
        complex(z), _c_contig(targets), _c_contig(sources), _c_contig(normals),
        at_target, same_points,
    )
