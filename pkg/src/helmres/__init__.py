"""helmres: a boundary-integral laboratory for acoustic transmission
resonances of small, highly contrasted inclusions.

The package assembles the volume/boundary operator pencil of the acoustic
transmission problem, locates scattering resonances as its kernel points in
the lower complex half-plane, evaluates closed-form small-scale expansions
of those resonances for four material scaling regimes, and cross-validates
the two routes.
"""

from .backend import BACKEND
from .geometry import (GeometryError, Material, Scene, SurfaceQuadrature,
                       VolumeQuadrature, load_mesh,
                       make_ball_volume_quadrature,
                       make_mesh_volume_quadrature,
                       make_unit_sphere_quadrature, place, tilde_rho)
from .kernels import (KernelKind, SeriesKind, green, green_normal_deriv,
                      series_coefficient)
from .operators import (MinnaertData, NeumannPair, OperatorBlock,
                        ReferenceOperators, SpectralResult, assemble,
                        assemble_series, minnaert, neumann_eigenpairs,
                        newton_spectrum, projector, reference_operators)
from .qfunction import (QMatrix, assemble_q, assemble_rescaled,
                        smallest_singular)
from .finder import FinderError, Resonance, SearchWindow, refine, scan, sweep
from .asymptotics import (ExpansionResult, expand_case1, expand_case2,
                          expand_case3, expand_case4, expand_case4_zero)
from .resolvent import (GaussianSource, ProbeField, apply_resolvent_difference,
                        check_transmission, pseudo_resolvent_residual,
                        total_field)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ExpansionResult", "FinderError", "GaussianSource",
    "GeometryError", "KernelKind", "Material", "MinnaertData", "NeumannPair",
    "OperatorBlock", "ProbeField", "QMatrix", "ReferenceOperators",
    "Resonance", "Scene", "SearchWindow", "SeriesKind", "SpectralResult",
    "SurfaceQuadrature", "VolumeQuadrature", "apply_resolvent_difference",
    "assemble", "assemble_q", "assemble_rescaled", "assemble_series",
    "check_transmission", "expand_case1", "expand_case2", "expand_case3",
    "expand_case4", "expand_case4_zero", "green", "green_normal_deriv",
    "load_mesh", "make_ball_volume_quadrature", "make_mesh_volume_quadrature",
    "make_unit_sphere_quadrature", "minnaert", "neumann_eigenpairs",
    "newton_spectrum", "place", "projector", "pseudo_resolvent_residual",
    "refine", "reference_operators", "scan", "series_coefficient",
    "smallest_singular", "sweep", "tilde_rho", "total_field",
]
