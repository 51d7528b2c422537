"""Minkowski and projective billiards, Binet-Legendre metrics and
projectivity tests for convex bodies."""

__version__ = "0.1.0"

from .bodies import (  # noqa: E402
    BoundaryPoint,
    Chord,
    Ellipsoid,
    GaugeBody,
    PBall,
    PerturbedBall,
    body_from_spec,
    boundary_point,
    chord_second_intersection,
    gauge,
    gauge_gradient,
    ray_exit,
    support_point,
)
from .blmetric import BLMatrix, IntegrationConfig, bl_matrix, bl_sphericity_defect  # noqa: E402
from .involutions import (  # noqa: E402
    AffineMap,
    ChordPairSample,
    DefectReport,
    chord_involution,
    ellipsoid_verdict,
    fit_affine_map,
    projectivity_defect,
    two_patch_defect,
)
from .phasecurves import (  # noqa: E402
    PlanarLinearField,
    classify_field,
    hamiltonian_of,
    integrate_orbit,
    phase_conic,
)
from .quadrics import Quadric, classify_conic, fit_quadric, planar_section  # noqa: E402
from .reflectors import (  # noqa: E402
    InvolutionField,
    ellipsoid_equivalence_map,
    minkowski_reflect,
    projective_reflect,
    standard_reflection_residual,
    trajectory,
)

__all__ = [
    "AffineMap",
    "BLMatrix",
    "BoundaryPoint",
    "Chord",
    "ChordPairSample",
    "DefectReport",
    "Ellipsoid",
    "GaugeBody",
    "IntegrationConfig",
    "InvolutionField",
    "PBall",
    "PerturbedBall",
    "PlanarLinearField",
    "Quadric",
    "bl_matrix",
    "bl_sphericity_defect",
    "body_from_spec",
    "boundary_point",
    "chord_involution",
    "chord_second_intersection",
    "classify_conic",
    "classify_field",
    "ellipsoid_equivalence_map",
    "ellipsoid_verdict",
    "fit_affine_map",
    "fit_quadric",
    "gauge",
    "gauge_gradient",
    "hamiltonian_of",
    "integrate_orbit",
    "minkowski_reflect",
    "phase_conic",
    "planar_section",
    "projective_reflect",
    "projectivity_defect",
    "ray_exit",
    "standard_reflection_residual",
    "support_point",
    "trajectory",
    "two_patch_defect",
]
