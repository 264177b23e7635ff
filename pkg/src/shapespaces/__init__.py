"""Statistical inference on quotient shape spaces.

Landmark configurations modulo translation, scale, and a choice of group
(rotations, the full orthogonal group, or the orthogonal group together with
landmark-order reversal) form the rotation / reflection / reverse-labeling
reflection shape spaces.  This package provides the quotient geometry,
Fréchet means, two-sample tests (quantile- and bootstrap-calibrated),
level/power simulation studies, and landmark extraction from filament
polylines, plus a command line wrapping it all.
"""

from .errors import (
    AntipodalPointError,
    DegenerateChordError,
    DegenerateConfigurationError,
    DimensionMismatchError,
    EmptySampleError,
    InvalidArgumentError,
    MalformedRowError,
    ShapeSpacesError,
    SingularCovarianceError,
    TooFewPointsError,
    UnreachableDistanceError,
)
from .filaments import (
    LandmarkSet,
    Polyline,
    equalize,
    extract_landmarks,
    ingest_polylines,
    place_landmarks,
    resample,
)
from .frechet import MeanResult, frechet_function, frechet_mean, pooled_mean, resample_means
from .geometry import (
    center,
    helmert_submatrix,
    helmertize,
    parallel_transport,
    sphere_distance,
    sphere_exp,
    sphere_log,
    to_preshape,
)
from .simulation import (
    DEFAULT_TEMPLATE_ARC,
    DEFAULT_TEMPLATE_BUCKLE,
    StudyCell,
    StudyConfig,
    StudyResult,
    emit_power_curve,
    emit_table,
    generate_sample,
    make_separated_templates,
    run_level_power_study,
)
from .spaces import (
    AlignmentResult,
    GroupElement,
    ShapeSpaceKind,
    helmert_relabel_conjugate,
    hopf,
    hopf_from_preshape,
    isotropy_check,
    optimal_align,
    optimal_lift,
    planar_shape_distance,
    reverse_label,
    shape_distance,
)
from .twosample import (
    TangentCoordinates,
    TestOutcome,
    bootstrap_test,
    expected_dim,
    horizontal_basis,
    hotelling_t2,
    lift_to_coords,
    prepare_coordinates,
    t2_quantile,
    test_individual_asymmetric,
    test_individual_lifting,
    test_pooled_intrinsic,
    test_pooled_lifting,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "AntipodalPointError",
    "DEFAULT_TEMPLATE_ARC",
    "DEFAULT_TEMPLATE_BUCKLE",
    "DegenerateChordError",
    "DegenerateConfigurationError",
    "DimensionMismatchError",
    "EmptySampleError",
    "GroupElement",
    "InvalidArgumentError",
    "LandmarkSet",
    "MalformedRowError",
    "MeanResult",
    "Polyline",
    "ShapeSpaceKind",
    "ShapeSpacesError",
    "SingularCovarianceError",
    "StudyCell",
    "StudyConfig",
    "StudyResult",
    "TangentCoordinates",
    "TestOutcome",
    "TooFewPointsError",
    "UnreachableDistanceError",
    "bootstrap_test",
    "center",
    "emit_power_curve",
    "emit_table",
    "equalize",
    "expected_dim",
    "extract_landmarks",
    "frechet_function",
    "frechet_mean",
    "generate_sample",
    "helmert_relabel_conjugate",
    "helmert_submatrix",
    "helmertize",
    "hopf",
    "hopf_from_preshape",
    "horizontal_basis",
    "hotelling_t2",
    "ingest_polylines",
    "isotropy_check",
    "lift_to_coords",
    "make_separated_templates",
    "optimal_align",
    "optimal_lift",
    "parallel_transport",
    "place_landmarks",
    "planar_shape_distance",
    "pooled_mean",
    "resample_means",
    "prepare_coordinates",
    "resample",
    "reverse_label",
    "run_level_power_study",
    "shape_distance",
    "sphere_distance",
    "sphere_exp",
    "sphere_log",
    "t2_quantile",
    "test_individual_asymmetric",
    "test_individual_lifting",
    "test_pooled_intrinsic",
    "test_pooled_lifting",
    "to_preshape",
]
