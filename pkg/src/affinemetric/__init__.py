"""Numerical toolkit for normed planes, Busemann functions and affine functions on metric samples."""
from __future__ import annotations

__version__ = "0.1.0"

from .affinesep import (
    AffineConstraintSystem,
    Embedding,
    build_constraints,
    embedding_affinity_defect,
    evaluation_embedding,
    separate_all,
    separate_pair,
    uniqueness_audit,
)
from .busemann import (
    LinearRay,
    SampledRay,
    busemann_linear,
    busemann_linear_far,
    busemann_metric_ray,
    linearity_defect,
)
from .estimators import AffineEmbedding, NormReconstructor, sample_directions
from .exceptions import (
    AffineMetricError,
    CoincidentEndpoints,
    DegenerateBody,
    DimensionMismatch,
    EpsInconsistent,
    InsufficientRepresentations,
    InvalidGeodesic,
    InvalidNorm,
    NonConvergent,
    NotConverged,
    NotSeparated,
    NotSmoothAtBase,
    OutOfDomain,
    ParameterOutOfRange,
    ParseError,
    SamePoint,
    SolverFailure,
    UnknownPointId,
    WellDefinednessViolation,
    ZeroBasePoint,
)
from .finslerrec import (
    ConvexDomain,
    MetricOracle,
    constancy_check,
    finsler_at,
    first_variation_check,
    reconstruct_norm,
    translation_invariance_check,
)
from .geodesy import (
    BicombingTable,
    GeodesicRecord,
    MetricSample,
    linear_geodesic_sample,
    metric_from_norm,
    validate_bicombing,
    validate_geodesic,
)
from .normcore import (
    PNorm,
    PolytopeGauge,
    evaluate_norm,
    is_smooth_point,
    one_sided_derivative,
    polytope_gauge,
    smoothness_defect,
    strict_convexity_witness,
)

__all__ = [
    "AffineConstraintSystem",
    "AffineEmbedding",
    "AffineMetricError",
    "BicombingTable",
    "CoincidentEndpoints",
    "ConvexDomain",
    "DegenerateBody",
    "DimensionMismatch",
    "Embedding",
    "EpsInconsistent",
    "GeodesicRecord",
    "InsufficientRepresentations",
    "InvalidGeodesic",
    "InvalidNorm",
    "LinearRay",
    "MetricOracle",
    "MetricSample",
    "NonConvergent",
    "NormReconstructor",
    "NotConverged",
    "NotSeparated",
    "NotSmoothAtBase",
    "OutOfDomain",
    "PNorm",
    "ParameterOutOfRange",
    "ParseError",
    "PolytopeGauge",
    "SamePoint",
    "SampledRay",
    "SolverFailure",
    "UnknownPointId",
    "WellDefinednessViolation",
    "ZeroBasePoint",
    "build_constraints",
    "busemann_linear",
    "busemann_linear_far",
    "busemann_metric_ray",
    "constancy_check",
    "embedding_affinity_defect",
    "evaluate_norm",
    "evaluation_embedding",
    "finsler_at",
    "first_variation_check",
    "is_smooth_point",
    "linear_geodesic_sample",
    "linearity_defect",
    "metric_from_norm",
    "one_sided_derivative",
    "polytope_gauge",
    "reconstruct_norm",
    "sample_directions",
    "separate_all",
    "separate_pair",
    "smoothness_defect",
    "strict_convexity_witness",
    "translation_invariance_check",
    "uniqueness_audit",
    "validate_bicombing",
    "validate_geodesic",
]
