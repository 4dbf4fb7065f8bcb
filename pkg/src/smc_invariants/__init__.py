"""Sensorimotor characterization of simple visual features.

A simulated agent with a randomized retina explores parametric visual
inputs through small planar displacements and characterizes each input
purely from its own sensorimotor samples: SVD rank / invariant-direction
analysis when the sensorimotor map is linear, curvilinear-projection
intrinsic-dimension analysis when it is not.
"""

__version__ = "0.1.0"

from .cca import (
    CcaConfig,
    CcaProjection,
    DimensionEstimate,
    NonlinearVerdict,
    cca_project,
    characterize_nonlinear,
    estimate_dimension,
    invariance_from_projection,
    projection_error,
)
from .characterize import (
    Characterization,
    PatchMap,
    build_topological_map,
    characterize,
)
from .env import (
    LinearGradient,
    TanhEdge,
    Uniform,
    evaluate,
    sample_linear_ensemble,
    sample_tanh_ensemble,
)
from .explore import (
    ExplorationBatch,
    MotorCommand,
    collect_variations,
    sample_motors,
)
from .sensor import Retina, SensoryState, build_retina, sense
from .svd_analysis import (
    LinearVerdict,
    MotorDirection,
    SvdAnalysis,
    characterize_linear,
    count_significant,
    motor_direction,
    svd_of_batch,
)

__all__ = [
    "__version__",
    "CcaConfig",
    "CcaProjection",
    "Characterization",
    "DimensionEstimate",
    "ExplorationBatch",
    "LinearGradient",
    "LinearVerdict",
    "MotorCommand",
    "MotorDirection",
    "NonlinearVerdict",
    "PatchMap",
    "Retina",
    "SensoryState",
    "SvdAnalysis",
    "TanhEdge",
    "Uniform",
    "build_retina",
    "build_topological_map",
    "cca_project",
    "characterize",
    "characterize_linear",
    "characterize_nonlinear",
    "collect_variations",
    "count_significant",
    "estimate_dimension",
    "evaluate",
    "invariance_from_projection",
    "motor_direction",
    "projection_error",
    "sample_linear_ensemble",
    "sample_motors",
    "sample_tanh_ensemble",
    "sense",
    "svd_of_batch",
]
