"""Linear-regime characterization of an exploration batch via SVD.

The number of significant singular values of d_s estimates the rank of the
local sensorimotor map (at most the motor dimension), and right-singular
vectors mapped through d_m yield unit motor directions: indices at or
below the significant count are directions of sensory change, later ones
are directions of invariance. Edges therefore show up as exactly one
significant value plus an invariant motor direction whose angle (mod pi)
is the edge orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDirectionError,
    InsufficientSamplesError,
    InvalidConfigError,
)
from .explore import ExplorationBatch

TAU_REL_DEFAULT = 1e-6
_DEGENERATE_NORM = 1e-12


def default_tau_abs(singular_values: np.ndarray) -> float:
    """Absolute significance floor: 1e-9 times the matrix Frobenius norm.

    The Frobenius norm is recovered from the spectrum itself, so the floor
    scales with the per-column RMS of the analyzed matrix.
    """
    sv = np.asarray(singular_values, dtype=np.float64)
    return 1e-9 * float(np.sqrt(np.sum(sv * sv)))


def count_significant(
    singular_values, tau_rel: float | None = None, tau_abs: float | None = None
) -> int:
    """Number of singular values above both thresholds.

    Expects a descending spectrum. A value counts when it exceeds tau_abs
    and tau_rel times the largest value. Defaults: tau_rel = 1e-6,
    tau_abs = 1e-9 * Frobenius norm.
    """
    sv = np.asarray(singular_values, dtype=np.float64)
    if sv.size == 0:
        return 0
    if np.any(np.diff(sv) > 0):
        raise InvalidConfigError("singular values must be sorted descending")
    if tau_rel is None:
        tau_rel = TAU_REL_DEFAULT
    if tau_abs is None:
        tau_abs = default_tau_abs(sv)
    top = float(sv[0])
    return int(np.sum((sv > tau_abs) & (sv > tau_rel * top)))


@dataclass(frozen=True)
class SvdAnalysis:
    """Thin SVD of a variation matrix plus the significance verdict.

    right_vectors holds R's columns (K x r), left_vectors L's (N_s x r),
    with r = min(N_s, K). significant_count is capped at the motor
    dimension: with N_m motors the underlying linear map cannot have
    higher rank, and extra energy in the spectrum signals nonlinearity
    rather than additional motor degrees of freedom.
    """

    singular_values: np.ndarray = field(repr=False)
    right_vectors: np.ndarray = field(repr=False)
    left_vectors: np.ndarray = field(repr=False)
    significant_count: int = 0


def svd_of_batch(
    batch: ExplorationBatch,
    tau_rel: float | None = None,
    tau_abs: float | None = None,
) -> SvdAnalysis:
    """Thin SVD of batch.d_s with default significance thresholds."""
    if batch.k < 2:
        raise InsufficientSamplesError(f"need K >= 2 samples, got {batch.k}")
    left, sv, right_t = np.linalg.svd(batch.d_s, full_matrices=False)
    raw = count_significant(sv, tau_rel, tau_abs)
    return SvdAnalysis(
        singular_values=sv,
        right_vectors=right_t.T,
        left_vectors=left,
        significant_count=min(raw, batch.n_motors),
    )


def fold_angle(theta: float) -> float:
    """Fold an angle into [0, pi): directions are unoriented lines."""
    a = math.fmod(theta, math.pi)
    if a < 0.0:
        a += math.pi
    if a >= math.pi:  # fmod can land exactly on pi after the correction
        a -= math.pi
    return a


@dataclass(frozen=True)
class MotorDirection:
    """Unit direction in motor space, canonicalized to angle in [0, pi)."""

    vector: np.ndarray
    angle: float


def canonical_direction(z: np.ndarray) -> MotorDirection:
    """Normalize a motor-space vector and fold its sign ambiguity away."""
    z = np.asarray(z, dtype=np.float64)
    norm = float(np.linalg.norm(z))
    if norm <= _DEGENERATE_NORM:
        raise DegenerateDirectionError(
            f"motor combination collapses to ~0 (norm {norm:.3e})"
        )
    angle = fold_angle(math.atan2(z[1], z[0]))
    return MotorDirection(
        vector=np.array([math.cos(angle), math.sin(angle)]), angle=angle
    )


def motor_direction(
    batch: ExplorationBatch, analysis: SvdAnalysis, i: int
) -> MotorDirection:
    """Motor direction z_i = d_m R_:i / ||d_m R_:i|| (i is 1-based).

    Indices at or below the significant count give directions of change;
    later indices give directions of invariance.
    """
    r = analysis.right_vectors.shape[1]
    if not 1 <= i <= r:
        raise InvalidConfigError(f"direction index {i} outside 1..{r}")
    z = batch.d_m @ analysis.right_vectors[:, i - 1]
    return canonical_direction(z)


@dataclass(frozen=True)
class LinearVerdict:
    """Per-input summary of the linear analysis.

    uniformity is sigma_1 (near zero means the input looks uniform),
    edgeness_sigma is sigma_2, and invariant_angle is present exactly when
    one invariance direction exists.
    """

    uniformity: float
    edgeness_sigma: float
    invariant_angle: float | None
    significant_count: int


def characterize_linear(
    batch: ExplorationBatch,
    tau_rel: float | None = None,
    tau_abs: float | None = None,
    analysis: SvdAnalysis | None = None,
) -> LinearVerdict:
    """Full linear-regime verdict for one exploration batch.

    significant_count = 0: invariant to every motion (uniform input);
    = 1: edge-like, with the invariant angle taken from z_2;
    = 2: no invariance direction exists. Pass a precomputed analysis to
    reuse its SVD; thresholds are ignored in that case.
    """
    if analysis is None:
        analysis = svd_of_batch(batch, tau_rel, tau_abs)
    sv = analysis.singular_values
    sigma1 = float(sv[0]) if sv.size >= 1 else 0.0
    sigma2 = float(sv[1]) if sv.size >= 2 else 0.0
    angle = None
    if analysis.significant_count == 1 and analysis.right_vectors.shape[1] >= 2:
        angle = motor_direction(batch, analysis, 2).angle
    return LinearVerdict(
        uniformity=sigma1,
        edgeness_sigma=sigma2,
        invariant_angle=angle,
        significant_count=analysis.significant_count,
    )
