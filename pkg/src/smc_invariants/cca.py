"""Nonlinear-regime characterization via curvilinear projection.

The variation matrix d_s is projected into low dimensions p by a
distance-preserving stochastic embedding (curvilinear component analysis
in the classic pinned-point form: quadratic stress on pairwise distance
residuals, gated by a shrinking step neighborhood on embedded distances).
The projection error curve Err(p) yields the intrinsic dimension p* as the
argmax of Err(p-1)/Err(p), and the SVD of the unfolded projection at p*
exposes the motor direction the input is invariant to.

Err(p) is an un-normalized RMS pairwise-distance residual, so Err(0) - the
residual of the empty projection - doubles as a uniformity score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import _kernels
from .errors import (
    DegenerateDirectionError,
    InsufficientSamplesError,
    InvalidConfigError,
    UniformInputError,
)
from .explore import ExplorationBatch
from .svd_analysis import MotorDirection, canonical_direction, count_significant

DEFAULT_P_LIST = (0, 1, 2, 3)


@dataclass(frozen=True)
class CcaConfig:
    """Knobs of the curvilinear projection.

    lambda_initial defaults to the median pairwise distance of the batch
    being projected, lambda_final to a tenth of lambda_initial; both anneal
    geometrically across epochs, as does the update rate. pair_subsample
    caps how many partner candidates each pinned point draws per epoch
    (None sweeps all K partners).
    """

    p_list: tuple[int, ...] = DEFAULT_P_LIST
    epochs: int = 40
    initial_rate: float = 0.5
    final_rate: float = 0.01
    lambda_initial: float | None = None
    lambda_final: float | None = None
    pair_subsample: int | None = None

    def __post_init__(self):
        p_list = tuple(int(p) for p in self.p_list)
        object.__setattr__(self, "p_list", p_list)
        if len(p_list) < 2 or p_list[0] != 0:
            raise InvalidConfigError("p_list must start at 0 and include p >= 1")
        if any(b <= a for a, b in zip(p_list, p_list[1:])):
            raise InvalidConfigError("p_list must be strictly ascending")
        if self.epochs < 1:
            raise InvalidConfigError("epochs must be >= 1")
        if not (self.initial_rate > 0.0 and self.final_rate > 0.0):
            raise InvalidConfigError("update rates must be > 0")
        if self.lambda_final is not None and self.lambda_initial is None:
            raise InvalidConfigError("lambda_final given without lambda_initial")
        if self.lambda_initial is not None:
            lam_f = self.lambda_final
            if self.lambda_initial <= 0.0 or (lam_f is not None and lam_f <= 0.0):
                raise InvalidConfigError("lambda schedule values must be > 0")
            if lam_f is not None and self.lambda_initial < lam_f:
                raise InvalidConfigError("lambda_initial must be >= lambda_final")
        if self.pair_subsample is not None and self.pair_subsample < 1:
            raise InvalidConfigError("pair_subsample must be >= 1 or None")

    def to_json(self) -> dict:
        return {
            "p_list": list(self.p_list),
            "epochs": self.epochs,
            "initial_rate": self.initial_rate,
            "final_rate": self.final_rate,
            "lambda_initial": self.lambda_initial,
            "lambda_final": self.lambda_final,
            "pair_subsample": self.pair_subsample,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CcaConfig":
        kwargs = dict(obj)
        if "p_list" in kwargs:
            kwargs["p_list"] = tuple(kwargs["p_list"])
        return cls(**kwargs)


@dataclass(frozen=True)
class CcaProjection:
    """Embedded points (p x K) and their final projection error."""

    y: np.ndarray = field(repr=False)
    err: float = 0.0


@dataclass(frozen=True)
class DimensionEstimate:
    """Estimated intrinsic dimension and the error curve it came from."""

    p_star: int
    err_curve: tuple[tuple[int, float], ...]


def projection_error(d_s: np.ndarray, y: np.ndarray | None) -> float:
    """RMS pairwise-distance residual between d_s columns and y columns.

    y=None (or an empty matrix) is the p=0 projection: all embedded
    distances are zero, so the result is the RMS pairwise distance of the
    input itself.
    """
    d_s = np.asarray(d_s, dtype=np.float64)
    k = d_s.shape[1]
    if k < 2:
        raise InsufficientSamplesError(f"need K >= 2 samples, got {k}")
    dist_x = pdist(d_s.T)
    if y is None or np.size(y) == 0:
        resid = dist_x
    else:
        y = np.asarray(y, dtype=np.float64)
        if y.shape[1] != k:
            raise InvalidConfigError(
                f"column mismatch: d_s has {k} samples, y has {y.shape[1]}"
            )
        resid = dist_x - pdist(y.T)
    return float(np.sqrt(np.mean(resid * resid)))


def _geometric_schedule(start: float, stop: float, epochs: int) -> np.ndarray:
    if epochs == 1:
        return np.array([start])
    return start * (stop / start) ** (np.arange(epochs) / (epochs - 1))


def cca_project(
    d_s: np.ndarray,
    p: int,
    config: CcaConfig | None = None,
    rng: np.random.Generator | None = None,
    backend: str | None = None,
) -> CcaProjection:
    """Project the K columns of d_s into p dimensions.

    Starts from the projection onto the top-p left-singular directions of
    d_s, then refines with pinned-point stochastic updates under the
    annealed rate / neighborhood schedules of config.
    """
    if config is None:
        config = CcaConfig()
    if rng is None:
        rng = np.random.default_rng()
    d_s = np.asarray(d_s, dtype=np.float64)
    n_s, k = d_s.shape
    if not 1 <= p < n_s:
        raise InvalidConfigError(f"projection dimension {p} outside 1..{n_s - 1}")
    if k < 2:
        raise InsufficientSamplesError(f"need K >= 2 samples, got {k}")

    left, _, _ = np.linalg.svd(d_s, full_matrices=False)
    pts = np.ascontiguousarray((left[:, :p].T @ d_s).T)

    dist_flat = pdist(d_s.T)
    lam0 = config.lambda_initial
    if lam0 is None:
        lam0 = float(np.median(dist_flat))
    lam_f = config.lambda_final
    if lam_f is None:
        lam_f = lam0 / 10.0

    if lam0 > 0.0:
        dist_x = np.ascontiguousarray(squareform(dist_flat))
        lams = _geometric_schedule(lam0, lam_f, config.epochs)
        rates = _geometric_schedule(config.initial_rate, config.final_rate, config.epochs)
        for lam, rate in zip(lams, rates):
            order = rng.permutation(k).astype(np.int64)
            partners = None
            if config.pair_subsample is not None:
                partners = rng.integers(
                    0, k, size=(k, config.pair_subsample), dtype=np.int64
                )
            _kernels.cca_epoch(
                pts, dist_x, order, float(lam), float(rate), partners, backend
            )

    y = np.ascontiguousarray(pts.T)
    return CcaProjection(y=y, err=projection_error(d_s, y))


def estimate_dimension(err_curve) -> DimensionEstimate:
    """Intrinsic dimension from an error curve [(0, Err(0)), (1, Err(1)), ...].

    p* is the argmax over p >= 1 of Err(p-1)/Err(p), ties toward smaller p.
    A zero Err(p) after a positive Err(p-1) short-circuits to that p
    (infinite ratio); Err(0) = 0 means the input is uniform and carries no
    dimension to estimate.
    """
    curve = tuple((int(p), float(e)) for p, e in err_curve)
    if len(curve) < 2:
        raise InvalidConfigError("error curve needs at least p = 0 and p = 1")
    if [p for p, _ in curve] != list(range(len(curve))):
        raise InvalidConfigError("error curve must cover consecutive p from 0")
    errs = [e for _, e in curve]
    if not all(np.isfinite(errs)):
        raise InvalidConfigError("error curve has non-finite entries")
    if any(e < 0 for e in errs):
        raise InvalidConfigError("projection errors cannot be negative")
    if errs[0] == 0.0:
        raise UniformInputError("Err(0) = 0: uniform input, no dimension estimate")

    best_p, best_ratio = 0, -np.inf
    for p in range(1, len(errs)):
        if errs[p] == 0.0:
            if errs[p - 1] > 0.0:
                return DimensionEstimate(p_star=p, err_curve=curve)
            continue  # 0/0 tail after an earlier short-circuit cannot happen
        ratio = errs[p - 1] / errs[p]
        if ratio > best_ratio:
            best_p, best_ratio = p, ratio
    return DimensionEstimate(p_star=best_p, err_curve=curve)


def invariance_from_projection(
    batch: ExplorationBatch,
    projection: CcaProjection,
    tau_rel: float | None = None,
    tau_abs: float | None = None,
) -> tuple[MotorDirection, int]:
    """Invariant motor direction from the SVD of the unfolded projection.

    The projection (computed at p = p*) is centered and decomposed; its
    spectrum is expected to carry p* significant values. The first
    non-significant right-singular direction is completed from the motor
    row space (embedded coordinates regressed on motor samples), which
    pins down the otherwise-arbitrary null-space basis; mapped through d_m
    it yields the invariance direction. Returns (direction, significant
    count of the projection spectrum).
    """
    y = np.asarray(projection.y, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != batch.k:
        raise InvalidConfigError("projection does not match the batch")
    p = y.shape[0]
    yc = y - y.mean(axis=1, keepdims=True)
    sv = np.linalg.svd(yc, compute_uv=False)
    significant = min(count_significant(sv, tau_rel, tau_abs), batch.n_motors)

    if p >= batch.n_motors:
        raise DegenerateDirectionError(
            f"projection dimension {p} leaves no invariant direction in a "
            f"{batch.n_motors}-D motor space"
        )

    m_c = batch.d_m - batch.d_m.mean(axis=1, keepdims=True)
    gram = m_c @ m_c.T
    # Rank-deficient motor sampling cannot pin down any direction.
    if np.linalg.cond(gram) > 1e12:
        raise DegenerateDirectionError("motor samples are rank-deficient")
    coupling = np.linalg.solve(gram, m_c @ yc.T)  # (N_m, p) regression weights
    w = coupling[:, 0]
    if np.linalg.norm(w) <= 1e-12 * max(np.linalg.norm(yc), 1e-300):
        raise DegenerateDirectionError("no sensorimotor coupling in projection")
    z_target = np.array([-w[1], w[0]])
    z_target /= np.linalg.norm(z_target)
    # Null-completion coefficients: orthogonal to the embedding by
    # construction, and d_m maps them exactly onto z_target.
    coeffs = m_c.T @ np.linalg.solve(gram, z_target)
    return canonical_direction(batch.d_m @ coeffs), significant


def change_direction_from_projection(
    batch: ExplorationBatch, projection: CcaProjection
) -> MotorDirection:
    """First motor direction of the projection: d_m R_:1 normalized.

    R_:1 is the leading right-singular vector of the centered projection,
    so this is the motor combination that generates the dominant sensory
    change.
    """
    y = np.asarray(projection.y, dtype=np.float64)
    yc = y - y.mean(axis=1, keepdims=True)
    _, _, right_t = np.linalg.svd(yc, full_matrices=False)
    return canonical_direction(batch.d_m @ right_t[0])


@dataclass(frozen=True)
class NonlinearVerdict:
    """Per-input summary of the nonlinear analysis.

    uniformity is Err(0); p_star and invariant_angle are None for uniform
    inputs (and the angle also when no invariance direction exists).
    projection keeps the embedding at p* around for downstream consumers
    (plots); it does not participate in equality.
    """

    uniformity: float
    p_star: int | None
    invariant_angle: float | None
    err_curve: tuple[tuple[int, float], ...]
    projection: CcaProjection | None = field(default=None, repr=False, compare=False)


def characterize_nonlinear(
    batch: ExplorationBatch,
    config: CcaConfig | None = None,
    rng: np.random.Generator | None = None,
    tau_rel: float | None = None,
    tau_abs: float | None = None,
) -> NonlinearVerdict:
    """Project at every configured p, estimate p*, and extract invariance.

    Err(0) at or below the absolute significance floor short-circuits to a
    uniform verdict. Each p gets an independent projection run seeded from
    the supplied generator.
    """
    if config is None:
        config = CcaConfig()
    if rng is None:
        rng = np.random.default_rng()
    if tau_abs is None:
        tau_abs_eff = 1e-9 * float(np.linalg.norm(batch.d_s))
    else:
        tau_abs_eff = tau_abs

    err0 = projection_error(batch.d_s, None)
    if err0 <= tau_abs_eff:
        return NonlinearVerdict(
            uniformity=err0,
            p_star=None,
            invariant_angle=None,
            err_curve=((0, err0),),
        )

    ps = [p for p in config.p_list if p >= 1]
    seeds = rng.integers(0, 2**63, size=len(ps))
    projections: dict[int, CcaProjection] = {}
    curve: list[tuple[int, float]] = [(0, err0)]
    for p, seed in zip(ps, seeds):
        proj = cca_project(batch.d_s, p, config, np.random.default_rng(int(seed)))
        projections[p] = proj
        curve.append((p, proj.err))

    estimate = estimate_dimension(curve)
    angle = None
    if estimate.p_star < batch.n_motors:
        try:
            direction, _ = invariance_from_projection(
                batch, projections[estimate.p_star], tau_rel, tau_abs
            )
            angle = direction.angle
        except DegenerateDirectionError:
            angle = None
    return NonlinearVerdict(
        uniformity=err0,
        p_star=estimate.p_star,
        invariant_angle=angle,
        err_curve=tuple(curve),
        projection=projections[estimate.p_star],
    )
