"""Motor sampling and collection of paired exploration matrices.

For one visual input, the agent issues K random displacements inside the
exploration disk and records, for each, the sensory variation relative to
the re-centered reference pose m = 0. The result is the motor matrix d_m
(N_m x K) and the variation matrix d_s (N_s x K) that all downstream
analyses consume.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .env import VisualInput, evaluate
from .errors import InvalidConfigError
from .sensor import Retina

EXPLORATION_DIAMETER = 6.0


@dataclass(frozen=True)
class MotorCommand:
    """Planar displacement of the sensor, confined to the motor disk."""

    dx: float
    dy: float

    def __post_init__(self):
        r = EXPLORATION_DIAMETER / 2.0
        if self.dx * self.dx + self.dy * self.dy > r * r * (1.0 + 1e-12):
            raise InvalidConfigError(
                f"motor command ({self.dx}, {self.dy}) outside the "
                f"radius-{r:g} exploration disk"
            )


@dataclass(frozen=True)
class ExplorationBatch:
    """Paired sample matrices for one visual input.

    d_m: (N_m, K) motor samples as columns.
    d_s: (N_s, K) sensory variations; column k is sense(m_k) - sense(0).
    """

    d_m: np.ndarray
    d_s: np.ndarray

    def __post_init__(self):
        d_m = np.ascontiguousarray(self.d_m, dtype=np.float64)
        d_s = np.ascontiguousarray(self.d_s, dtype=np.float64)
        if d_m.ndim != 2 or d_s.ndim != 2:
            raise InvalidConfigError("batch matrices must be 2-D")
        if d_m.shape[1] != d_s.shape[1]:
            raise InvalidConfigError(
                f"column mismatch: d_m has {d_m.shape[1]} samples, "
                f"d_s has {d_s.shape[1]}"
            )
        d_m.setflags(write=False)
        d_s.setflags(write=False)
        object.__setattr__(self, "d_m", d_m)
        object.__setattr__(self, "d_s", d_s)

    @property
    def k(self) -> int:
        return self.d_m.shape[1]

    @property
    def n_motors(self) -> int:
        return self.d_m.shape[0]

    @property
    def n_cells(self) -> int:
        return self.d_s.shape[0]


def sample_motors(k: int, rng: np.random.Generator) -> list[MotorCommand]:
    """Draw k displacements: direction ~ U(0, 2pi), amplitude ~ U(0, 3)."""
    if k < 0:
        raise InvalidConfigError("k must be >= 0")
    theta = rng.uniform(0.0, 2.0 * math.pi, size=k)
    amp = rng.uniform(0.0, EXPLORATION_DIAMETER / 2.0, size=k)
    return [
        MotorCommand(dx=float(a * math.cos(t)), dy=float(a * math.sin(t)))
        for a, t in zip(amp, theta)
    ]


def collect_variations(
    retina: Retina, inp: VisualInput, motors: list[MotorCommand]
) -> ExplorationBatch:
    """Build the (d_m, d_s) pair for one input.

    The m = 0 reference state is sensed once; every variation column is the
    displaced state minus that reference. Evaluation is vectorized over
    (motors x cells).
    """
    k = len(motors)
    d_m = np.empty((2, k))
    for j, m in enumerate(motors):
        d_m[0, j] = m.dx
        d_m[1, j] = m.dy

    cx = retina.cells[:, 0]
    cy = retina.cells[:, 1]
    # Rows: reference pose then one row per motor sample.
    px = np.concatenate((cx[None, :], cx[None, :] + d_m[0][:, None]), axis=0)
    py = np.concatenate((cy[None, :], cy[None, :] + d_m[1][:, None]), axis=0)
    e = evaluate(inp, px, py)
    e = np.broadcast_to(np.asarray(e, dtype=np.float64), px.shape)
    alpha = retina.excitations[:, 0]
    beta = retina.excitations[:, 1]
    gamma = retina.excitations[:, 2]
    s = alpha * e * e + beta * e + gamma
    d_s = (s[1:] - s[0]).T
    return ExplorationBatch(d_m=d_m, d_s=d_s)


def save_batch_csv(batch: ExplorationBatch, d_m_path, d_s_path) -> None:
    """Write the batch as a CSV pair: one row per sample in both files."""
    for path, mat in ((d_m_path, batch.d_m), (d_s_path, batch.d_s)):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in mat.T:
                writer.writerow([repr(float(v)) for v in row])


def load_batch_csv(d_m_path, d_s_path) -> ExplorationBatch:
    """Read back a CSV pair written by save_batch_csv."""
    mats = []
    for path in (d_m_path, d_s_path):
        with open(path, newline="") as fh:
            rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
        mats.append(np.asarray(rows, dtype=np.float64).T)
    return ExplorationBatch(d_m=mats[0], d_s=mats[1])
