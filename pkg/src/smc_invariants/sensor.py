"""Randomized retina: cell layout in a disk plus per-cell excitation.

Cell positions are drawn once per retina (direction and radius both
uniform, which concentrates cells toward the center on purpose). Each cell
i converts the local field value e into a sensation through its own fixed
quadratic s = alpha*e^2 + beta*e + gamma, so raw sensations are not
comparable across cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import VisualInput, evaluate
from .errors import InvalidConfigError

SENSOR_DIAMETER = 4.0

# Linear-mode gains below this magnitude make a cell effectively dead;
# redraw them so exact-linearity tests never hinge on a pathological draw.
_MIN_LINEAR_GAIN = 1.0


@dataclass(frozen=True)
class Retina:
    """Immutable cell layout and excitation coefficients.

    cells: (n_cells, 2) positions relative to the sensor center.
    excitations: (n_cells, 3) rows of (alpha, beta, gamma).
    """

    cells: np.ndarray
    excitations: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        exc = np.asarray(self.excitations, dtype=np.float64)
        if cells.ndim != 2 or cells.shape[1] != 2:
            raise InvalidConfigError("cells must have shape (n_cells, 2)")
        if exc.shape != (cells.shape[0], 3):
            raise InvalidConfigError("excitations must have shape (n_cells, 3)")
        if cells.shape[0] < 1:
            raise InvalidConfigError("retina needs at least one cell")
        cells.setflags(write=False)
        exc.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "excitations", exc)

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def to_json(self) -> dict:
        return {
            "cells": self.cells.tolist(),
            "excitations": self.excitations.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Retina":
        return cls(
            cells=np.asarray(obj["cells"], dtype=np.float64),
            excitations=np.asarray(obj["excitations"], dtype=np.float64),
        )


@dataclass(frozen=True)
class SensoryState:
    """Vector of per-cell sensations for one sensor pose."""

    s: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64)
        if s.ndim != 1:
            raise InvalidConfigError("sensory state must be a vector")
        if not np.all(np.isfinite(s)):
            raise InvalidConfigError("sensory state has non-finite entries")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def n_cells(self) -> int:
        return self.s.shape[0]


def build_retina(
    n_cells: int,
    diameter: float = SENSOR_DIAMETER,
    mode: str = "linear",
    rng: np.random.Generator | None = None,
) -> Retina:
    """Draw a retina with n_cells cells inside a disk of the given diameter.

    mode="linear": alpha = 0 and beta, gamma ~ U(-1e3, 1e3), redrawing any
    |beta| < 1. mode="quadratic": alpha, beta, gamma ~ N(0, 1).
    """
    if n_cells < 1:
        raise InvalidConfigError("n_cells must be >= 1")
    if diameter <= 0.0:
        raise InvalidConfigError("diameter must be > 0")
    if rng is None:
        rng = np.random.default_rng()
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n_cells)
    radius = rng.uniform(0.0, diameter / 2.0, size=n_cells)
    cells = np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))

    if mode == "linear":
        beta = rng.uniform(-1e3, 1e3, size=n_cells)
        while True:
            weak = np.abs(beta) < _MIN_LINEAR_GAIN
            if not np.any(weak):
                break
            beta[weak] = rng.uniform(-1e3, 1e3, size=int(weak.sum()))
        gamma = rng.uniform(-1e3, 1e3, size=n_cells)
        exc = np.column_stack((np.zeros(n_cells), beta, gamma))
    elif mode == "quadratic":
        exc = rng.standard_normal(size=(n_cells, 3))
    else:
        raise InvalidConfigError(f"unknown retina mode: {mode!r}")
    return Retina(cells=cells, excitations=exc)


def sense(retina: Retina, inp: VisualInput, m=(0.0, 0.0)) -> SensoryState:
    """Sensory state at displacement m = (dx, dy) from the patch center.

    Each cell reads the field at its displaced position and applies its own
    excitation quadratic. m may be a MotorCommand or any (dx, dy) pair.
    Raises OutOfDomainError if a displaced cell leaves the patch.
    """
    if hasattr(m, "dx"):
        dx, dy = float(m.dx), float(m.dy)
    else:
        dx, dy = float(m[0]), float(m[1])
    e = evaluate(inp, retina.cells[:, 0] + dx, retina.cells[:, 1] + dy)
    alpha = retina.excitations[:, 0]
    beta = retina.excitations[:, 1]
    gamma = retina.excitations[:, 2]
    return SensoryState(s=alpha * e * e + beta * e + gamma)
