"""Per-input characterization pipeline and the topological patch map.

A characterization reduces one visual input to what the agent can say
about it from sensorimotor samples alone: how uniform it is, whether it
behaves like an edge (exactly one invariant motor direction), and at what
angle. The patch map arranges characterized inputs on a (uniformity x
invariant angle) grid, one representative per occupied cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cca import CcaConfig, NonlinearVerdict, characterize_nonlinear
from .env import VisualInput
from .errors import EmptyMapError, InvalidConfigError
from .explore import MotorCommand, collect_variations
from .sensor import Retina
from .svd_analysis import LinearVerdict, characterize_linear

VERDICT_UNIFORM = "uniform"
VERDICT_EDGE = "edge"
VERDICT_NO_INVARIANCE = "no-invariance"


@dataclass(frozen=True)
class Characterization:
    """What the agent concluded about one visual input."""

    input_id: int
    regime: str
    uniformity: float
    edgeness_sigma: float | None
    p_star: int | None
    invariant_angle: float | None
    verdict: str
    detail: LinearVerdict | NonlinearVerdict = field(repr=False, compare=False, default=None)


def characterize(
    inp: VisualInput,
    retina: Retina,
    motors: Sequence[MotorCommand],
    regime: str,
    *,
    input_id: int = 0,
    tau_rel: float | None = None,
    tau_abs: float | None = None,
    cca_config: CcaConfig | None = None,
    rng: np.random.Generator | None = None,
) -> Characterization:
    """Explore one input with the given motors and characterize it.

    regime="linear" runs the SVD analysis, regime="nonlinear" the
    curvilinear-projection analysis (which needs rng for its stochastic
    updates). The verdict is uniform when the batch carries no significant
    variation, edge when exactly one invariance direction exists, and
    no-invariance otherwise.
    """
    batch = collect_variations(retina, inp, list(motors))
    if regime == "linear":
        verdict = characterize_linear(batch, tau_rel, tau_abs)
        if verdict.significant_count == 0:
            label = VERDICT_UNIFORM
        elif verdict.significant_count == 1 and verdict.invariant_angle is not None:
            label = VERDICT_EDGE
        else:
            label = VERDICT_NO_INVARIANCE
        return Characterization(
            input_id=input_id,
            regime=regime,
            uniformity=verdict.uniformity,
            edgeness_sigma=verdict.edgeness_sigma,
            p_star=None,
            invariant_angle=verdict.invariant_angle,
            verdict=label,
            detail=verdict,
        )
    if regime == "nonlinear":
        verdict = characterize_nonlinear(batch, cca_config, rng, tau_rel, tau_abs)
        if verdict.p_star is None:
            label = VERDICT_UNIFORM
        elif verdict.p_star == 1 and verdict.invariant_angle is not None:
            label = VERDICT_EDGE
        else:
            label = VERDICT_NO_INVARIANCE
        return Characterization(
            input_id=input_id,
            regime=regime,
            uniformity=verdict.uniformity,
            edgeness_sigma=None,
            p_star=verdict.p_star,
            invariant_angle=verdict.invariant_angle,
            verdict=label,
            detail=verdict,
        )
    raise InvalidConfigError(f"unknown regime: {regime!r}")


@dataclass(frozen=True)
class PatchMap:
    """Grid of representative inputs over (uniformity, invariant angle).

    The uniformity axis uses quantile bin edges (uniformity scores are
    heavy-tailed), the angle axis uniform bins over [0, pi). Each occupied
    cell names the input closest to the cell center.
    """

    u_edges: np.ndarray = field(repr=False)
    angle_edges: np.ndarray = field(repr=False)
    cells: dict[tuple[int, int], int] = field(repr=False)

    @property
    def n_u_bins(self) -> int:
        return len(self.u_edges) - 1

    @property
    def n_angle_bins(self) -> int:
        return len(self.angle_edges) - 1

    def u_bin_of(self, value: float) -> int:
        return _bin_index(self.u_edges, value)

    def angle_bin_of(self, angle: float) -> int:
        return _bin_index(self.angle_edges, angle)

    def to_json(self) -> dict:
        return {
            "u_edges": [float(v) for v in self.u_edges],
            "angle_edges": [float(v) for v in self.angle_edges],
            "cells": [
                {"u_bin": ub, "angle_bin": ab, "input_id": iid}
                for (ub, ab), iid in sorted(self.cells.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PatchMap":
        cells = {
            (int(c["u_bin"]), int(c["angle_bin"])): int(c["input_id"])
            for c in obj["cells"]
        }
        return cls(
            u_edges=np.asarray(obj["u_edges"], dtype=np.float64),
            angle_edges=np.asarray(obj["angle_edges"], dtype=np.float64),
            cells=cells,
        )


def _bin_index(edges: np.ndarray, value: float) -> int:
    idx = int(np.searchsorted(edges, value, side="right")) - 1
    return min(max(idx, 0), len(edges) - 2)


def build_topological_map(
    characterizations: Sequence[Characterization],
    n_u_bins: int = 10,
    n_angle_bins: int = 10,
) -> PatchMap:
    """Organize angle-bearing characterizations on a binned map.

    Only characterizations with an invariant angle can be placed (uniform
    and no-invariance verdicts have no orientation). Raises EmptyMapError
    when nothing qualifies.
    """
    if n_u_bins < 1 or n_angle_bins < 1:
        raise InvalidConfigError("bin counts must be >= 1")
    placed = [c for c in characterizations if c.invariant_angle is not None]
    if not placed:
        raise EmptyMapError("no characterization carries an invariant angle")

    u_values = np.array([c.uniformity for c in placed])
    u_edges = np.quantile(u_values, np.linspace(0.0, 1.0, n_u_bins + 1))
    angle_edges = np.linspace(0.0, math.pi, n_angle_bins + 1)

    best: dict[tuple[int, int], tuple[float, int]] = {}
    for c in placed:
        ub = _bin_index(u_edges, c.uniformity)
        ab = _bin_index(angle_edges, c.invariant_angle)
        u_width = u_edges[ub + 1] - u_edges[ub]
        a_width = angle_edges[ab + 1] - angle_edges[ab]
        du = 0.0 if u_width == 0 else (c.uniformity - (u_edges[ub] + u_width / 2)) / u_width
        da = (c.invariant_angle - (angle_edges[ab] + a_width / 2)) / a_width
        score = (math.hypot(du, da), c.input_id)
        key = (ub, ab)
        if key not in best or score < best[key]:
            best[key] = score
    cells = {key: input_id for key, (_, input_id) in best.items()}
    return PatchMap(u_edges=u_edges, angle_edges=angle_edges, cells=cells)
