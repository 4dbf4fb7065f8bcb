"""Parametric visual inputs: scalar fields over a 10x10 patch of the plane.

Three families are supported: uniform fields, linear gradients, and soft
edges (a linear gradient squashed through tanh). All of them map any
in-domain position to a value in [0, 1]. Ensemble samplers draw randomized
collections of gradients / edges for the two experiment regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EmptyEnsembleError, InvalidConfigError, OutOfDomainError

DOMAIN_HALF_WIDTH = 5.0

# Extremes of a linear field over the square domain sit at its corners, so
# range safety is exactly: offset +/- 5*(|a|+|b|) stays inside [0, 1].
_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class Uniform:
    """Constant field with the given level in [0, 1]."""

    level: float

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise InvalidConfigError(f"uniform level {self.level} outside [0, 1]")


@dataclass(frozen=True)
class LinearGradient:
    """Affine field a*x + b*y + c, constrained to [0, 1] over the domain.

    Construction rejects parameter combinations that would leave [0, 1]
    anywhere on the patch; clamping is never applied because it would
    destroy linearity.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        reach = DOMAIN_HALF_WIDTH * (abs(self.a) + abs(self.b))
        if reach > min(self.c, 1.0 - self.c) + _RANGE_SLACK:
            raise InvalidConfigError(
                f"gradient (a={self.a}, b={self.b}, c={self.c}) leaves [0, 1] "
                "inside the 10x10 domain"
            )


@dataclass(frozen=True)
class TanhEdge:
    """Soft edge 0.5*(1 + tanh(kappa*(a*x + b*y + c) + delta)).

    kappa controls sharpness, delta shifts the transition; outputs stay
    strictly inside (0, 1) for any parameters.
    """

    a: float
    b: float
    c: float
    kappa: float
    delta: float

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise InvalidConfigError(f"edge sharpness kappa={self.kappa} must be > 0")


VisualInput = Union[Uniform, LinearGradient, TanhEdge]


def _check_domain(x, y):
    if np.any(np.abs(x) > DOMAIN_HALF_WIDTH) or np.any(np.abs(y) > DOMAIN_HALF_WIDTH):
        raise OutOfDomainError(
            f"position outside the {2 * DOMAIN_HALF_WIDTH:g}x"
            f"{2 * DOMAIN_HALF_WIDTH:g} domain"
        )


def evaluate(inp: VisualInput, x, y):
    """Evaluate the field at (x, y); accepts scalars or broadcastable arrays.

    Raises OutOfDomainError if any position leaves the 10x10 patch.
    """
    _check_domain(x, y)
    if isinstance(inp, Uniform):
        return np.broadcast_to(np.float64(inp.level), np.broadcast_shapes(np.shape(x), np.shape(y)))[()]
    if isinstance(inp, LinearGradient):
        return inp.a * np.asarray(x, dtype=np.float64) + inp.b * np.asarray(y, dtype=np.float64) + inp.c
    if isinstance(inp, TanhEdge):
        u = inp.a * np.asarray(x, dtype=np.float64) + inp.b * np.asarray(y, dtype=np.float64) + inp.c
        return 0.5 * (1.0 + np.tanh(inp.kappa * u + inp.delta))
    raise TypeError(f"not a visual input: {inp!r}")


def sample_linear_ensemble(n: int, rng: np.random.Generator) -> list[LinearGradient]:
    """Draw n random linear gradients, every one range-safe on the patch.

    Orientation theta ~ U(0, 2pi), offset c ~ U(0.3, 0.7), and slope
    magnitude uniform between 0 and the largest value that keeps the field
    inside [0, 1] over the whole square (orientation-dependent: the worst
    corner sits at L1 distance 5*(|cos|+|sin|) from the center).
    """
    if n < 1:
        raise EmptyEnsembleError("ensemble size must be >= 1")
    out = []
    for _ in range(n):
        theta = rng.uniform(0.0, 2.0 * math.pi)
        c = rng.uniform(0.3, 0.7)
        ct, st = math.cos(theta), math.sin(theta)
        g_max = min(c, 1.0 - c) / (DOMAIN_HALF_WIDTH * (abs(ct) + abs(st)))
        g = rng.uniform(0.0, g_max)
        out.append(LinearGradient(a=g * ct, b=g * st, c=c))
    return out


def sample_tanh_ensemble(n: int, rng: np.random.Generator) -> list[TanhEdge]:
    """Draw n random soft edges (gradient + tanh squashing).

    Underlying gradients follow the linear sampler's orientation/offset
    draws with slope magnitude g ~ U(0.02, 0.2); sharpness kappa ~ U(1, 10)
    and bias delta ~ U(-1, 1).
    """
    if n < 1:
        raise EmptyEnsembleError("ensemble size must be >= 1")
    out = []
    for _ in range(n):
        theta = rng.uniform(0.0, 2.0 * math.pi)
        c = rng.uniform(0.3, 0.7)
        g = rng.uniform(0.02, 0.2)
        kappa = rng.uniform(1.0, 10.0)
        delta = rng.uniform(-1.0, 1.0)
        out.append(
            TanhEdge(a=g * math.cos(theta), b=g * math.sin(theta), c=c, kappa=kappa, delta=delta)
        )
    return out


def gradient_params(inp: VisualInput) -> tuple[float, float] | None:
    """(a, b) of the underlying gradient, or None for uniform fields."""
    if isinstance(inp, (LinearGradient, TanhEdge)):
        return (inp.a, inp.b)
    return None


def input_to_json(inp: VisualInput) -> dict:
    if isinstance(inp, Uniform):
        return {"kind": "uniform", "level": inp.level}
    if isinstance(inp, LinearGradient):
        return {"kind": "gradient", "a": inp.a, "b": inp.b, "c": inp.c}
    if isinstance(inp, TanhEdge):
        return {
            "kind": "tanh",
            "a": inp.a,
            "b": inp.b,
            "c": inp.c,
            "kappa": inp.kappa,
            "delta": inp.delta,
        }
    raise TypeError(f"not a visual input: {inp!r}")


def input_from_json(obj: dict) -> VisualInput:
    kind = obj.get("kind")
    if kind == "uniform":
        return Uniform(level=obj["level"])
    if kind == "gradient":
        return LinearGradient(a=obj["a"], b=obj["b"], c=obj["c"])
    if kind == "tanh":
        return TanhEdge(a=obj["a"], b=obj["b"], c=obj["c"], kappa=obj["kappa"], delta=obj["delta"])
    raise InvalidConfigError(f"unknown visual input kind: {kind!r}")
