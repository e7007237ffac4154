"""The three ratio-clipping mechanisms and the per-sample surrogate objective.

All three clip functions agree with the identity inside [1-eps, 1+eps] and
with each other at the boundaries:

* flat (PPO):      constant outside the range, zero restoring slope
* rollback (PPORB): line of slope -alpha outside, unbounded in value
* smoothed (PPOS):  -alpha*tanh(r-1) plus a continuity constant, bounded,
                    restoring slope decays to zero far from the range

The smoothed branch constants here are the continuity-corrected ones: the
upper branch carries +(1+eps+alpha*tanh(eps)) and the lower branch
+(1-eps-alpha*tanh(eps)), so that both clipped branches meet the identity
branch exactly at 1+-eps.  ``clip_ppos_printed`` keeps the swapped
(discontinuous) constants for diagnostics only; it is never used in training.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Variant",
    "ClipSpec",
    "SurrogateSample",
    "clip_ppo",
    "clip_pporb",
    "clip_ppos",
    "clip_ppos_printed",
    "clip_value",
    "clip_derivative",
    "surrogate",
    "surrogate_gradient_wrt_ratio",
    "clip_values",
    "clip_slopes",
    "surrogate_values",
    "surrogate_slopes",
]


class Variant(str, Enum):
    PPO = "ppo"
    PPORB = "pporb"
    PPOS = "ppos"


def _check_ratio(ratio: float) -> None:
    if not math.isfinite(ratio):
        raise ValueError(f"ratio must be finite, got {ratio!r}")


def _check_epsilon(epsilon: float) -> None:
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise ValueError(f"epsilon must be a positive finite real, got {epsilon!r}")


@dataclass(frozen=True)
class ClipSpec:
    """Selects and parameterizes a clipping function.

    epsilon > 0 is required; values >= 1 are accepted at the library level
    (they disable clipping entirely, which the variant-equivalence check
    relies on) while the CLI additionally enforces epsilon < 1.
    Negative alpha is meaningful only for the smoothed variant.
    """

    variant: Variant
    epsilon: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        _check_epsilon(self.epsilon)
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        if self.alpha < 0.0 and self.variant is not Variant.PPOS:
            raise ValueError(
                f"alpha < 0 is only allowed for the smoothed variant, got "
                f"{self.variant.value} with alpha={self.alpha}"
            )


@dataclass(frozen=True)
class SurrogateSample:
    """One (likelihood ratio, advantage) pair entering the surrogate."""

    ratio: float
    advantage: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.ratio) and self.ratio > 0.0):
            raise ValueError(f"ratio must be finite and > 0, got {self.ratio!r}")
        if not math.isfinite(self.advantage):
            raise ValueError(f"advantage must be finite, got {self.advantage!r}")


def clip_ppo(ratio: float, epsilon: float) -> float:
    """Flat clipping: constant at 1-eps / 1+eps outside the range."""
    _check_ratio(ratio)
    _check_epsilon(epsilon)
    if ratio <= 1.0 - epsilon:
        return 1.0 - epsilon
    if ratio >= 1.0 + epsilon:
        return 1.0 + epsilon
    return ratio


def clip_pporb(ratio: float, epsilon: float, alpha: float) -> float:
    """Rollback clipping: line of slope -alpha outside the range."""
    _check_ratio(ratio)
    _check_epsilon(epsilon)
    if ratio <= 1.0 - epsilon:
        return -alpha * ratio + (1.0 + alpha) * (1.0 - epsilon)
    if ratio >= 1.0 + epsilon:
        return -alpha * ratio + (1.0 + alpha) * (1.0 + epsilon)
    return ratio


def clip_ppos(ratio: float, epsilon: float, alpha: float) -> float:
    """Smoothed clipping: -alpha*tanh(r-1) plus the continuity constant."""
    _check_ratio(ratio)
    _check_epsilon(epsilon)
    te = math.tanh(epsilon)
    t = float(np.tanh(ratio - 1.0))
    if ratio <= 1.0 - epsilon:
        return -alpha * t + (1.0 - epsilon) - alpha * te
    if ratio >= 1.0 + epsilon:
        return -alpha * t + (1.0 + epsilon) + alpha * te
    return ratio


def clip_ppos_printed(ratio: float, epsilon: float, alpha: float) -> float:
    """Smoothed clipping with the branch constants swapped.

    Discontinuous at both boundaries; kept only so the discrepancy with the
    continuity-corrected form can be inspected (``pposmooth verify``).
    """
    _check_ratio(ratio)
    _check_epsilon(epsilon)
    te = math.tanh(epsilon)
    t = float(np.tanh(ratio - 1.0))
    if ratio <= 1.0 - epsilon:
        return -alpha * t + (1.0 + epsilon) + alpha * te
    if ratio >= 1.0 + epsilon:
        return -alpha * t + (1.0 - epsilon) - alpha * te
    return ratio


def clip_value(spec: ClipSpec, ratio: float) -> float:
    """F(ratio) for the variant selected by ``spec``."""
    if spec.variant is Variant.PPO:
        return clip_ppo(ratio, spec.epsilon)
    if spec.variant is Variant.PPORB:
        return clip_pporb(ratio, spec.epsilon, spec.alpha)
    return clip_ppos(ratio, spec.epsilon, spec.alpha)


def clip_derivative(spec: ClipSpec, ratio: float) -> float:
    """dF/dr.  Exactly at r = 1+-eps the clipped-branch one-sided derivative
    is returned (the kink convention used throughout)."""
    _check_ratio(ratio)
    if 1.0 - spec.epsilon < ratio < 1.0 + spec.epsilon:
        return 1.0
    if spec.variant is Variant.PPO:
        return 0.0
    if spec.variant is Variant.PPORB:
        return -spec.alpha
    t = float(np.tanh(ratio - 1.0))
    return -spec.alpha * (1.0 - t * t)


def surrogate(spec: ClipSpec, sample: SurrogateSample) -> float:
    """Per-sample objective min(r*A, F(r)*A)."""
    r, a = sample.ratio, sample.advantage
    return min(r * a, clip_value(spec, r) * a)


def surrogate_gradient_wrt_ratio(spec: ClipSpec, sample: SurrogateSample) -> float:
    """d/dr of the active min branch, times nothing else (dL/dr).

    Ties (r*A == F(r)*A, which happens everywhere inside the range) resolve
    to the clipped branch, whose interior derivative is 1, so the interior
    gradient is exactly A for every variant.
    """
    r, a = sample.ratio, sample.advantage
    if r * a < clip_value(spec, r) * a:
        return a
    return a * clip_derivative(spec, r)


# --- vectorized forms used by the trainer and the property suites ---------


def clip_values(spec: ClipSpec, ratios: np.ndarray) -> np.ndarray:
    """Vectorized F(r).  Interior entries are copied through exactly."""
    r = np.asarray(ratios, dtype=np.float64)
    eps, alpha = spec.epsilon, spec.alpha
    lower = r <= 1.0 - eps
    upper = r >= 1.0 + eps
    if spec.variant is Variant.PPO:
        out = np.where(upper, 1.0 + eps, np.where(lower, 1.0 - eps, r))
    elif spec.variant is Variant.PPORB:
        out = np.where(
            upper,
            -alpha * r + (1.0 + alpha) * (1.0 + eps),
            np.where(lower, -alpha * r + (1.0 + alpha) * (1.0 - eps), r),
        )
    else:
        t = np.tanh(r - 1.0)
        te = math.tanh(eps)
        out = np.where(
            upper,
            -alpha * t + (1.0 + eps) + alpha * te,
            np.where(lower, -alpha * t + (1.0 - eps) - alpha * te, r),
        )
    return out


def clip_slopes(spec: ClipSpec, ratios: np.ndarray) -> np.ndarray:
    """Vectorized dF/dr with the same kink convention as clip_derivative."""
    r = np.asarray(ratios, dtype=np.float64)
    eps, alpha = spec.epsilon, spec.alpha
    inside = (r > 1.0 - eps) & (r < 1.0 + eps)
    if spec.variant is Variant.PPO:
        outside_slope = np.zeros_like(r)
    elif spec.variant is Variant.PPORB:
        outside_slope = np.full_like(r, -alpha)
    else:
        t = np.tanh(r - 1.0)
        outside_slope = -alpha * (1.0 - t * t)
    return np.where(inside, 1.0, outside_slope)


def surrogate_values(spec: ClipSpec, ratios: np.ndarray, advantages: np.ndarray) -> np.ndarray:
    r = np.asarray(ratios, dtype=np.float64)
    a = np.asarray(advantages, dtype=np.float64)
    return np.minimum(r * a, clip_values(spec, r) * a)


def surrogate_slopes(spec: ClipSpec, ratios: np.ndarray, advantages: np.ndarray) -> np.ndarray:
    """Vectorized dL/dr with tie-breaking toward the clipped branch."""
    r = np.asarray(ratios, dtype=np.float64)
    a = np.asarray(advantages, dtype=np.float64)
    unclipped_active = r * a < clip_values(spec, r) * a
    return np.where(unclipped_active, a, a * clip_slopes(spec, r))
