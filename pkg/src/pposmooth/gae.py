"""Advantage and return computation: TD residuals, GAE, critic targets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Trajectory",
    "td_residuals",
    "gae_advantages",
    "returns_for_critic",
    "normalize_advantages",
]

_DEGENERATE_STD = 1e-8


@dataclass
class Trajectory:
    """Per-step arrays for one collected segment.

    ``dones[t]`` marks true episode termination at step t (future value 0);
    ``bootstrap_value`` is the critic's estimate at the state following the
    last step, used when the segment ends by truncation instead.
    """

    rewards: np.ndarray
    values: np.ndarray
    bootstrap_value: float
    dones: np.ndarray

    def __post_init__(self) -> None:
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.dones = np.asarray(self.dones, dtype=np.float64)
        n = len(self.rewards)
        if n < 1:
            raise ValueError("trajectory must contain at least one step")
        if len(self.values) != n or len(self.dones) != n:
            raise ValueError("rewards, values and dones must have equal length")


def td_residuals(traj: Trajectory, gamma: float) -> np.ndarray:
    """delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    next_values = np.append(traj.values[1:], traj.bootstrap_value)
    return traj.rewards + gamma * next_values * (1.0 - traj.dones) - traj.values


def gae_advantages(traj: Trajectory, gamma: float, lam: float) -> np.ndarray:
    """Backward recursion A_t = delta_t + gamma*lam*(1-done_t)*A_{t+1}."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    deltas = td_residuals(traj, gamma)
    advantages = np.empty_like(deltas)
    acc = 0.0
    for t in range(len(deltas) - 1, -1, -1):
        acc = deltas[t] + gamma * lam * (1.0 - traj.dones[t]) * acc
        advantages[t] = acc
    return advantages


def returns_for_critic(advantages: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Critic regression targets R_t = A_t + V(s_t)."""
    advantages = np.asarray(advantages, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if advantages.shape != values.shape:
        raise ValueError("advantages and values must have equal length")
    return advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """Shift to mean 0 and scale to population std 1; all zeros if degenerate."""
    advantages = np.asarray(advantages, dtype=np.float64)
    if len(advantages) < 2:
        raise ValueError("need at least 2 advantages to normalize")
    std = float(np.std(advantages))
    if std < _DEGENERATE_STD:
        return np.zeros_like(advantages)
    return (advantages - np.mean(advantages)) / std
