"""Diagonal-Gaussian policy and scalar-value critic on top of the approximator.

The standard deviation is a state-independent per-dimension parameter
(stored in log space and clamped to [-5, 2]), so the entropy is a closed
form and the density stays exact: actions are never squashed, environments
clip incoming actions themselves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .approximator import (
    Dims,
    ParamVector,
    backward,
    forward,
    forward_batch,
    init_params,
    save_params,
)

__all__ = [
    "LOG_STD_MIN",
    "LOG_STD_MAX",
    "GaussianPolicy",
    "CriticNet",
    "make_policy",
    "make_critic",
    "sample_action",
    "gaussian_log_prob",
    "log_prob_param_grad",
    "likelihood_ratio",
    "policy_entropy",
    "state_value",
    "save_policy",
    "load_policy",
]

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
_LOG_2PI = math.log(2.0 * math.pi)
_RATIO_EXP_CLAMP = 20.0


@dataclass
class GaussianPolicy:
    mean_net: ParamVector
    log_std: np.ndarray

    def __post_init__(self) -> None:
        self.log_std = np.asarray(self.log_std, dtype=np.float64)
        if self.log_std.shape != (self.action_dim,):
            raise ValueError(
                f"log_std shape {self.log_std.shape} != action dim {self.action_dim}"
            )

    @property
    def action_dim(self) -> int:
        return self.mean_net.dims.output_dim

    @property
    def obs_dim(self) -> int:
        return self.mean_net.dims.input_dim

    def clamp_log_std(self) -> None:
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)


@dataclass
class CriticNet:
    value_net: ParamVector

    def __post_init__(self) -> None:
        if self.value_net.dims.output_dim != 1:
            raise ValueError("critic output dimension must be 1")


def make_policy(obs_dim: int, action_dim: int, hidden_dim: int, seed: int) -> GaussianPolicy:
    net = init_params(Dims(obs_dim, hidden_dim, action_dim), seed)
    return GaussianPolicy(net, np.zeros(action_dim))


def make_critic(obs_dim: int, hidden_dim: int, seed: int) -> CriticNet:
    return CriticNet(init_params(Dims(obs_dim, hidden_dim, 1), seed))


def _mean(policy: GaussianPolicy, state: np.ndarray) -> np.ndarray:
    mu, _ = forward(policy.mean_net, state)
    return mu


def sample_action(policy: GaussianPolicy, state: np.ndarray, rng: np.random.Generator):
    """Draw action = mean(state) + sigma * z and return it with its log-density."""
    mu = _mean(policy, state)
    z = rng.standard_normal(policy.action_dim)
    action = mu + np.exp(policy.log_std) * z
    return action, _log_prob_from_mean(mu, policy.log_std, action)


def _log_prob_from_mean(mu: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> float:
    z = (action - mu) / np.exp(log_std)
    return float(np.sum(-0.5 * z * z - log_std - 0.5 * _LOG_2PI))


def gaussian_log_prob(policy: GaussianPolicy, state: np.ndarray, action: np.ndarray) -> float:
    return _log_prob_from_mean(_mean(policy, state), policy.log_std, np.asarray(action, dtype=np.float64))


def log_prob_param_grad(policy: GaussianPolicy, state: np.ndarray, action: np.ndarray):
    """Gradient of gaussian_log_prob w.r.t. (mean_net params, log_std)."""
    mu, record = forward(policy.mean_net, state)
    sigma = np.exp(policy.log_std)
    z = (np.asarray(action, dtype=np.float64) - mu) / sigma
    grad_net = backward(policy.mean_net, record, (z / sigma)[None, :])
    grad_log_std = z * z - 1.0
    return grad_net, grad_log_std


def likelihood_ratio(log_prob_new: float, log_prob_old: float) -> float:
    """exp of the log-prob difference, exponent clamped to +-20."""
    if not (math.isfinite(log_prob_new) and math.isfinite(log_prob_old)):
        raise ValueError("log probabilities must be finite")
    diff = log_prob_new - log_prob_old
    diff = max(-_RATIO_EXP_CLAMP, min(_RATIO_EXP_CLAMP, diff))
    return math.exp(diff)


def policy_entropy(policy: GaussianPolicy) -> float:
    """Closed-form diagonal-Gaussian entropy (state-independent sigma)."""
    d = policy.action_dim
    return float(0.5 * d * math.log(2.0 * math.pi * math.e) + np.sum(policy.log_std))


def state_value(critic: CriticNet, state: np.ndarray) -> float:
    out, _ = forward(critic.value_net, state)
    return float(out[0])


def state_values(critic: CriticNet, states: np.ndarray) -> np.ndarray:
    out, _ = forward_batch(critic.value_net, states)
    return out[:, 0]


def save_policy(path, policy: GaussianPolicy) -> None:
    """Mean-net checkpoint plus one trailing line of log_std values."""
    save_params(path, policy.mean_net)
    with open(path, "a") as fh:
        fh.write("log_std " + " ".join(repr(float(v)) for v in policy.log_std) + "\n")


def load_policy(path) -> GaussianPolicy:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[-1].startswith("log_std"):
        raise ValueError(f"policy checkpoint missing log_std line in {path}")
    log_std = np.array([float(v) for v in lines[-1].split()[1:]])
    header = lines[0].split()
    dims = Dims(int(header[1]), int(header[2]), int(header[3]))
    values = np.array([float(v) for v in lines[1:-1] if v.strip()])
    return GaussianPolicy(ParamVector(values, dims), log_std)
