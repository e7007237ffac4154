"""Actor-critic training loop over the clipped surrogate family.

One run is strictly single-threaded and deterministic given its seed:
initialization, rollout collection, and minibatch shuffling each draw from
seeds derived from (run seed, epoch, pass).  Actor and critic are separate
networks with independent Adam states.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import gae
from .approximator import AdamState, ParamVector, adam_init, adam_step, backward, forward_batch
from .clip import ClipSpec, Variant, clip_values, surrogate_slopes, surrogate_values
from .envs import ConfigError, RolloutBatch, collect_rollout, make_env
from .policy import (
    CriticNet,
    GaussianPolicy,
    _LOG_2PI,
    make_critic,
    make_policy,
    policy_entropy,
    sample_action,
)

__all__ = [
    "TrainConfig",
    "RunRecord",
    "TrainingAborted",
    "train",
    "actor_minibatch_update",
    "critic_minibatch_update",
    "evaluate",
    "fill_advantages",
]

_RATIO_EXP_CLAMP = 20.0

CSV_COLUMNS = [
    "epoch",
    "env_steps",
    "mean_reward",
    "reward_std",
    "entropy",
    "ratio_in_range_frac",
    "clip_frac",
    "actor_loss",
    "critic_loss",
]


@dataclass
class TrainConfig:
    """All run hyperparameters; defaults follow the benchmark settings
    (eps=0.2, lr=3e-4, gamma=0.99, lambda=0.95, 100 epochs of 2500 steps,
    2 passes over minibatches of 128, one hidden layer of 128)."""

    clip: ClipSpec = field(default_factory=lambda: ClipSpec(Variant.PPO, 0.2, 0.0))
    env_name: str = "reacher2d"
    seed: int = 0
    gamma: float = 0.99
    lam: float = 0.95
    learning_rate: float = 3e-4
    epochs: int = 100
    steps_per_epoch: int = 2500
    repeat_per_collect: int = 2
    batch_size: int = 128
    hidden_dim: int = 128
    normalize_advantages: bool = True
    max_grad_norm: float | None = None

    def validate(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must be in (0,1), got {self.gamma}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0,1], got {self.lam}")
        for name in ("epochs", "steps_per_epoch", "repeat_per_collect", "batch_size", "hidden_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_grad_norm is not None and self.max_grad_norm <= 0:
            raise ConfigError("max_grad_norm must be positive when set")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["clip"] = {
            "variant": self.clip.variant.value,
            "epsilon": self.clip.epsilon,
            "alpha": self.clip.alpha,
        }
        return d


@dataclass
class RunRecord:
    """Per-epoch time series plus final summary statistics."""

    epoch: list[int] = field(default_factory=list)
    env_steps: list[int] = field(default_factory=list)
    mean_reward: list[float] = field(default_factory=list)
    reward_std: list[float] = field(default_factory=list)
    entropy: list[float] = field(default_factory=list)
    ratio_in_range_frac: list[float] = field(default_factory=list)
    clip_frac: list[float] = field(default_factory=list)
    actor_loss: list[float] = field(default_factory=list)
    critic_loss: list[float] = field(default_factory=list)
    final_summary: dict = field(default_factory=dict)

    def append(self, **kwargs) -> None:
        for key, value in kwargs.items():
            getattr(self, key).append(value)

    def __len__(self) -> int:
        return len(self.epoch)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for i in range(len(self)):
                writer.writerow([getattr(self, col)[i] for col in CSV_COLUMNS])

    def summary_json(self, config: TrainConfig) -> dict:
        return {
            "config": config.to_dict(),
            "epochs_completed": len(self),
            "final_mean_reward": self.mean_reward[-1] if self.mean_reward else None,
            "final_entropy": self.entropy[-1] if self.entropy else None,
            "mean_ratio_in_range_frac": float(np.mean(self.ratio_in_range_frac)) if self.ratio_in_range_frac else None,
            "mean_clip_frac": float(np.mean(self.clip_frac)) if self.clip_frac else None,
            **self.final_summary,
        }


class TrainingAborted(RuntimeError):
    """Raised when a non-finite loss or gradient appears mid-run."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def fill_advantages(batch: RolloutBatch, gamma: float, lam: float, normalize: bool) -> None:
    """Compute GAE advantages and critic returns for every segment in place."""
    advantages = np.empty(len(batch))
    for seg in batch.segments:
        dones = np.zeros(seg.end - seg.start)
        if seg.terminated:
            dones[-1] = 1.0
        traj = gae.Trajectory(
            rewards=batch.rewards[seg.start : seg.end],
            values=batch.value_old[seg.start : seg.end],
            bootstrap_value=seg.bootstrap_value,
            dones=dones,
        )
        advantages[seg.start : seg.end] = gae.gae_advantages(traj, gamma, lam)
    batch.returns = gae.returns_for_critic(advantages, batch.value_old)
    if normalize and len(batch) >= 2:
        advantages = gae.normalize_advantages(advantages)
    batch.advantages = advantages


def _actor_flat(policy: GaussianPolicy) -> np.ndarray:
    return np.concatenate([policy.mean_net.values, policy.log_std])


def _set_actor_flat(policy: GaussianPolicy, flat: np.ndarray) -> None:
    n = policy.mean_net.values.size
    policy.mean_net = ParamVector(flat[:n].copy(), policy.mean_net.dims)
    policy.log_std = flat[n:].copy()
    policy.clamp_log_std()


def actor_surrogate_and_grad(
    policy: GaussianPolicy,
    states: np.ndarray,
    actions: np.ndarray,
    log_prob_old: np.ndarray,
    advantages: np.ndarray,
    clip_spec: ClipSpec,
):
    """Mean clipped surrogate over the slice and its gradient w.r.t. the
    flattened actor parameters (mean net then log_std).

    Returns (objective, flat gradient, stats dict).
    """
    batch = len(states)
    mu, record = forward_batch(policy.mean_net, states)
    sigma = np.exp(policy.log_std)
    z = (actions - mu) / sigma
    log_prob_new = np.sum(-0.5 * z * z - policy.log_std - 0.5 * _LOG_2PI, axis=1)
    diff = log_prob_new - log_prob_old
    clamped = np.abs(diff) > _RATIO_EXP_CLAMP
    ratios = np.exp(np.clip(diff, -_RATIO_EXP_CLAMP, _RATIO_EXP_CLAMP))

    objective = float(np.mean(surrogate_values(clip_spec, ratios, advantages)))
    dl_dr = surrogate_slopes(clip_spec, ratios, advantages)
    # d(objective)/d(log_prob_new); the ratio is constant where the exponent clamps
    coef = np.where(clamped, 0.0, dl_dr * ratios) / batch
    grad_mu = coef[:, None] * (z / sigma)
    grad_net = backward(policy.mean_net, record, grad_mu)
    grad_log_std = (coef[:, None] * (z * z - 1.0)).sum(axis=0)

    eps = clip_spec.epsilon
    in_range = np.abs(ratios - 1.0) < eps
    clipped_active = ~in_range & (ratios * advantages >= clip_values(clip_spec, ratios) * advantages)
    stats = {
        "ratio_in_range_frac": float(np.mean(in_range)),
        "clip_frac": float(np.mean(clipped_active)),
    }
    return objective, np.concatenate([grad_net.values, grad_log_std]), stats


def actor_minibatch_update(
    policy: GaussianPolicy,
    batch_slice: dict,
    clip_spec: ClipSpec,
    adam: AdamState,
    max_grad_norm: float | None = None,
):
    """One Adam ascent step on the mean clipped surrogate; mutates policy."""
    objective, grad, stats = actor_surrogate_and_grad(
        policy,
        batch_slice["states"],
        batch_slice["actions"],
        batch_slice["log_prob_old"],
        batch_slice["advantages"],
        clip_spec,
    )
    if not (math.isfinite(objective) and np.all(np.isfinite(grad))):
        raise TrainingAborted(
            "non-finite actor objective or gradient",
            {"stat": "actor", "objective": objective},
        )
    if max_grad_norm is not None:
        norm = float(np.linalg.norm(grad))
        if norm > max_grad_norm:
            grad = grad * (max_grad_norm / norm)
    _set_actor_flat(policy, adam_step(adam, _actor_flat(policy), grad, ascend=True))
    stats["actor_loss"] = objective
    return policy, stats


def critic_minibatch_update(critic: CriticNet, batch_slice: dict, adam: AdamState):
    """One Adam descent step on mean squared error to the returns."""
    states = batch_slice["states"]
    returns = batch_slice["returns"]
    values, record = forward_batch(critic.value_net, states)
    residual = values[:, 0] - returns
    loss = float(np.mean(residual * residual))
    if not math.isfinite(loss):
        raise TrainingAborted("non-finite critic loss", {"stat": "critic", "loss": loss})
    grad = backward(critic.value_net, record, (2.0 / len(states)) * residual[:, None])
    critic.value_net = ParamVector(
        adam_step(adam, critic.value_net.values, grad.values, ascend=False),
        critic.value_net.dims,
    )
    return critic, loss


def train(config: TrainConfig):
    """Full training run; returns (policy, critic, RunRecord).

    Aborts with TrainingAborted (carrying epoch/minibatch diagnostics) on
    any non-finite loss.
    """
    config.validate()
    env = make_env(config.env_name)
    seeds = np.random.SeedSequence(config.seed).generate_state(3)
    policy = make_policy(env.spec.obs_dim, env.spec.action_dim, config.hidden_dim, int(seeds[0]))
    critic = make_critic(env.spec.obs_dim, config.hidden_dim, int(seeds[1]))
    rollout_rng = np.random.default_rng(int(seeds[2]))
    actor_adam = adam_init(policy.mean_net.values.size + policy.action_dim, config.learning_rate)
    critic_adam = adam_init(critic.value_net.values.size, config.learning_rate)
    record = RunRecord()
    total_episodes = 0

    for epoch in range(config.epochs):
        batch = collect_rollout(env, policy, critic, config.steps_per_epoch, rollout_rng)
        fill_advantages(batch, config.gamma, config.lam, config.normalize_advantages)
        stats_acc: dict[str, list[float]] = {
            "ratio_in_range_frac": [],
            "clip_frac": [],
            "actor_loss": [],
            "critic_loss": [],
        }
        for rep in range(config.repeat_per_collect):
            shuffle_rng = np.random.default_rng([config.seed, epoch, rep, 0x5F])
            order = shuffle_rng.permutation(len(batch))
            for start in range(0, len(batch), config.batch_size):
                idx = order[start : start + config.batch_size]
                batch_slice = {
                    "states": batch.states[idx],
                    "actions": batch.actions[idx],
                    "log_prob_old": batch.log_prob_old[idx],
                    "advantages": batch.advantages[idx],
                    "returns": batch.returns[idx],
                }
                try:
                    policy, astats = actor_minibatch_update(
                        policy, batch_slice, config.clip, actor_adam, config.max_grad_norm
                    )
                    critic, closs = critic_minibatch_update(critic, batch_slice, critic_adam)
                except TrainingAborted as exc:
                    exc.diagnostics.update(
                        {"epoch": epoch, "pass": rep, "minibatch_start": start}
                    )
                    raise
                stats_acc["ratio_in_range_frac"].append(astats["ratio_in_range_frac"])
                stats_acc["clip_frac"].append(astats["clip_frac"])
                stats_acc["actor_loss"].append(astats["actor_loss"])
                stats_acc["critic_loss"].append(closs)
        total_episodes += len(batch.episode_returns)
        # episode statistics: completed episodes if any, else partial segments
        if batch.episode_returns:
            ep_returns = np.array(batch.episode_returns)
        else:
            ep_returns = np.array(
                [batch.rewards[s.start : s.end].sum() for s in batch.segments]
            )
        record.append(
            epoch=epoch,
            env_steps=(epoch + 1) * config.steps_per_epoch,
            mean_reward=float(np.mean(ep_returns)),
            reward_std=float(np.std(ep_returns)),
            entropy=policy_entropy(policy),
            ratio_in_range_frac=float(np.mean(stats_acc["ratio_in_range_frac"])),
            clip_frac=float(np.mean(stats_acc["clip_frac"])),
            actor_loss=float(np.mean(stats_acc["actor_loss"])),
            critic_loss=float(np.mean(stats_acc["critic_loss"])),
        )
    record.final_summary = {
        "total_env_steps": config.epochs * config.steps_per_epoch,
        "episodes_completed": total_episodes,
    }
    return policy, critic, record


def evaluate(policy: GaussianPolicy, env, episodes: int, rng: np.random.Generator):
    """Mean and population std of episode reward under the stochastic policy."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    totals = np.empty(episodes)
    for i in range(episodes):
        state = env.reset(int(rng.integers(2**63)))
        total = 0.0
        done = False
        while not done:
            action, _ = sample_action(policy, state, rng)
            state, reward, done = env.step(action)
            total += reward
        totals[i] = total
    return float(np.mean(totals)), float(np.std(totals))
