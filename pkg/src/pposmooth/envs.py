"""Toy continuous-control environments and rollout collection.

All dynamics are explicit difference equations with Euler integration at
dt = 0.05 and are fully deterministic given the reset seed.

point-mass family (``reacher2d`` is the 2-D member, ``pointmass-n<k>`` the
k-dimensional one, k in 1..128):
    observation: (position k, goal k, velocity k), obs_dim = 3k
    action:      acceleration, clipped to [-1, 1] per axis
    dynamics:    vel <- clamp(vel + a*dt, +-8); pos <- pos + vel*dt,
                 clamped to the arena [-1, 1] per axis (velocity component
                 zeroed on wall contact)
    reward:      -||pos - goal|| - 0.01*||a||^2, evaluated after the move
    reset:       pos, goal ~ uniform on the arena, vel = 0
    termination: ||pos - goal|| < 0.05; truncation at 200 steps

pendulum (swing-up):
    observation: (cos th, sin th, th_dot), th measured from upright
    action:      torque, clipped to [-2, 2]
    dynamics:    th_dot <- clamp(th_dot + (1.5*g*sin(th) + 3*u)*dt, +-8);
                 th <- wrap(th + th_dot*dt) into (-pi, pi]; g = 10
    reward:      -(th^2 + 0.1*th_dot^2 + 0.001*u^2), evaluated after the move
    reset:       th ~ uniform(-pi, pi), th_dot ~ uniform(-1, 1)
    termination: never; truncation at 200 steps
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .policy import CriticNet, GaussianPolicy, sample_action, state_value

__all__ = [
    "ConfigError",
    "EnvSpec",
    "PointMassEnv",
    "PendulumEnv",
    "make_env",
    "Segment",
    "RolloutBatch",
    "collect_rollout",
]

DT = 0.05
VEL_CLAMP = 8.0
ARENA = 1.0
GOAL_RADIUS = 0.05
MAX_EPISODE_STEPS = 200
PENDULUM_GRAVITY = 10.0


class ConfigError(ValueError):
    """Bad environment or training configuration."""


@dataclass(frozen=True)
class EnvSpec:
    name: str
    obs_dim: int
    action_dim: int
    max_episode_steps: int
    action_clip: float


class _BaseEnv:
    spec: EnvSpec

    def __init__(self) -> None:
        self._steps = 0
        self._done = True
        self.terminated = False
        self.truncated = False

    def reset(self, seed: int) -> np.ndarray:
        self._steps = 0
        self._done = False
        self.terminated = False
        self.truncated = False
        return self._reset_state(np.random.default_rng(seed))

    def step(self, action: np.ndarray):
        if self._done:
            raise RuntimeError("step() called on a finished episode; reset first")
        a = np.clip(np.asarray(action, dtype=np.float64), -self.spec.action_clip, self.spec.action_clip)
        if not np.all(np.isfinite(a)):
            raise ValueError("action must be finite")
        state, reward = self._advance(a)
        self._steps += 1
        self.terminated = self._terminal()
        self.truncated = not self.terminated and self._steps >= self.spec.max_episode_steps
        self._done = self.terminated or self.truncated
        return state, reward, self._done

    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _advance(self, action: np.ndarray):
        raise NotImplementedError

    def _terminal(self) -> bool:
        return False


class PointMassEnv(_BaseEnv):
    """k-dimensional point mass steered toward a per-episode random goal."""

    def __init__(self, n: int, name: str | None = None):
        super().__init__()
        if not 1 <= n <= 128:
            raise ConfigError(f"point-mass dimension must be in 1..128, got {n}")
        self.n = n
        self.spec = EnvSpec(
            name=name or f"pointmass-n{n}",
            obs_dim=3 * n,
            action_dim=n,
            max_episode_steps=MAX_EPISODE_STEPS,
            action_clip=1.0,
        )
        self.pos = np.zeros(n)
        self.goal = np.zeros(n)
        self.vel = np.zeros(n)

    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        self.pos = rng.uniform(-ARENA, ARENA, self.n)
        self.goal = rng.uniform(-ARENA, ARENA, self.n)
        self.vel = np.zeros(self.n)
        return self._obs()

    def _obs(self) -> np.ndarray:
        return np.concatenate([self.pos, self.goal, self.vel])

    def _advance(self, a: np.ndarray):
        self.vel = np.clip(self.vel + a * DT, -VEL_CLAMP, VEL_CLAMP)
        new_pos = self.pos + self.vel * DT
        hit = np.abs(new_pos) > ARENA
        self.pos = np.clip(new_pos, -ARENA, ARENA)
        self.vel[hit] = 0.0
        reward = -float(np.linalg.norm(self.pos - self.goal)) - 0.01 * float(np.dot(a, a))
        return self._obs(), reward

    def _terminal(self) -> bool:
        return float(np.linalg.norm(self.pos - self.goal)) < GOAL_RADIUS


class PendulumEnv(_BaseEnv):
    """Torque-limited pendulum swing-up; angle measured from upright."""

    def __init__(self) -> None:
        super().__init__()
        self.spec = EnvSpec(
            name="pendulum",
            obs_dim=3,
            action_dim=1,
            max_episode_steps=MAX_EPISODE_STEPS,
            action_clip=2.0,
        )
        self.theta = 0.0
        self.theta_dot = 0.0

    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        self.theta = float(rng.uniform(-math.pi, math.pi))
        self.theta_dot = float(rng.uniform(-1.0, 1.0))
        return self._obs()

    def _obs(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta), self.theta_dot])

    def _advance(self, a: np.ndarray):
        u = float(a[0])
        self.theta_dot += (1.5 * PENDULUM_GRAVITY * math.sin(self.theta) + 3.0 * u) * DT
        self.theta_dot = max(-VEL_CLAMP, min(VEL_CLAMP, self.theta_dot))
        self.theta = _wrap_angle(self.theta + self.theta_dot * DT)
        reward = -(self.theta**2 + 0.1 * self.theta_dot**2 + 0.001 * u * u)
        return self._obs(), reward


def _wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    w = theta % (2.0 * math.pi)
    return w - 2.0 * math.pi if w > math.pi else w


_POINTMASS_RE = re.compile(r"^pointmass-n(\d+)$")


def make_env(name: str) -> _BaseEnv:
    if name == "reacher2d":
        return PointMassEnv(2, name="reacher2d")
    if name == "pendulum":
        return PendulumEnv()
    m = _POINTMASS_RE.match(name)
    if m:
        return PointMassEnv(int(m.group(1)))
    raise ConfigError(
        f"unknown environment {name!r}; known: reacher2d, pendulum, pointmass-n<k>"
    )


@dataclass
class Segment:
    """One contiguous stretch of a single episode inside a batch."""

    start: int
    end: int
    terminated: bool
    bootstrap_value: float


@dataclass
class RolloutBatch:
    """Fixed-budget collection of transitions, plus computed targets.

    ``dones`` flags episode end (termination or in-episode truncation at the
    step cap); GAE bootstrapping instead follows each segment's
    ``terminated`` flag.  ``advantages``/``returns`` are filled by the
    trainer before updates consume the batch.
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    log_prob_old: np.ndarray
    value_old: np.ndarray
    segments: list[Segment]
    episode_returns: list[float]
    episode_lengths: list[int]
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.rewards)


def collect_rollout(
    env: _BaseEnv,
    policy: GaussianPolicy,
    critic: CriticNet,
    step_budget: int,
    rng: np.random.Generator,
) -> RolloutBatch:
    """Run the stochastic policy for exactly ``step_budget`` transitions.

    Episodes auto-reset (seeded from ``rng``); the final episode is
    truncated by the budget and bootstrapped with the critic's value.
    """
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    states = np.empty((step_budget, env.spec.obs_dim))
    actions = np.empty((step_budget, env.spec.action_dim))
    rewards = np.empty(step_budget)
    dones = np.zeros(step_budget)
    log_probs = np.empty(step_budget)
    values = np.empty(step_budget)
    segments: list[Segment] = []
    episode_returns: list[float] = []
    episode_lengths: list[int] = []

    state = env.reset(int(rng.integers(2**63)))
    seg_start = 0
    ep_return = 0.0
    ep_len = 0
    for t in range(step_budget):
        action, log_prob = sample_action(policy, state, rng)
        states[t] = state
        actions[t] = action
        log_probs[t] = log_prob
        values[t] = state_value(critic, state)
        state, reward, done = env.step(action)
        rewards[t] = reward
        ep_return += reward
        ep_len += 1
        if done:
            dones[t] = 1.0
            bootstrap = 0.0 if env.terminated else state_value(critic, state)
            segments.append(Segment(seg_start, t + 1, env.terminated, bootstrap))
            episode_returns.append(ep_return)
            episode_lengths.append(ep_len)
            seg_start = t + 1
            ep_return = 0.0
            ep_len = 0
            if t + 1 < step_budget:
                state = env.reset(int(rng.integers(2**63)))
    if seg_start < step_budget:
        segments.append(Segment(seg_start, step_budget, False, state_value(critic, state)))
    return RolloutBatch(
        states=states,
        actions=actions,
        rewards=rewards,
        dones=dones,
        log_prob_old=log_probs,
        value_old=values,
        segments=segments,
        episode_returns=episode_returns,
        episode_lengths=episode_lengths,
    )
