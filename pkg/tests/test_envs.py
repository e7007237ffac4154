import math

import numpy as np
import pytest

from pposmooth.envs import (
    ConfigError,
    PendulumEnv,
    PointMassEnv,
    collect_rollout,
    make_env,
)
from pposmooth.policy import likelihood_ratio, make_critic, make_policy


class TestMakeEnv:
    def test_known_names(self):
        assert make_env("reacher2d").spec.obs_dim == 6
        assert make_env("pendulum").spec.obs_dim == 3
        env = make_env("pointmass-n5")
        assert env.spec.obs_dim == 15 and env.spec.action_dim == 5

    def test_reacher_is_2d_pointmass(self):
        a = make_env("reacher2d")
        b = PointMassEnv(2)
        sa = a.reset(seed=7)
        sb = b.reset(seed=7)
        assert np.array_equal(sa, sb)
        act = np.array([0.5, -0.5])
        np.testing.assert_array_equal(a.step(act)[0], b.step(act)[0])

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            make_env("cartpole")
        with pytest.raises(ConfigError):
            make_env("pointmass-n0")
        with pytest.raises(ConfigError):
            make_env("pointmass-n129")


class TestPointMass:
    def place(self, env, pos, goal, vel=None):
        env.reset(seed=0)
        env.pos = np.array(pos, dtype=float)
        env.goal = np.array(goal, dtype=float)
        env.vel = np.zeros(env.n) if vel is None else np.array(vel, dtype=float)

    def test_reset_deterministic(self):
        env = PointMassEnv(3)
        assert np.array_equal(env.reset(seed=42), env.reset(seed=42))
        assert not np.array_equal(env.reset(seed=42), env.reset(seed=43))

    def test_reset_layout(self):
        env = PointMassEnv(2)
        obs = env.reset(seed=1)
        assert obs.shape == (6,)
        assert np.all(np.abs(obs[:4]) <= 1.0)
        assert np.array_equal(obs[4:], np.zeros(2))

    def test_zero_action_reward_is_distance(self):
        env = PointMassEnv(2)
        self.place(env, [0.0, 0.0], [1.0, 0.0])
        _, reward, done = env.step(np.zeros(2))
        assert reward == -1.0
        assert not done

    def test_action_cost_term(self):
        env = PointMassEnv(1)
        self.place(env, [0.0], [0.9])
        _, reward, _ = env.step(np.array([1.0]))
        # vel = 0.05, pos = 0.0025, distance 0.8975, cost 0.01
        assert reward == pytest.approx(-0.8975 - 0.01, abs=1e-12)

    def test_action_clipped_to_unit(self):
        env = PointMassEnv(1)
        self.place(env, [0.0], [0.9])
        _, r_big, _ = env.step(np.array([5.0]))
        self.place(env, [0.0], [0.9])
        _, r_unit, _ = env.step(np.array([1.0]))
        assert r_big == r_unit

    def test_goal_capture_terminates(self):
        env = PointMassEnv(2)
        self.place(env, [0.5, 0.5], [0.5, 0.51])
        _, _, done = env.step(np.zeros(2))
        assert done and env.terminated and not env.truncated

    def test_wall_clamp_and_velocity_zeroing(self):
        env = PointMassEnv(1)
        self.place(env, [1.0], [-1.0], vel=[8.0])
        env.step(np.array([1.0]))
        assert env.pos[0] == 1.0
        assert env.vel[0] == 0.0

    def test_velocity_clamped(self):
        env = PointMassEnv(1)
        self.place(env, [0.0], [0.9], vel=[8.0])
        env.step(np.array([1.0]))
        assert env.vel[0] == 8.0

    def test_truncates_at_step_cap(self):
        env = PointMassEnv(1)
        self.place(env, [-1.0], [1.0])
        done = False
        steps = 0
        while not done:
            _, _, done = env.step(np.array([0.0]))
            steps += 1
        assert steps == 200 and env.truncated and not env.terminated

    def test_step_after_done_raises(self):
        env = PointMassEnv(2)
        self.place(env, [0.5, 0.5], [0.5, 0.5])
        env.step(np.zeros(2))
        with pytest.raises(RuntimeError):
            env.step(np.zeros(2))

    def test_bounds_hold_under_random_policy(self):
        env = PointMassEnv(3)
        rng = np.random.default_rng(5)
        env.reset(seed=int(rng.integers(2**63)))
        for _ in range(2000):
            _, reward, done = env.step(rng.uniform(-1, 1, 3))
            assert np.all(np.abs(env.pos) <= 1.0)
            assert np.all(np.abs(env.vel) <= 8.0)
            assert reward <= 0.0
            if done:
                env.reset(seed=int(rng.integers(2**63)))


class TestPendulum:
    def place(self, env, theta, theta_dot=0.0):
        env.reset(seed=0)
        env.theta = theta
        env.theta_dot = theta_dot

    def test_upright_zero_action(self):
        env = PendulumEnv()
        self.place(env, 0.0, 0.0)
        _, reward, done = env.step(np.zeros(1))
        assert reward == 0.0
        assert not done

    def test_hanging_reward_hand_value(self):
        env = PendulumEnv()
        self.place(env, math.pi, 0.0)
        _, reward, _ = env.step(np.zeros(1))
        # sin(pi) ~ 0 so the state barely moves; reward ~ -(pi^2)
        assert reward == pytest.approx(-(env.theta**2 + 0.1 * env.theta_dot**2), abs=1e-12)
        assert reward < -9.5

    def test_torque_clipped(self):
        env = PendulumEnv()
        self.place(env, 0.5, 0.0)
        env.step(np.array([100.0]))
        big = (env.theta, env.theta_dot)
        self.place(env, 0.5, 0.0)
        env.step(np.array([2.0]))
        assert (env.theta, env.theta_dot) == big

    def test_observation_on_unit_circle(self):
        env = PendulumEnv()
        obs = env.reset(seed=3)
        rng = np.random.default_rng(0)
        for _ in range(500):
            assert obs[0] ** 2 + obs[1] ** 2 == pytest.approx(1.0, abs=1e-12)
            assert -math.pi < env.theta <= math.pi
            assert abs(env.theta_dot) <= 8.0
            obs, _, done = env.step(rng.uniform(-2, 2, 1))
            if done:
                obs = env.reset(seed=int(rng.integers(2**63)))

    def test_never_terminates_only_truncates(self):
        env = PendulumEnv()
        env.reset(seed=9)
        for _ in range(200):
            _, _, done = env.step(np.zeros(1))
        assert done and env.truncated and not env.terminated


class TestCollectRollout:
    def make_parts(self, env_name="reacher2d", seed=0):
        env = make_env(env_name)
        policy = make_policy(env.spec.obs_dim, env.spec.action_dim, 16, seed=seed)
        critic = make_critic(env.spec.obs_dim, 16, seed=seed + 1)
        return env, policy, critic

    def test_exact_budget(self):
        env, policy, critic = self.make_parts()
        batch = collect_rollout(env, policy, critic, 2500, np.random.default_rng(0))
        assert len(batch) == 2500
        assert batch.states.shape == (2500, 6)
        assert batch.actions.shape == (2500, 2)

    def test_deterministic_given_rng(self):
        env1, policy, critic = self.make_parts()
        env2 = make_env("reacher2d")
        b1 = collect_rollout(env1, policy, critic, 600, np.random.default_rng(7))
        b2 = collect_rollout(env2, policy, critic, 600, np.random.default_rng(7))
        assert np.array_equal(b1.states, b2.states)
        assert np.array_equal(b1.actions, b2.actions)
        assert np.array_equal(b1.rewards, b2.rewards)
        assert np.array_equal(b1.log_prob_old, b2.log_prob_old)

    def test_ratio_against_collecting_policy_is_one(self):
        # recomputing log-probs under the same policy must reproduce ratio 1
        from pposmooth.policy import gaussian_log_prob

        env, policy, critic = self.make_parts(seed=3)
        batch = collect_rollout(env, policy, critic, 300, np.random.default_rng(1))
        for t in range(0, 300, 17):
            lp = gaussian_log_prob(policy, batch.states[t], batch.actions[t])
            assert likelihood_ratio(lp, batch.log_prob_old[t]) == pytest.approx(1.0, abs=1e-12)

    def test_segments_partition_budget(self):
        env, policy, critic = self.make_parts(seed=5)
        batch = collect_rollout(env, policy, critic, 1000, np.random.default_rng(2))
        assert batch.segments[0].start == 0
        assert batch.segments[-1].end == 1000
        for a, b in zip(batch.segments, batch.segments[1:]):
            assert a.end == b.start
        # a terminated segment bootstraps zero
        for seg in batch.segments:
            if seg.terminated:
                assert seg.bootstrap_value == 0.0

    def test_episode_accounting(self):
        env, policy, critic = self.make_parts(seed=6)
        batch = collect_rollout(env, policy, critic, 1000, np.random.default_rng(3))
        assert len(batch.episode_returns) == len(batch.episode_lengths)
        assert sum(batch.episode_lengths) <= 1000
        done_steps = int(batch.dones.sum())
        assert done_steps == len(batch.episode_returns)
        # returns match the reward sums over the finished segments
        finished = [s for s in batch.segments if batch.dones[s.end - 1] == 1.0]
        for seg, ret in zip(finished, batch.episode_returns):
            assert batch.rewards[seg.start : seg.end].sum() == pytest.approx(ret, abs=1e-9)

    def test_bad_budget(self):
        env, policy, critic = self.make_parts()
        with pytest.raises(ValueError):
            collect_rollout(env, policy, critic, 0, np.random.default_rng(0))
