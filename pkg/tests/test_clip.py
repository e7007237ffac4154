import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from pposmooth.clip import (
    ClipSpec,
    SurrogateSample,
    Variant,
    clip_derivative,
    clip_ppo,
    clip_pporb,
    clip_ppos,
    clip_ppos_printed,
    clip_slopes,
    clip_value,
    clip_values,
    surrogate,
    surrogate_gradient_wrt_ratio,
    surrogate_slopes,
    surrogate_values,
)

ALL_SPECS = [
    ClipSpec(Variant.PPO, 0.2),
    ClipSpec(Variant.PPORB, 0.2, 0.3),
    ClipSpec(Variant.PPOS, 0.2, 0.3),
]


class TestClipValues:
    def test_flat_branches(self):
        assert clip_ppo(1.0, 0.2) == 1.0
        assert clip_ppo(1.5, 0.2) == pytest.approx(1.2, abs=1e-12)
        assert clip_ppo(0.5, 0.2) == pytest.approx(0.8, abs=1e-12)

    def test_rollback_branches(self):
        assert clip_pporb(1.0, 0.2, 0.3) == 1.0
        assert clip_pporb(1.5, 0.2, 0.3) == pytest.approx(1.11, abs=1e-12)
        # unbounded below as the ratio grows
        assert clip_pporb(10.0, 0.2, 0.3) == pytest.approx(-1.44, abs=1e-12)

    def test_smoothed_branches(self):
        assert clip_ppos(1.2, 0.2, 0.3) == pytest.approx(1.2, abs=1e-12)
        assert clip_ppos(0.8, 0.2, 0.3) == pytest.approx(0.8, abs=1e-12)
        expected = -0.3 * math.tanh(0.5) + 1.2 + 0.3 * math.tanh(0.2)
        assert expected == pytest.approx(1.120577, abs=1e-6)
        assert clip_ppos(1.5, 0.2, 0.3) == pytest.approx(expected, abs=1e-12)

    def test_printed_variant_is_discontinuous(self):
        eps, alpha = 0.2, 0.3
        # the swapped constants miss the identity branch by 2*(eps + alpha*tanh(eps))
        gap = abs(clip_ppos_printed(1.0 + eps, eps, alpha) - (1.0 + eps))
        assert gap == pytest.approx(2 * (eps + alpha * math.tanh(eps)), abs=1e-12)

    def test_non_finite_ratio_rejected(self):
        for fn in (lambda r: clip_ppo(r, 0.2), lambda r: clip_pporb(r, 0.2, 0.3), lambda r: clip_ppos(r, 0.2, 0.3)):
            with pytest.raises(ValueError):
                fn(float("nan"))
            with pytest.raises(ValueError):
                fn(float("inf"))

    def test_bad_epsilon_rejected(self):
        with pytest.raises(ValueError):
            clip_ppo(1.0, 0.0)
        with pytest.raises(ValueError):
            ClipSpec(Variant.PPO, -0.1)


class TestClipSpec:
    def test_negative_alpha_only_for_smoothed(self):
        ClipSpec(Variant.PPOS, 0.2, -0.1)
        with pytest.raises(ValueError):
            ClipSpec(Variant.PPORB, 0.2, -0.1)

    def test_non_finite_alpha_rejected(self):
        with pytest.raises(ValueError):
            ClipSpec(Variant.PPOS, 0.2, float("nan"))

    def test_string_variant_coerced(self):
        assert ClipSpec("ppos", 0.2, 0.1).variant is Variant.PPOS


@given(
    eps=st.floats(0.01, 0.95),
    alpha=st.floats(0.0, 2.0),
)
def test_boundary_agreement(eps, alpha):
    for r in (1.0 - eps, 1.0 + eps):
        assert abs(clip_ppo(r, eps) - r) <= 1e-12
        assert abs(clip_pporb(r, eps, alpha) - r) <= 1e-12
        assert abs(clip_ppos(r, eps, alpha) - r) <= 1e-12


@given(
    eps=st.floats(0.01, 0.95),
    alpha=st.floats(-1.0, 2.0),
    u=st.floats(0.0, 1.0, exclude_min=True, exclude_max=True),
)
def test_interior_identity_exact(eps, alpha, u):
    r = (1.0 - eps) + u * 2.0 * eps
    assume(1.0 - eps < r < 1.0 + eps)  # u near 0/1 can round onto a boundary
    assert clip_ppo(r, eps) == r
    assert clip_pporb(r, eps, abs(alpha)) == r
    assert clip_ppos(r, eps, alpha) == r


def test_smoothed_continuity_on_dense_grid():
    eps, alpha = 0.2, 0.3
    grid = np.linspace(1e-3, 10.0, 200001)
    spec = ClipSpec(Variant.PPOS, eps, alpha)
    vals = clip_values(spec, grid)
    spacing = grid[1] - grid[0]
    assert np.max(np.abs(np.diff(vals))) <= spacing * (1.0 + abs(alpha))
    for kink in (1.0 - eps, 1.0 + eps):
        left = clip_ppos(kink - 1e-15, eps, alpha)
        right = clip_ppos(kink + 1e-15, eps, alpha)
        assert abs(left - right) <= 1e-12


def test_smoothed_bounded_rollback_not():
    eps, alpha = 0.2, 0.3
    bound = alpha * (1.0 + math.tanh(eps))
    for r in np.geomspace(1.0 + eps, 1e6, 300):
        assert abs(clip_ppos(float(r), eps, alpha) - (1.0 + eps)) <= bound + 1e-12
    assert clip_pporb(1e6, 0.2, 0.3) < -1e5


class TestDerivative:
    def test_spec_values(self):
        assert clip_derivative(ClipSpec(Variant.PPOS, 0.2, 0.3), 1.5) == pytest.approx(
            -0.235934, abs=1e-6
        )
        assert clip_derivative(ClipSpec(Variant.PPORB, 0.2, 0.3), 1.5) == -0.3
        for spec in ALL_SPECS:
            assert clip_derivative(spec, 1.0) == 1.0

    def test_kink_uses_clipped_branch(self):
        assert clip_derivative(ClipSpec(Variant.PPO, 0.2), 1.2) == 0.0
        assert clip_derivative(ClipSpec(Variant.PPORB, 0.2, 0.3), 0.8) == -0.3

    def test_slope_decay_monotone(self):
        spec = ClipSpec(Variant.PPOS, 0.2, 0.3)
        rs = np.linspace(1.2, 20.0, 5000)
        mags = np.abs(clip_slopes(spec, rs))
        assert np.all(np.diff(mags) <= 0)
        assert mags[-1] < 1e-12

    def test_slope_dominance(self):
        rng = np.random.default_rng(0)
        for alpha in (0.05, 0.2, 0.3):
            sp_s = ClipSpec(Variant.PPOS, 0.2, alpha)
            sp_rb = ClipSpec(Variant.PPORB, 0.2, alpha)
            rs = np.concatenate(
                [rng.uniform(1.2 + 1e-12, 10.0, 500), rng.uniform(1e-9, 0.8, 500)]
            )
            assert np.all(np.abs(clip_slopes(sp_s, rs)) < np.abs(clip_slopes(sp_rb, rs)))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        h = 1e-5
        checked = 0
        while checked < 10_000:
            eps = float(rng.uniform(0.05, 0.5))
            alpha = float(rng.uniform(0.1, 0.5))
            r = float(rng.uniform(0.05, 3.0))
            if min(abs(r - (1 - eps)), abs(r - (1 + eps))) < 1e-3:
                continue
            for spec in (
                ClipSpec(Variant.PPO, eps),
                ClipSpec(Variant.PPORB, eps, alpha),
                ClipSpec(Variant.PPOS, eps, alpha),
            ):
                fd = (clip_value(spec, r + h) - clip_value(spec, r - h)) / (2 * h)
                ana = clip_derivative(spec, r)
                assert abs(ana - fd) <= 1e-7 * max(abs(ana), abs(fd), 1e-10)
                checked += 1


class TestSurrogate:
    def test_spec_examples(self):
        ppo = ClipSpec(Variant.PPO, 0.2)
        assert surrogate(ppo, SurrogateSample(1.5, 1.0)) == pytest.approx(1.2, abs=1e-12)
        assert surrogate(ppo, SurrogateSample(0.5, -1.0)) == pytest.approx(-0.8, abs=1e-12)
        for spec in ALL_SPECS:
            assert surrogate(spec, SurrogateSample(1.0, 2.0)) == 2.0

    def test_gradient_examples(self):
        ppo = ClipSpec(Variant.PPO, 0.2)
        assert surrogate_gradient_wrt_ratio(ppo, SurrogateSample(1.5, 1.0)) == 0.0
        ppos = ClipSpec(Variant.PPOS, 0.2, 0.3)
        assert surrogate_gradient_wrt_ratio(ppos, SurrogateSample(1.5, 1.0)) == pytest.approx(
            -0.235934, abs=1e-6
        )
        for spec in ALL_SPECS:
            assert surrogate_gradient_wrt_ratio(spec, SurrogateSample(1.0, 3.0)) == 3.0

    def test_upper_bound_by_unclipped(self):
        rng = np.random.default_rng(1)
        for spec in ALL_SPECS:
            r = rng.uniform(0.01, 5.0, 2000)
            a = rng.normal(size=2000)
            assert np.all(surrogate_values(spec, r, a) <= r * a + 1e-15)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        h = 1e-5
        checked = 0
        while checked < 10_000:
            eps = float(rng.uniform(0.05, 0.5))
            alpha = float(rng.uniform(0.1, 0.5))
            r = float(rng.uniform(0.05, 3.0))
            a = float(rng.normal())
            if min(abs(r - (1 - eps)), abs(r - (1 + eps))) < 1e-3 or abs(a) < 1e-3:
                continue
            for spec in (
                ClipSpec(Variant.PPO, eps),
                ClipSpec(Variant.PPORB, eps, alpha),
                ClipSpec(Variant.PPOS, eps, alpha),
            ):
                fd = (
                    surrogate(spec, SurrogateSample(r + h, a))
                    - surrogate(spec, SurrogateSample(r - h, a))
                ) / (2 * h)
                ana = surrogate_gradient_wrt_ratio(spec, SurrogateSample(r, a))
                assert abs(ana - fd) <= 1e-7 * max(abs(ana), abs(fd), 1e-10)
                checked += 1

    def test_invalid_sample_rejected(self):
        with pytest.raises(ValueError):
            SurrogateSample(-1.0, 0.5)
        with pytest.raises(ValueError):
            SurrogateSample(float("inf"), 0.5)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(3)
    r = rng.uniform(0.01, 4.0, 500)
    a = rng.normal(size=500)
    for spec in ALL_SPECS:
        vals = clip_values(spec, r)
        slopes = clip_slopes(spec, r)
        s_slopes = surrogate_slopes(spec, r, a)
        for i in range(len(r)):
            assert vals[i] == clip_value(spec, float(r[i]))
            assert slopes[i] == clip_derivative(spec, float(r[i]))
            assert s_slopes[i] == surrogate_gradient_wrt_ratio(
                spec, SurrogateSample(float(r[i]), float(a[i]))
            )
