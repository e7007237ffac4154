"""Analytical artifacts: the ratio-restriction comparison on exactly
computable one-parameter Gaussian bandits, the dimension-based alpha guide,
cross-seed run summaries, and the hard property-check suite behind the
``verify`` subcommand.

The bandit comparison is deliberately *reported* rather than asserted: the
difference of the smoothed and rollback objective gradients on clipped
samples is alpha * tanh^2(r-1) * A * grad(r), whose sign disagrees with the
claimed ordering for small step sizes, so the harness records which way the
inequality |r(theta1_smoothed) - 1| < |r(theta1_rollback) - 1| falls at each
step size instead of baking in either direction.  What *is* asserted is the
pointwise restriction-strength ordering |dF_smoothed/dr| < |dF_rollback/dr|
outside the clipping range for alpha > 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .clip import ClipSpec, Variant, clip_slopes, clip_values, surrogate_slopes, surrogate_values

__all__ = [
    "TheoremInstance",
    "TheoremReport",
    "bandit_ratios",
    "bandit_ratio_grads",
    "bandit_surrogate_gradient",
    "omega_membership",
    "omega_set",
    "premise_satisfied",
    "verify_theorem",
    "random_instances",
    "alpha_for_dimension",
    "summarize_runs",
    "run_property_checks",
]

ALPHA_GUIDE_SCALE = 0.3333
ALPHA_GUIDE_RATE = 0.0048
ALPHA_GUIDE_MIN = 0.01
ALPHA_GUIDE_MAX = 0.3333

DEFAULT_BETA_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)


@dataclass(frozen=True)
class TheoremInstance:
    """A stateless 1-parameter Gaussian bandit: pi_theta(a) = N(theta, 1).

    Every quantity in the ratio-restriction comparison is exact here:
    r_t(theta) = exp(lp(a_t; theta) - lp(a_t; theta_old)) and
    d r_t / d theta = r_t * (a_t - theta).
    """

    theta_old: float
    theta_0: float
    sampled_actions: tuple[float, ...]
    advantages: tuple[float, ...]
    epsilon: float
    alpha: float
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID

    def __post_init__(self) -> None:
        if len(self.sampled_actions) != len(self.advantages):
            raise ValueError("actions and advantages must have equal length")
        if any(b <= 0 for b in self.beta_grid):
            raise ValueError("beta grid entries must be positive")


def _log_prob(actions: np.ndarray, theta: float) -> np.ndarray:
    return -0.5 * (actions - theta) ** 2 - 0.5 * math.log(2.0 * math.pi)


def bandit_ratios(instance: TheoremInstance, theta: float) -> np.ndarray:
    a = np.asarray(instance.sampled_actions)
    return np.exp(_log_prob(a, theta) - _log_prob(a, instance.theta_old))


def bandit_ratio_grads(instance: TheoremInstance, theta: float) -> np.ndarray:
    a = np.asarray(instance.sampled_actions)
    return bandit_ratios(instance, theta) * (a - theta)


def bandit_surrogate_gradient(instance: TheoremInstance, spec: ClipSpec) -> float:
    """d/d theta of the mean clipped surrogate at theta_0."""
    ratios = bandit_ratios(instance, instance.theta_0)
    adv = np.asarray(instance.advantages)
    dl_dr = surrogate_slopes(spec, ratios, adv)
    return float(np.mean(dl_dr * bandit_ratio_grads(instance, instance.theta_0)))


def bandit_surrogate_value(instance: TheoremInstance, spec: ClipSpec, theta: float) -> float:
    ratios = bandit_ratios(instance, theta)
    adv = np.asarray(instance.advantages)
    return float(np.mean(surrogate_values(spec, ratios, adv)))


def omega_membership(instance: TheoremInstance, t: int) -> bool:
    """Sample t is in the clipping-condition set: its ratio at theta_0 sits
    outside the range and its unclipped objective has not decreased relative
    to the old policy (where the ratio is 1)."""
    r = float(bandit_ratios(instance, instance.theta_0)[t])
    a = instance.advantages[t]
    return abs(r - 1.0) >= instance.epsilon and r * a >= 1.0 * a


def omega_set(instance: TheoremInstance) -> list[int]:
    return [t for t in range(len(instance.sampled_actions)) if omega_membership(instance, t)]


def premise_satisfied(instance: TheoremInstance, t: int) -> bool:
    """sum_{t' in Omega} <grad r_t, grad r_t'> A_t A_t' > 0 (scalar bandit)."""
    omega = omega_set(instance)
    if t not in omega:
        return False
    grads = bandit_ratio_grads(instance, instance.theta_0)
    adv = np.asarray(instance.advantages)
    total = sum(grads[t] * grads[tp] * adv[t] * adv[tp] for tp in omega)
    return total > 0.0


@dataclass
class TheoremReport:
    """Empirical outcome of the ratio-restriction comparison for one instance."""

    epsilon: float
    alpha: float
    theta_old: float
    theta_0: float
    omega: list[int]
    premise_satisfied: bool
    rows: list[dict] = field(default_factory=list)

    def inequality_fraction(self) -> float:
        if not self.rows:
            return float("nan")
        return float(np.mean([row["inequality_holds"] for row in self.rows]))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "theta_old": self.theta_old,
            "theta_0": self.theta_0,
            "omega": self.omega,
            "premise_satisfied": self.premise_satisfied,
            "inequality_fraction": self.inequality_fraction(),
            "rows": self.rows,
        }


def verify_theorem(instance: TheoremInstance) -> TheoremReport:
    """Form theta_1 for the smoothed and rollback gradients over the beta
    grid and record both post-update ratios for every clipped sample.

    Nothing is asserted about which way the inequality falls; the report is
    the output.
    """
    spec_s = ClipSpec(Variant.PPOS, instance.epsilon, instance.alpha)
    spec_rb = ClipSpec(Variant.PPORB, instance.epsilon, abs(instance.alpha))
    grad_s = bandit_surrogate_gradient(instance, spec_s)
    grad_rb = bandit_surrogate_gradient(instance, spec_rb)
    omega = omega_set(instance)
    premise = bool(omega) and all(premise_satisfied(instance, t) for t in omega)
    report = TheoremReport(
        epsilon=instance.epsilon,
        alpha=instance.alpha,
        theta_old=instance.theta_old,
        theta_0=instance.theta_0,
        omega=omega,
        premise_satisfied=premise,
    )
    for beta in instance.beta_grid:
        theta_s = instance.theta_0 + beta * grad_s
        theta_rb = instance.theta_0 + beta * grad_rb
        r_s = bandit_ratios(instance, theta_s)
        r_rb = bandit_ratios(instance, theta_rb)
        for t in omega:
            dev_s = abs(float(r_s[t]) - 1.0)
            dev_rb = abs(float(r_rb[t]) - 1.0)
            report.rows.append(
                {
                    "beta": float(beta),
                    "t": t,
                    "r_smoothed": float(r_s[t]),
                    "r_rollback": float(r_rb[t]),
                    "dev_smoothed": dev_s,
                    "dev_rollback": dev_rb,
                    "inequality_holds": dev_s < dev_rb,
                }
            )
    return report


def random_instances(count: int, seed: int, epsilon: float = 0.2, alpha: float = 0.3) -> list[TheoremInstance]:
    """Bandit instances whose clipped samples all satisfy the premise.

    Positive-advantage samples are drawn far enough above theta_0 to clip
    upward; a few unclipped fillers keep the instance generic.
    """
    rng = np.random.default_rng(seed)
    instances = []
    while len(instances) < count:
        theta_old = float(rng.uniform(-0.5, 0.5))
        theta_0 = theta_old + float(rng.uniform(0.2, 0.8))
        mid = (theta_old + theta_0) / 2.0
        gap = theta_0 - theta_old
        # r_t(theta_0) = exp(gap * (a - mid)); clipped upward needs a > mid + log(1+eps)/gap
        threshold = mid + math.log(1.0 + epsilon) / gap
        n_clipped = int(rng.integers(1, 4))
        clipped = threshold + rng.uniform(0.2, 1.5, n_clipped)
        fillers = mid + rng.uniform(-0.05, 0.05, int(rng.integers(1, 3)))
        actions = np.concatenate([clipped, fillers])
        advantages = np.concatenate(
            [rng.uniform(0.5, 2.0, n_clipped), rng.uniform(-0.2, 0.2, len(fillers))]
        )
        inst = TheoremInstance(
            theta_old=theta_old,
            theta_0=theta_0,
            sampled_actions=tuple(float(a) for a in actions),
            advantages=tuple(float(a) for a in advantages),
            epsilon=epsilon,
            alpha=alpha,
        )
        omega = omega_set(inst)
        if omega and all(premise_satisfied(inst, t) for t in omega):
            instances.append(inst)
    return instances


def alpha_for_dimension(obs_dim: int) -> float:
    """Slope/scale coefficient suggested for a given observation dimension.

    Exponential decay 0.3333*exp(-0.0048*obs_dim), clamped to [0.01, 0.3333];
    the orientation (alpha as a function of the dimension) is the one that
    reproduces the reference per-environment choices.
    """
    if obs_dim < 1:
        raise ValueError("obs_dim must be >= 1")
    raw = ALPHA_GUIDE_SCALE * math.exp(-ALPHA_GUIDE_RATE * obs_dim)
    return min(ALPHA_GUIDE_MAX, max(ALPHA_GUIDE_MIN, raw))


def summarize_runs(records, window: int = 50) -> dict:
    """Best-window summary across runs.

    For each record, average mean_reward over ``window`` epochs centered on
    the best epoch (clipped to run bounds); report mean and population std
    of those values across records.
    """
    if not records:
        raise ValueError("need at least one run record")
    if window < 1:
        raise ValueError("window must be >= 1")
    values = []
    for record in records:
        rewards = np.asarray(record.mean_reward, dtype=np.float64)
        if len(rewards) == 0:
            raise ValueError("run record has no epochs")
        best = int(np.argmax(rewards))
        lo = max(0, best - window // 2)
        hi = min(len(rewards), lo + window)
        lo = max(0, hi - window)
        values.append(float(np.mean(rewards[lo:hi])))
    return {
        "per_run_best_window": values,
        "mean": float(np.mean(values)),
        "std": float(np.std(values)),
        "window": window,
        "runs": len(values),
    }


# --- property-check suite (hard assertions behind `verify`) ----------------


def _relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-10)


def run_property_checks(seed: int = 0) -> dict:
    """Run the clip/derivative/guide hard checks; returns structured results."""
    from . import clip as clip_mod

    rng = np.random.default_rng(seed)
    checks = []

    def check(name: str, passed: bool, detail: str = "") -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    # boundary + interior agreement over random (eps, alpha)
    worst = 0.0
    interior_ok = True
    for _ in range(100):
        eps = float(rng.uniform(0.05, 0.9))
        alpha = float(rng.uniform(0.0, 1.0))
        for r in (1.0 - eps, 1.0 + eps):
            for f in (
                clip_mod.clip_ppo(r, eps),
                clip_mod.clip_pporb(r, eps, alpha),
                clip_mod.clip_ppos(r, eps, alpha),
            ):
                worst = max(worst, abs(f - r))
        r_in = float(rng.uniform(1.0 - eps, 1.0 + eps))
        interior_ok &= (
            clip_mod.clip_ppo(r_in, eps) == r_in
            and clip_mod.clip_pporb(r_in, eps, alpha) == r_in
            and clip_mod.clip_ppos(r_in, eps, alpha) == r_in
        )
    check("boundary_agreement", worst <= 1e-12, f"max deviation {worst:.2e}")
    check("interior_identity", interior_ok)

    # smoothed-branch continuity at the kinks
    eps, alpha = 0.2, 0.3
    gap = max(
        abs(clip_mod.clip_ppos(1.0 + eps, eps, alpha) - (1.0 + eps)),
        abs(clip_mod.clip_ppos(1.0 - eps, eps, alpha) - (1.0 - eps)),
    )
    check("smoothed_continuity", gap <= 1e-12, f"kink gap {gap:.2e}")

    # boundedness vs rollback unboundedness
    bound = alpha * (1.0 + math.tanh(eps))
    rs = np.linspace(1.0 + eps, 50.0, 2000)
    spec_s = ClipSpec(Variant.PPOS, eps, alpha)
    dev = np.max(np.abs(clip_values(spec_s, rs) - (1.0 + eps)))
    check("smoothed_bounded", dev <= bound + 1e-12, f"max |F-(1+eps)| {dev:.4f} <= {bound:.4f}")
    check(
        "rollback_unbounded",
        clip_mod.clip_pporb(1e6, 0.2, 0.3) < -1e5,
        f"F(1e6) = {clip_mod.clip_pporb(1e6, 0.2, 0.3):.3e}",
    )

    # restoring slope decays and is dominated by the rollback slope
    spec_rb = ClipSpec(Variant.PPORB, eps, alpha)
    slopes_s = np.abs(clip_slopes(spec_s, rs))
    check("slope_decay", bool(np.all(np.diff(slopes_s) <= 0)) and slopes_s[-1] < 1e-6)
    dominated = True
    for a in (0.05, 0.2, 0.3):
        sp_s = ClipSpec(Variant.PPOS, eps, a)
        sp_rb = ClipSpec(Variant.PPORB, eps, a)
        pts = np.concatenate([rng.uniform(1.0 + eps + 1e-9, 10.0, 500), rng.uniform(1e-6, 1.0 - eps, 500)])
        dominated &= bool(np.all(np.abs(clip_slopes(sp_s, pts)) < np.abs(clip_slopes(sp_rb, pts))))
    check("slope_dominance", dominated)

    # derivative vs central finite differences away from the kinks; the
    # sampling box keeps the tanh-tail slope from underflowing below the
    # finite-difference noise floor
    worst_rel = 0.0
    for _ in range(200):
        eps_i = float(rng.uniform(0.05, 0.5))
        alpha_i = float(rng.uniform(0.1, 0.5))
        r = float(rng.uniform(0.05, 3.0))
        if min(abs(r - (1 - eps_i)), abs(r - (1 + eps_i))) < 1e-3:
            continue
        h = 1e-5
        for spec in (
            ClipSpec(Variant.PPO, eps_i),
            ClipSpec(Variant.PPORB, eps_i, alpha_i),
            ClipSpec(Variant.PPOS, eps_i, alpha_i),
        ):
            fd = (clip_mod.clip_value(spec, r + h) - clip_mod.clip_value(spec, r - h)) / (2 * h)
            worst_rel = max(worst_rel, _relative_error(clip_mod.clip_derivative(spec, r), fd))
    check("derivative_vs_fd", worst_rel <= 1e-7, f"max rel err {worst_rel:.2e}")

    # bandit gradient path vs finite differences
    worst_rel = 0.0
    for inst in random_instances(5, seed + 1):
        spec = ClipSpec(Variant.PPOS, inst.epsilon, inst.alpha)
        h = 1e-6
        up = bandit_surrogate_value(inst, spec, inst.theta_0 + h)
        dn = bandit_surrogate_value(inst, spec, inst.theta_0 - h)
        worst_rel = max(
            worst_rel, _relative_error(bandit_surrogate_gradient(inst, spec), (up - dn) / (2 * h))
        )
    check("bandit_gradient_vs_fd", worst_rel <= 1e-7, f"max rel err {worst_rel:.2e}")

    # alpha guide reproduces the reference picks and decreases with dimension
    table = [(376, 0.05), (111, 0.2), (17, 0.3), (8, 0.3), (11, 0.3)]
    guide_ok = all(abs(alpha_for_dimension(d) - v) <= 0.06 for d, v in table)
    dims = range(1, 400)
    decreasing = all(
        alpha_for_dimension(d + 1) <= alpha_for_dimension(d) + 1e-15 for d in dims
    )
    strictly = all(
        alpha_for_dimension(d + 1) < alpha_for_dimension(d)
        for d in range(1, 350)
        if alpha_for_dimension(d) not in (ALPHA_GUIDE_MIN, ALPHA_GUIDE_MAX)
    )
    check("alpha_guide_table", guide_ok)
    check("alpha_guide_decreasing", decreasing and strictly)

    reports = [verify_theorem(inst) for inst in random_instances(20, seed + 2)]
    return {
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
        "theorem_reports": [r.to_dict() for r in reports],
    }


def theorem_report_json(reports: list[TheoremReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)
