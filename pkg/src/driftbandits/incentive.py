"""The incentivized recommendation step.

Each step the principal recommends arm ``a_t`` via the bandit policy, the
agent's myopic greedy choice is ``g_t`` (argmax of the policy's own mean
estimator), and whenever they differ the principal pays the estimate gap
``chi_t = estimate(g_t) - estimate(a_t)`` as compensation.  Paid agents bias
their feedback: the observed reward is ``r_t = X_t(a_t) + f(chi_t)`` where
``f`` is a nondecreasing Lipschitz drift function with ``f(0) = 0``.  The
policy is updated with the biased ``r_t`` — neither party can separate the
true reward from the drift.

``run_segment`` is the single implementation of this loop; it serves the
one-step API, full runs, and the restarting scheduler, and it accumulates
regret/compensation totals without allocating per-step records unless a
trace sink is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .policy import Policy

__all__ = [
    "DriftModel",
    "StepOutcome",
    "RunTotals",
    "CurveRecorder",
    "drift_apply",
    "incentive_step",
    "run_segment",
    "run_incentivized",
]


@dataclass(frozen=True)
class DriftModel:
    """Reward-drift function ``f``: linear ``l*x`` or saturating ``l*min(x, cap)``.

    Both variants are nondecreasing, vanish at 0, and are Lipschitz with
    constant ``l``.
    """

    kind: str = "linear"
    l: float = 0.0
    cap: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "saturating"):
            raise ValueError(f"unknown drift kind {self.kind!r}")
        if self.l != self.l or self.l < 0.0:
            raise ValueError("Lipschitz constant l must be finite and >= 0")
        if self.kind == "saturating":
            if self.cap is None or self.cap <= 0.0:
                raise ValueError("saturating drift requires cap > 0")

    def apply(self, chi: float) -> float:
        if chi != chi or chi < 0.0:
            raise ValueError(f"compensation must be >= 0, got {chi}")
        if self.kind == "linear":
            return self.l * chi
        return self.l * (chi if chi < self.cap else self.cap)


def drift_apply(model: DriftModel, chi: float) -> float:
    """Drift ``f(chi)`` caused by paying compensation ``chi``."""
    return model.apply(chi)


@dataclass(frozen=True, slots=True)
class StepOutcome:
    """Full record of one incentivized step."""

    t: int
    recommended: int
    greedy: int
    compensation: float
    drift: float
    true_reward: float
    observed_reward: float
    batch: int = 1


class RunTotals:
    """Running sums over a (partial) run; carried across restart batches."""

    __slots__ = ("pseudo_regret", "realized_regret", "compensation", "true_reward")

    def __init__(self):
        self.pseudo_regret = 0.0
        self.realized_regret = 0.0
        self.compensation = 0.0
        self.true_reward = 0.0


class CurveRecorder:
    """Per-step cumulative curves (for plot data and trace export)."""

    __slots__ = ("cum_pseudo", "cum_realized", "cum_comp", "cum_reward")

    def __init__(self):
        self.cum_pseudo: list[float] = []
        self.cum_realized: list[float] = []
        self.cum_comp: list[float] = []
        self.cum_reward: list[float] = []


def run_segment(
    policy: Policy,
    env,
    t_start: int,
    t_end: int,
    model: DriftModel,
    rng: Random,
    totals: RunTotals | None = None,
    trace: list | None = None,
    curves: CurveRecorder | None = None,
    batch: int = 1,
) -> RunTotals:
    """Run incentivized steps ``t_start..t_end`` (inclusive), mutating ``policy``.

    During the policy's forced round-robin no greedy arm exists, so no
    compensation is paid and no drift occurs.  Each step consumes the
    policy's recommendation draws (if any), exactly one uniform for the
    Bernoulli reward, then any update draws, in that order.
    """
    sched = env.schedule
    if not (1 <= t_start and t_end <= sched.T):
        raise ValueError(f"steps [{t_start}, {t_end}] outside horizon [1, {sched.T}]")
    if totals is None:
        totals = RunTotals()

    rows = sched.rows
    best = sched.best_mean
    K = policy.K
    recommend = policy.recommend
    observe = policy.observe
    greedy_arm = policy.greedy_arm
    estimate = policy.estimate
    apply_drift = model.apply
    uniform = rng.random

    pseudo = totals.pseudo_regret
    realized = totals.realized_regret
    comp_sum = totals.compensation
    reward_sum = totals.true_reward

    for t in range(t_start, t_end + 1):
        a = recommend(rng)
        if policy.t >= K:
            g = greedy_arm()
            if a != g:
                chi = estimate(g) - estimate(a)
                delta = apply_drift(chi)
            else:
                chi = delta = 0.0
        else:
            g = a
            chi = delta = 0.0
        row = rows[t - 1]
        mu_a = row[a - 1]
        x = 1.0 if uniform() < mu_a else 0.0
        r = x + delta
        observe(a, r, rng)

        mu_star = best[t - 1]
        pseudo += mu_star - mu_a
        realized += mu_star - x
        comp_sum += chi
        reward_sum += x
        if curves is not None:
            curves.cum_pseudo.append(pseudo)
            curves.cum_realized.append(realized)
            curves.cum_comp.append(comp_sum)
            curves.cum_reward.append(reward_sum)
        if trace is not None:
            trace.append(StepOutcome(t, a, g, chi, delta, x, r, batch))

    totals.pseudo_regret = pseudo
    totals.realized_regret = realized
    totals.compensation = comp_sum
    totals.true_reward = reward_sum
    return totals


def incentive_step(
    policy: Policy, env, t: int, model: DriftModel, rng: Random
) -> StepOutcome:
    """Execute the single incentivized step ``t``, updating ``policy`` in place."""
    sink: list[StepOutcome] = []
    run_segment(policy, env, t, t, model, rng, trace=sink)
    return sink[0]


def run_incentivized(
    env,
    policy: Policy,
    model: DriftModel,
    rng: Random,
    totals: RunTotals | None = None,
    trace: list | None = None,
    curves: CurveRecorder | None = None,
) -> RunTotals:
    """Full-horizon incentivized run (no restarts)."""
    return run_segment(
        policy, env, 1, env.schedule.T, model, rng, totals, trace, curves
    )
