"""Stochastic-approximation trackers for time-evolving average exposure.

Each tracker keeps one scalar estimate and nudges it toward every new
observation: estimate += step * (observation - estimate). Decreasing
steps (1/n) average a static target; a constant step keeps tracking a
drifting one. The vanilla tracker observes exposure bits of uniform
nodes; the friendship-paradox tracker observes degree-corrected exposure
of random friends.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import cascade
from .cascade import SharingState, true_exposure
from .genmodel import degree_sharing_correlation
from .graph import Graph, average_degree, sample_random_friend, sample_uniform_node

DEFAULT_STEP_SIZE = 0.01
DEFAULT_UPDATES_PER_STEP = 100


@dataclass(frozen=True)
class StepPolicy:
    """Step-size schedule: 'decreasing' uses 1/n at update n, 'constant' uses epsilon."""

    kind: str = "constant"
    epsilon: float = DEFAULT_STEP_SIZE

    def __post_init__(self):
        if self.kind not in ("decreasing", "constant"):
            raise ValueError(f"unknown step policy: {self.kind!r}")
        if self.kind == "constant" and not self.epsilon > 0.0:
            raise ValueError("constant step size must be positive")

    def step(self, update_index: int) -> float:
        """Step size for the update_index-th update (1-based)."""
        return 1.0 / update_index if self.kind == "decreasing" else self.epsilon


@dataclass(frozen=True)
class TrackingSchedule:
    """Timescale separation: tracker updates per diffusion step."""

    updates_per_diffusion_step: int = DEFAULT_UPDATES_PER_STEP

    def __post_init__(self):
        if self.updates_per_diffusion_step < 1:
            raise ValueError("need at least one update per diffusion step")


@dataclass(frozen=True)
class TrackerState:
    """Current estimate of one tracker plus its update count and policy."""

    estimate: float
    updates_done: int
    kind: str  # 'vanilla' | 'fp'
    policy: StepPolicy

    def __post_init__(self):
        if self.kind not in ("vanilla", "fp"):
            raise ValueError(f"unknown tracker kind: {self.kind!r}")


def make_tracker(kind: str, policy: StepPolicy, initial_estimate: float = 0.0) -> TrackerState:
    return TrackerState(initial_estimate, 0, kind, policy)


def tracker_update(state: TrackerState, g: Graph, s_t: SharingState, rng: np.random.Generator) -> TrackerState:
    """One tracker update against the sharing snapshot s_t.

    vanilla: observe f(X) for a fresh uniform node X. fp: observe
    d_bar * f(Y)/d(Y) for a fresh random friend Y. Returns the new state;
    the input state is not mutated.
    """
    if state.kind == "vanilla":
        x = sample_uniform_node(g, rng)
        obs = float(s_t.mask[g.neighbors(x)].any())
    else:
        if g.num_edges < 1:
            raise ValueError("the fp tracker needs at least one edge")
        y = sample_random_friend(g, rng)
        exposed = bool(s_t.mask[g.neighbors(y)].any())
        obs = average_degree(g) * exposed / g.degree(y)
    n = state.updates_done + 1
    new_estimate = state.estimate + state.policy.step(n) * (obs - state.estimate)
    return replace(state, estimate=new_estimate, updates_done=n)


@dataclass(frozen=True)
class TrackRecord:
    """Per-diffusion-step snapshot of the truth and both trackers."""

    step: int
    true_exposure: float
    vanilla_estimate: float
    fp_estimate: float
    vanilla_abs_error: float
    fp_abs_error: float
    degree_sharing_corr: float  # NaN when undefined at this step


def run_tracking_experiment(
    g: Graph,
    *,
    model: str,
    steps: int,
    schedule: TrackingSchedule | int = DEFAULT_UPDATES_PER_STEP,
    vanilla_policy: StepPolicy | None = None,
    fp_policy: StepPolicy | None = None,
    seeds=None,
    seed_count: int = cascade.DEFAULT_SEED_COUNT,
    p_inf: float = cascade.DEFAULT_INFECTION_PROB,
    theta: float = cascade.DEFAULT_LTM_THRESHOLD,
    rng: np.random.Generator = None,
    initial_estimate: float = 0.0,
    icm_retry: bool = False,
    ltm_strict: bool = False,
) -> list[TrackRecord]:
    """Advance a cascade step by step while both trackers chase its exposure.

    Per diffusion step: advance the cascade once, compute the exact exposed
    fraction, then run the scheduled number of updates for each tracker
    against the frozen step-t sharing state (sampling with replacement).
    Records one row per step t = 1..steps.
    """
    if model not in ("icm", "ltm"):
        raise ValueError(f"unknown cascade model: {model!r}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if isinstance(schedule, int):
        schedule = TrackingSchedule(schedule)
    if vanilla_policy is None:
        vanilla_policy = StepPolicy()
    if fp_policy is None:
        fp_policy = StepPolicy()
    if seeds is None:
        if not 1 <= seed_count <= g.num_nodes:
            raise ValueError("seed_count must lie in [1, num_nodes]")
        seeds = rng.choice(g.num_nodes, size=seed_count, replace=False)
    state = SharingState.from_sharers(seeds, g.num_nodes)
    vanilla = make_tracker("vanilla", vanilla_policy, initial_estimate)
    fp = make_tracker("fp", fp_policy, initial_estimate)
    records = []
    for t in range(1, steps + 1):
        if model == "icm":
            state = cascade.icm_step(g, state, p_inf, rng, retry=icm_retry)
        else:
            state = cascade.ltm_step(g, state, theta, strict=ltm_strict)
        f_bar = true_exposure(g, state)
        for _ in range(schedule.updates_per_diffusion_step):
            vanilla = tracker_update(vanilla, g, state, rng)
            fp = tracker_update(fp, g, state, rng)
        records.append(
            TrackRecord(
                step=t,
                true_exposure=f_bar,
                vanilla_estimate=vanilla.estimate,
                fp_estimate=fp.estimate,
                vanilla_abs_error=abs(vanilla.estimate - f_bar),
                fp_abs_error=abs(fp.estimate - f_bar),
                degree_sharing_corr=degree_sharing_correlation(g, state),
            )
        )
    return records
