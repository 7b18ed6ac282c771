"""Sharing state, exposure queries, and the two diffusion models.

A node is *exposed* when at least one of its friends shared the item
(neighbors in undirected graphs, in-neighbors in directed ones). Sharing
yourself does not count as exposure unless a friend also shares.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import DiGraph, Graph

DEFAULT_SEED_COUNT = 10
DEFAULT_INFECTION_PROB = 0.05
DEFAULT_LTM_THRESHOLD = 0.05


class SharingState:
    """Immutable snapshot of who has shared the item.

    ``mask`` is one bit per node; ``sharers`` caches the sorted sharer ids
    for intersection queries. ``new_sharers`` records who became a sharer
    at the most recent step (for a seed state: everyone) -- the
    single-attempt cascade model spreads only from these.
    """

    __slots__ = ("mask", "sharers", "new_sharers")

    def __init__(self, mask: np.ndarray, new_sharers: np.ndarray | None = None):
        mask = np.asarray(mask, dtype=bool)
        self.mask = mask
        self.sharers = np.flatnonzero(mask)
        if new_sharers is None:
            self.new_sharers = self.sharers
        else:
            self.new_sharers = np.unique(np.asarray(new_sharers, dtype=np.int64))
        self.mask.setflags(write=False)
        self.sharers.setflags(write=False)
        self.new_sharers.setflags(write=False)

    @classmethod
    def from_sharers(cls, sharers, num_nodes: int) -> "SharingState":
        sharers = np.asarray(sharers, dtype=np.int64)
        if sharers.size and (sharers.min() < 0 or sharers.max() >= num_nodes):
            raise ValueError(f"sharer id out of range [0, {num_nodes})")
        mask = np.zeros(num_nodes, dtype=bool)
        mask[sharers] = True
        return cls(mask)

    @property
    def num_nodes(self) -> int:
        return self.mask.shape[0]

    @property
    def num_sharers(self) -> int:
        return self.sharers.shape[0]

    @property
    def sharing_fraction(self) -> float:
        return self.num_sharers / self.num_nodes if self.num_nodes else 0.0

    def __repr__(self) -> str:
        return f"SharingState(num_nodes={self.num_nodes}, num_sharers={self.num_sharers})"


def _friend_csr(g):
    """Adjacency defining exposure: neighbors, or in-neighbors for DiGraph."""
    if isinstance(g, DiGraph):
        return g.in_indptr, g.in_indices
    return g.indptr, g.indices


def exposure(g, s: SharingState, v: int) -> int:
    """1 iff some friend of v shared, by sorted-list intersection with early exit.

    Walks the two ordered arrays (v's friend list and the sharer list) in
    lockstep and stops at the first common element, so the cost is bounded
    by the shorter of the two lists even when both are large.
    """
    indptr, indices = _friend_csr(g)
    sharers = s.sharers
    i = indptr[v]
    end = indptr[v + 1]
    j = 0
    n_sharers = sharers.shape[0]
    while i < end and j < n_sharers:
        a = indices[i]
        b = sharers[j]
        if a == b:
            return 1
        if a < b:
            i += 1
        else:
            j += 1
    return 0


def exposure_bits(g, s: SharingState, nodes) -> np.ndarray:
    """Vectorized exposure indicator for a batch of nodes (same semantics as exposure)."""
    indptr, indices = _friend_csr(g)
    nodes = np.asarray(nodes, dtype=np.int64)
    lengths = indptr[nodes + 1] - indptr[nodes]
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(nodes.shape[0], dtype=bool)
    bounds = np.concatenate(([0], np.cumsum(lengths)))
    offsets = np.repeat(indptr[nodes] - bounds[:-1], lengths)
    flags = s.mask[indices[np.arange(total) + offsets]]
    csum = np.concatenate(([0], np.cumsum(flags)))
    return (csum[bounds[1:]] - csum[bounds[:-1]]) > 0


def exposure_all(g, s: SharingState) -> np.ndarray:
    """Exposure indicator for every node, computed in one vectorized pass."""
    indptr, indices = _friend_csr(g)
    if indices.shape[0] == 0:
        return np.zeros(g.num_nodes, dtype=bool)
    csum = np.concatenate(([0], np.cumsum(s.mask[indices])))
    return (csum[indptr[1:]] - csum[indptr[:-1]]) > 0


def true_exposure(g, s: SharingState) -> float:
    """Exact fraction of nodes exposed to the item: the estimation target."""
    if g.num_nodes < 1:
        raise ValueError("true exposure is undefined on an empty graph")
    return float(exposure_all(g, s).mean())


@dataclass(frozen=True)
class CascadeTrajectory:
    """Time-indexed sharing snapshots from one cascade run.

    ``states[t]`` is the sharing state after t steps (states[0] is the seed
    state). When the dynamics hit a fixed point before the requested number
    of steps, the remaining entries repeat the fixed point and
    ``fixed_point_step`` records where growth stopped.
    """

    states: list = field(repr=False)
    model_tag: str = "icm"
    params: dict = field(default_factory=dict)
    fixed_point_step: int | None = None

    @property
    def padded(self) -> bool:
        return self.fixed_point_step is not None

    def sharer_counts(self) -> np.ndarray:
        return np.array([st.num_sharers for st in self.states])


def icm_step(g: Graph, s: SharingState, p_inf: float, rng: np.random.Generator, retry: bool = False) -> SharingState:
    """One independent-cascade step.

    Each node that newly shared at the previous step makes one independent
    Bernoulli(p_inf) attempt per non-sharing neighbor; successes share now.
    Earlier sharers never retry (set ``retry=True`` for the re-attempt
    variant where every current sharer attempts each step).
    """
    if not 0.0 <= p_inf <= 1.0:
        raise ValueError("infection probability must lie in [0, 1]")
    sources = s.sharers if retry else s.new_sharers
    if sources.size == 0:
        return SharingState(s.mask, np.empty(0, dtype=np.int64))
    lengths = g.degrees[sources]
    targets = g.indices[
        np.repeat(g.indptr[sources] - np.concatenate(([0], np.cumsum(lengths)[:-1])), lengths)
        + np.arange(int(lengths.sum()))
    ]
    targets = targets[~s.mask[targets]]  # one entry per (source, target) attempt
    hits = np.unique(targets[rng.random(targets.shape[0]) < p_inf])
    if hits.size == 0:
        return SharingState(s.mask, hits)
    mask = s.mask.copy()
    mask[hits] = True
    return SharingState(mask, hits)


def ltm_step(g: Graph, s: SharingState, theta: float, strict: bool = False) -> SharingState:
    """One linear-threshold step (deterministic, consumes no randomness).

    A non-sharing node with degree >= 1 activates when the fraction of its
    neighbors already sharing reaches ``theta`` (strictly exceeds it when
    ``strict``). Degree-0 nodes never activate.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    if g.indices.shape[0] == 0:
        return SharingState(s.mask, np.empty(0, dtype=np.int64))
    csum = np.concatenate(([0], np.cumsum(s.mask[g.indices])))
    counts = csum[g.indptr[1:]] - csum[g.indptr[:-1]]
    eligible = (~s.mask) & (g.degrees > 0)
    frac = np.zeros(g.num_nodes)
    frac[eligible] = counts[eligible] / g.degrees[eligible]
    fires = frac > theta if strict else frac >= theta
    hits = np.flatnonzero(eligible & fires)
    if hits.size == 0:
        return SharingState(s.mask, hits)
    mask = s.mask.copy()
    mask[hits] = True
    return SharingState(mask, hits)


def run_cascade(
    g: Graph,
    model: str,
    steps: int,
    *,
    seeds=None,
    seed_count: int = DEFAULT_SEED_COUNT,
    p_inf: float = DEFAULT_INFECTION_PROB,
    theta: float = DEFAULT_LTM_THRESHOLD,
    rng: np.random.Generator = None,
    icm_retry: bool = False,
    ltm_strict: bool = False,
) -> CascadeTrajectory:
    """Run a cascade for ``steps`` steps from explicit or uniformly drawn seeds.

    Returns a trajectory of steps+1 states. If a step adds no sharers the
    trajectory is padded with the fixed point and flagged.
    """
    if model not in ("icm", "ltm"):
        raise ValueError(f"unknown cascade model: {model!r}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if seeds is None:
        if rng is None:
            raise ValueError("either explicit seeds or an rng for seed selection is required")
        if not 1 <= seed_count <= g.num_nodes:
            raise ValueError("seed_count must lie in [1, num_nodes]")
        seeds = rng.choice(g.num_nodes, size=seed_count, replace=False)
    state = SharingState.from_sharers(seeds, g.num_nodes)
    states = [state]
    params = {"p_inf": p_inf} if model == "icm" else {"theta": theta}
    fixed_point = None
    # A stalled step is a true fixed point for LTM (deterministic) and for
    # single-attempt ICM (empty frontier); the retry variant can stall by
    # chance and still grow later, so it never terminates early.
    may_stop_early = model == "ltm" or not icm_retry
    for t in range(1, steps + 1):
        if model == "icm":
            nxt = icm_step(g, state, p_inf, rng, retry=icm_retry)
        else:
            nxt = ltm_step(g, state, theta, strict=ltm_strict)
        if nxt.num_sharers == state.num_sharers and may_stop_early:
            fixed_point = t - 1
            states.extend([state] * (steps + 1 - len(states)))
            break
        states.append(nxt)
        state = nxt
    return CascadeTrajectory(states=states, model_tag=model, params=params, fixed_point_step=fixed_point)
