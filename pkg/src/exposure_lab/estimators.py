"""Static exposure estimators, their exact variances, and the
variance-comparison decision machinery.

Two unbiased estimators of the exposed fraction are provided: the vanilla
estimator (mean exposure over uniform node samples) and the
friendship-paradox estimator (degree-corrected mean over random friends,
an importance-sampling scheme that over-reaches popular nodes). The
decision machinery answers which one has the smaller variance, either
exactly on a concrete graph or analytically for a degree-mixing ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cascade import SharingState, exposure_all, exposure_bits, true_exposure
from .graph import DiGraph, Graph, average_degree

TIE_TOLERANCE = 1e-12
DEFAULT_SUPPORT_MAX = 10_000


@dataclass(frozen=True)
class EstimatorReport:
    """One estimate with its provenance.

    fp-type estimates can exceed 1 on individual draws (the degree
    correction d_bar/d(Y) is unbounded above); they are deliberately not
    clamped, which is what keeps them unbiased.
    """

    kind: str
    estimate: float
    n: int
    d_bar: float
    samples: tuple | None = None  # per-sample (node, exposed, degree) ledger


def vanilla_estimate(exposures) -> EstimatorReport:
    """Mean of exposure bits from uniformly sampled nodes."""
    bits = np.asarray(exposures, dtype=float)
    if bits.size < 1:
        raise ValueError("need at least one sample")
    return EstimatorReport("vanilla", float(bits.mean()), bits.size, math.nan)


def fp_estimate(
    g: Graph,
    friends,
    s: SharingState,
    d_bar: float | None = None,
    keep_samples: bool = False,
) -> EstimatorReport:
    """Friendship-paradox estimate from random-friend samples.

    estimate = (d_bar / n) * sum of f(Y_i)/d(Y_i). d_bar defaults to the
    exact average degree; pass a value to use an externally known average
    degree instead (the estimate is then unbiased with respect to it).
    """
    friends = np.asarray(friends, dtype=np.int64)
    if friends.size < 1:
        raise ValueError("need at least one sample")
    if g.num_edges < 1:
        raise ValueError("friend sampling requires at least one edge")
    if d_bar is None:
        d_bar = average_degree(g)
    exposed = exposure_bits(g, s, friends)
    degrees = g.degrees[friends]
    estimate = d_bar * float(np.mean(exposed / degrees))
    ledger = tuple(zip(friends.tolist(), exposed.astype(int).tolist(), degrees.tolist())) if keep_samples else None
    return EstimatorReport("fp", estimate, friends.size, float(d_bar), ledger)


def directed_estimates(
    g: DiGraph,
    mode: str,
    samples,
    s: SharingState,
    d_bar: float | None = None,
    keep_samples: bool = False,
) -> EstimatorReport:
    """Directed-network estimate from node, friend, or follower samples.

    node: plain mean of exposures. friend: degree-corrected by out-degree
    (friend samples arrive proportionally to out-degree). follower:
    corrected by in-degree. d_bar is the average in-degree |E|/|V| (equal
    to the average out-degree). Exposure means: at least one in-neighbor
    (an account the node follows) shared.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size < 1:
        raise ValueError("need at least one sample")
    if mode not in ("node", "friend", "follower"):
        raise ValueError(f"unknown estimator mode: {mode!r}")
    exposed = exposure_bits(g, s, samples)
    if mode == "node":
        report_deg = g.in_degrees[samples]
        estimate = float(exposed.mean())
        d_bar = math.nan if d_bar is None else float(d_bar)
    else:
        if g.num_edges < 1:
            raise ValueError(f"{mode} sampling requires at least one edge")
        if d_bar is None:
            d_bar = average_degree(g)
        report_deg = (g.out_degrees if mode == "friend" else g.in_degrees)[samples]
        estimate = float(d_bar) * float(np.mean(exposed / report_deg))
    ledger = tuple(zip(samples.tolist(), exposed.astype(int).tolist(), report_deg.tolist())) if keep_samples else None
    return EstimatorReport(f"directed_{mode}", estimate, samples.size, float(d_bar), ledger)


# ---------------------------------------------------------------------------
# Exact variance analytics and the estimator-choice condition
# ---------------------------------------------------------------------------


def exact_variance_vanilla(f_bar: float, n: int) -> float:
    """Variance of the vanilla estimator with n samples: f(1-f)/n."""
    if not 0.0 <= f_bar <= 1.0:
        raise ValueError("true exposure must lie in [0, 1]")
    if n < 1:
        raise ValueError("need n >= 1")
    return f_bar * (1.0 - f_bar) / n


def _mean_exposure_over_degree(g: Graph, s: SharingState) -> float:
    """E over uniform nodes of f(X)/d(X); exposed nodes always have d >= 1."""
    exposed = exposure_all(g, s)
    ratios = np.zeros(g.num_nodes)
    ratios[exposed] = 1.0 / g.degrees[exposed]
    return float(ratios.mean())


def exact_variance_fp(g: Graph, s: SharingState, n: int) -> float:
    """Variance of the friendship-paradox estimator with n samples.

    (1/n) * (d_bar * E{f(X)/d(X)} - f_bar^2), enumerated exactly over all
    nodes. f(v)/d(v) is taken as 0 whenever f(v) = 0, so degree-0 nodes
    never touch the division.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if g.num_edges < 1:
        raise ValueError("the friend-based estimator needs at least one edge")
    f_bar = true_exposure(g, s)
    return (average_degree(g) * _mean_exposure_over_degree(g, s) - f_bar * f_bar) / n


@dataclass(frozen=True)
class ConditionVerdict:
    """Which estimator the variance comparison prefers.

    lhs_value >= 0 means the friend-based estimator's variance is less than
    or equal to the vanilla one's; ties within TIE_TOLERANCE are flagged.
    """

    lhs_value: float
    fp_preferred: bool
    tie: bool

    @classmethod
    def from_lhs(cls, lhs: float) -> "ConditionVerdict":
        return cls(lhs, lhs >= 0.0, abs(lhs) <= TIE_TOLERANCE)


def condition_empirical(g: Graph, s: SharingState) -> ConditionVerdict:
    """Exact decision rule on a concrete graph and sharing state.

    lhs = E{f(X) (1 - d_bar/d(X))} over uniform nodes, which equals
    n * (Var(vanilla) - Var(fp)). Terms with f(v) = 0 vanish before the
    division, so degree-0 nodes are safe.
    """
    if g.num_edges < 1:
        raise ValueError("the comparison needs at least one edge")
    f_bar = true_exposure(g, s)
    lhs = f_bar - average_degree(g) * _mean_exposure_over_degree(g, s)
    return ConditionVerdict.from_lhs(lhs)


# ---------------------------------------------------------------------------
# Degree-mixing (Markovian) ensembles: analytic form of the same condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovianSpec:
    """A network ensemble fully described by degree-level statistics.

    degree_support: ascending degree values k. degree_dist: P(k) per value.
    neighbor_degree_dist: row k -> P(k'|k), the degree distribution at the
    far end of an edge leaving a degree-k node. sharing_prob_given_degree:
    P(node shares | degree k). Consistency of the implied joint edge
    distribution requires the detailed-balance identity
    k P(k) P(k'|k) = k' P(k') P(k|k'), checked to 1e-9.
    """

    degree_support: np.ndarray
    degree_dist: np.ndarray
    neighbor_degree_dist: np.ndarray
    sharing_prob_given_degree: np.ndarray

    def __post_init__(self):
        ks = np.asarray(self.degree_support, dtype=np.int64)
        pk = np.asarray(self.degree_dist, dtype=float)
        pkk = np.asarray(self.neighbor_degree_dist, dtype=float)
        rho = np.asarray(self.sharing_prob_given_degree, dtype=float)
        object.__setattr__(self, "degree_support", ks)
        object.__setattr__(self, "degree_dist", pk)
        object.__setattr__(self, "neighbor_degree_dist", pkk)
        object.__setattr__(self, "sharing_prob_given_degree", rho)
        m = ks.shape[0]
        if not (pk.shape == (m,) and pkk.shape == (m, m) and rho.shape == (m,)):
            raise ValueError("array shapes must agree with the degree support")
        if np.any(ks < 0) or np.any(np.diff(ks) <= 0):
            raise ValueError("degree support must be ascending and non-negative")
        if np.any(pk < 0) or abs(pk.sum() - 1.0) > 1e-9:
            raise ValueError("degree distribution must sum to 1")
        if np.any(pkk < 0) or np.any(np.abs(pkk.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError("each conditional degree row must sum to 1")
        if np.any((rho < 0) | (rho > 1)):
            raise ValueError("conditional sharing probabilities must lie in [0, 1]")
        flow = ks[:, None] * pk[:, None] * pkk  # edge-endpoint degree flow
        if not np.allclose(flow, flow.T, atol=1e-9, rtol=0.0):
            raise ValueError("detailed balance violated: k P(k) P(k'|k) != k' P(k') P(k|k')")

    @classmethod
    def from_graph(cls, g: Graph, s: SharingState) -> "MarkovianSpec":
        """Exact degree-level statistics of one concrete graph and sharing state."""
        if g.num_edges < 1:
            raise ValueError("need at least one edge")
        if int(g.degrees.min()) == 0:
            raise ValueError("degree-0 nodes have no neighbor-degree distribution; drop them first")
        ks, inverse = np.unique(g.degrees, return_inverse=True)
        m = ks.shape[0]
        counts = np.bincount(inverse, minlength=m)
        pk = counts / g.num_nodes
        u, v = g.edge_array[:, 0], g.edge_array[:, 1]
        pairs = np.concatenate([np.stack([inverse[u], inverse[v]], 1), np.stack([inverse[v], inverse[u]], 1)])
        joint = np.zeros((m, m))
        np.add.at(joint, (pairs[:, 0], pairs[:, 1]), 1.0)
        pkk = joint / joint.sum(axis=1, keepdims=True)
        rho = np.bincount(inverse, weights=s.mask.astype(float), minlength=m) / counts
        return cls(ks, pk, pkk, rho)

    def average_degree(self) -> float:
        return float(np.sum(self.degree_support * self.degree_dist))


def markovian_exposure_prob(spec: MarkovianSpec, k: int) -> float:
    """P(a degree-k node is exposed) in the ensemble.

    All k neighbors independently fail to share with probability
    sum over k' of P(k'|k) (1 - sharing_prob(k')); exposure is the
    complement of all-fail.
    """
    matches = np.flatnonzero(spec.degree_support == k)
    if matches.size == 0:
        raise ValueError(f"degree {k} not in the support")
    i = int(matches[0])
    not_sharing = 1.0 - spec.sharing_prob_given_degree
    fail = float(np.dot(spec.neighbor_degree_dist[i], not_sharing))
    return 1.0 - fail ** int(k)


def condition_analytic(spec: MarkovianSpec) -> ConditionVerdict:
    """Analytic decision rule for a degree-mixing ensemble.

    lhs = sum over k of P(k) (1 - d_bar/k) P(exposed | k); the friend-based
    estimator is preferred when lhs >= 0.
    """
    ks = spec.degree_support
    if np.any(ks == 0):
        raise ValueError("support must exclude degree 0 (the weight 1 - d_bar/k is singular)")
    d_bar = spec.average_degree()
    exposure_probs = np.array([markovian_exposure_prob(spec, int(k)) for k in ks])
    lhs = float(np.sum(spec.degree_dist * (1.0 - d_bar / ks) * exposure_probs))
    return ConditionVerdict.from_lhs(lhs)


@dataclass(frozen=True)
class PowerLawDegrees:
    """Truncated integer power-law degree distribution, P(k) proportional to k^-alpha."""

    alpha: float
    k_min: int = 1
    k_max: int = DEFAULT_SUPPORT_MAX

    def __post_init__(self):
        if self.alpha <= 2.0:
            raise ValueError("power-law exponent must exceed 2")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")

    def support(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def pmf(self) -> np.ndarray:
        w = self.support().astype(float) ** -self.alpha
        return w / w.sum()

    def truncated_tail_mass(self) -> float:
        """Approximate probability mass discarded beyond k_max (integral bound)."""
        w_sum = float((self.support().astype(float) ** -self.alpha).sum())
        tail = self.k_max ** (1.0 - self.alpha) / (self.alpha - 1.0)
        return tail / (w_sum + tail)


@dataclass(frozen=True)
class ExponentialDegrees:
    """Truncated integer exponential degree distribution, P(k) proportional to exp(-rate k)."""

    rate: float
    k_min: int = 1
    k_max: int = DEFAULT_SUPPORT_MAX

    def __post_init__(self):
        if self.rate <= 0.0:
            raise ValueError("rate must be positive")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")

    def support(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def pmf(self) -> np.ndarray:
        w = np.exp(-self.rate * self.support().astype(float))
        return w / w.sum()

    def truncated_tail_mass(self) -> float:
        """Exact probability mass discarded beyond k_max (geometric tail)."""
        w_sum = float(np.exp(-self.rate * self.support().astype(float)).sum())
        tail = math.exp(-self.rate * (self.k_max + 1)) / (1.0 - math.exp(-self.rate))
        return tail / (w_sum + tail)


def condition_independent_case(dist, rho_share_0: float) -> ConditionVerdict:
    """Decision rule when sharing is independent of degree.

    Every node shares with probability 1 - rho_share_0 regardless of degree,
    so P(exposed | k) = 1 - rho_share_0^k and
    lhs = E over k of (1 - d_bar/k)(1 - rho_share_0^k), summed over the
    truncated support of ``dist`` (PowerLawDegrees or ExponentialDegrees).
    """
    if not 0.0 <= rho_share_0 <= 1.0:
        raise ValueError("non-sharing probability must lie in [0, 1]")
    ks = dist.support().astype(float)
    pk = dist.pmf()
    d_bar = float(np.sum(ks * pk))
    lhs = float(np.sum(pk * (1.0 - d_bar / ks) * (1.0 - rho_share_0 ** ks)))
    return ConditionVerdict.from_lhs(lhs)


def sharer_degree_sign_heuristic(g: Graph, s: SharingState, sample_size: int, rng: np.random.Generator) -> str:
    """Estimate the sign of the degree-sharing correlation without full data.

    The sharer-side mean degree is exact (the sharer list is known); the
    non-sharer side is estimated from uniform non-sharer samples, or
    computed exactly when sample_size covers the whole complement. Returns
    'positive'/'negative' when the gap exceeds two standard errors of the
    sampled mean, else 'inconclusive'.
    """
    if sample_size < 1:
        raise ValueError("need sample_size >= 1")
    if s.num_sharers == 0:
        raise ValueError("the sharer set must be known and non-empty")
    non_sharers = np.flatnonzero(~s.mask)
    if non_sharers.size == 0:
        raise ValueError("every node shares; the comparison is undefined")
    sharer_mean = float(g.degrees[s.sharers].mean())
    if sample_size >= non_sharers.size:
        picked = g.degrees[non_sharers].astype(float)
        stderr = 0.0
    else:
        picked = g.degrees[non_sharers[rng.integers(0, non_sharers.size, size=sample_size)]].astype(float)
        stderr = float(picked.std(ddof=1)) / math.sqrt(sample_size) if sample_size > 1 else math.inf
    gap = sharer_mean - float(picked.mean())
    if gap > 2.0 * stderr:
        return "positive"
    if gap < -2.0 * stderr:
        return "negative"
    return "inconclusive"
