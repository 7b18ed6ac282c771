"""Immutable graph storage and the sampling primitives estimators consume.

Graphs are stored in compressed sparse row form (sorted neighbor lists)
plus a flat edge array, so uniform edge sampling -- the primitive behind
friend sampling -- is O(1). Construction simplifies the input: self-loops
are dropped and parallel edges collapsed, and degrees always reflect the
simplified graph.
"""

from __future__ import annotations

import numpy as np

WALK_BURN_IN_FACTOR = 10  # default burn-in = 10 * |V|, a conservative mixing heuristic


def _as_edge_array(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64)
    if e.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if e.ndim != 2 or e.shape[1] != 2:
        raise ValueError("edges must be a sequence of (u, v) pairs")
    return e


def _csr_from_pairs(src: np.ndarray, dst: np.ndarray, num_nodes: int):
    """Sorted-CSR adjacency from (src, dst) pairs. dst lists sorted per row."""
    order = np.lexsort((dst, src))
    indices = dst[order]
    counts = np.bincount(src, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


class Graph:
    """Immutable undirected simple graph.

    ``edge_array`` holds each edge once as (u, v) with u <= v, in
    lexicographic order; ``indptr``/``indices`` are the CSR adjacency with
    ascending neighbor lists. Safe to share across threads: nothing here
    mutates after construction.
    """

    __slots__ = ("num_nodes", "indptr", "indices", "edge_array", "degrees")

    def __init__(self, num_nodes: int, indptr, indices, edge_array):
        self.num_nodes = int(num_nodes)
        self.indptr = indptr
        self.indices = indices
        self.edge_array = edge_array
        self.degrees = indptr[1:] - indptr[:-1]
        _freeze(self.indptr, self.indices, self.edge_array, self.degrees)

    @property
    def num_edges(self) -> int:
        return self.edge_array.shape[0]

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor list of v (a read-only view)."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


class DiGraph:
    """Immutable directed simple graph.

    An edge u -> v means v follows u: u is a friend of v. ``edge_array``
    holds distinct (u, v) pairs; out- and in-adjacency are kept mutually
    consistent with sorted neighbor lists.
    """

    __slots__ = (
        "num_nodes",
        "out_indptr",
        "out_indices",
        "in_indptr",
        "in_indices",
        "edge_array",
        "out_degrees",
        "in_degrees",
    )

    def __init__(self, num_nodes: int, edge_array):
        self.num_nodes = int(num_nodes)
        self.edge_array = edge_array
        src, dst = edge_array[:, 0], edge_array[:, 1]
        self.out_indptr, self.out_indices = _csr_from_pairs(src, dst, num_nodes)
        self.in_indptr, self.in_indices = _csr_from_pairs(dst, src, num_nodes)
        self.out_degrees = self.out_indptr[1:] - self.out_indptr[:-1]
        self.in_degrees = self.in_indptr[1:] - self.in_indptr[:-1]
        _freeze(
            self.edge_array,
            self.out_indptr,
            self.out_indices,
            self.in_indptr,
            self.in_indices,
            self.out_degrees,
            self.in_degrees,
        )

    @property
    def num_edges(self) -> int:
        return self.edge_array.shape[0]

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[v] : self.out_indptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        """Friends of v: the sources of v's incoming links."""
        return self.in_indices[self.in_indptr[v] : self.in_indptr[v + 1]]

    def __repr__(self) -> str:
        return f"DiGraph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


def build_undirected(edges, num_nodes: int) -> Graph:
    """Build a simple undirected graph from an edge list.

    Self-loops are dropped, parallel edges (in either orientation)
    collapsed. Endpoints must lie in [0, num_nodes).
    """
    num_nodes = int(num_nodes)
    if num_nodes < 0:
        raise ValueError("num_nodes must be non-negative")
    e = _as_edge_array(edges)
    if e.size and (e.min() < 0 or e.max() >= num_nodes):
        raise ValueError(f"edge endpoint out of range [0, {num_nodes})")
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keep = lo != hi
    edge_array = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    src = np.concatenate([edge_array[:, 0], edge_array[:, 1]])
    dst = np.concatenate([edge_array[:, 1], edge_array[:, 0]])
    indptr, indices = _csr_from_pairs(src, dst, num_nodes)
    return Graph(num_nodes, indptr, indices, edge_array)


def build_directed(edges, num_nodes: int) -> DiGraph:
    """Build a simple directed graph: self-loops dropped, duplicate (u, v) collapsed."""
    num_nodes = int(num_nodes)
    if num_nodes < 0:
        raise ValueError("num_nodes must be non-negative")
    e = _as_edge_array(edges)
    if e.size and (e.min() < 0 or e.max() >= num_nodes):
        raise ValueError(f"edge endpoint out of range [0, {num_nodes})")
    keep = e[:, 0] != e[:, 1]
    edge_array = np.unique(e[keep], axis=0)
    return DiGraph(num_nodes, edge_array)


def average_degree(g) -> float:
    """2|E|/|V| for undirected graphs, |E|/|V| for directed ones (0 if edgeless)."""
    if g.num_nodes == 0:
        return 0.0
    if isinstance(g, DiGraph):
        return g.num_edges / g.num_nodes
    return 2.0 * g.num_edges / g.num_nodes


# ---------------------------------------------------------------------------
# Sampling primitives
# ---------------------------------------------------------------------------


def sample_uniform_node(g, rng: np.random.Generator) -> int:
    """A node drawn uniformly from V."""
    if g.num_nodes < 1:
        raise ValueError("cannot sample a node from an empty graph")
    return int(rng.integers(g.num_nodes))


def sample_uniform_nodes(g, size: int, rng: np.random.Generator) -> np.ndarray:
    if g.num_nodes < 1:
        raise ValueError("cannot sample a node from an empty graph")
    return rng.integers(0, g.num_nodes, size=size)


def sample_random_friend(g: Graph, rng: np.random.Generator) -> int:
    """A random friend: a uniform edge, then a fair coin on its two endpoints.

    Returns node v with probability d(v) / 2|E|.
    """
    if g.num_edges < 1:
        raise ValueError("cannot sample a friend from an edgeless graph")
    idx = int(rng.integers(g.num_edges))
    side = int(rng.integers(2))
    return int(g.edge_array[idx, side])


def sample_random_friends(g: Graph, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized batch of random friends (same distribution as sample_random_friend)."""
    if g.num_edges < 1:
        raise ValueError("cannot sample a friend from an edgeless graph")
    idx = rng.integers(0, g.num_edges, size=size)
    side = rng.integers(0, 2, size=size)
    return g.edge_array[idx, side]


def sample_friend_two_step(g: Graph, rng: np.random.Generator) -> int:
    """A uniform neighbor of a uniform node.

    Returns v with probability (1/|V|) * sum over u in N(v) of 1/d(u).
    Isolated anchor nodes are resampled, up to |V| attempts.
    """
    if g.num_edges < 1:
        raise ValueError("no node with degree >= 1 to anchor two-step sampling")
    for _ in range(max(g.num_nodes, 1)):
        anchor = int(rng.integers(g.num_nodes))
        nbrs = g.neighbors(anchor)
        if nbrs.size:
            return int(nbrs[rng.integers(nbrs.size)])
    # unlucky streak of isolated anchors: draw directly from the non-isolated
    # nodes, which is the same law as resampling forever
    candidates = np.flatnonzero(g.degrees > 0)
    anchor = int(candidates[rng.integers(candidates.size)])
    nbrs = g.neighbors(anchor)
    return int(nbrs[rng.integers(nbrs.size)])


def sample_directed(g: DiGraph, mode: str, rng: np.random.Generator) -> int:
    """Sample a directed graph as a node, a friend, or a follower.

    node: uniform over V. friend: the source end of a uniform link,
    P(v) proportional to out-degree. follower: the target end,
    P(v) proportional to in-degree.
    """
    if mode == "node":
        return sample_uniform_node(g, rng)
    if mode not in ("friend", "follower"):
        raise ValueError(f"unknown sampling mode: {mode!r}")
    if g.num_edges < 1:
        raise ValueError(f"cannot sample a {mode} from an edgeless graph")
    idx = int(rng.integers(g.num_edges))
    return int(g.edge_array[idx, 0 if mode == "friend" else 1])


def sample_directed_many(g: DiGraph, mode: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized batch version of sample_directed."""
    if mode == "node":
        return sample_uniform_nodes(g, size, rng)
    if mode not in ("friend", "follower"):
        raise ValueError(f"unknown sampling mode: {mode!r}")
    if g.num_edges < 1:
        raise ValueError(f"cannot sample a {mode} from an edgeless graph")
    idx = rng.integers(0, g.num_edges, size=size)
    return g.edge_array[idx, 0 if mode == "friend" else 1]


def random_walk_friends(
    g: Graph,
    start: int,
    burn_in: int | None = None,
    thin: int | None = None,
    num_samples: int = 1,
    rng: np.random.Generator = None,
) -> np.ndarray:
    """Degree-proportional node samples from a simple random walk.

    The first sample is the position after ``burn_in`` steps; each later
    sample follows ``thin`` further steps. On a connected non-bipartite
    graph the empirical distribution converges to d(v)/2|E| (callers are
    responsible for checking those properties; see is_connected /
    is_bipartite). Defaults: burn_in = 10|V|, thin = |V|.
    """
    if burn_in is None:
        burn_in = WALK_BURN_IN_FACTOR * g.num_nodes
    if thin is None:
        thin = g.num_nodes
    if thin < 1:
        raise ValueError("thin must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if num_samples < 0:
        raise ValueError("num_samples must be >= 0")
    if not (0 <= start < g.num_nodes) or g.degree(start) == 0:
        raise ValueError("walk start must be a node with degree >= 1")

    out = np.empty(num_samples, dtype=np.int64)
    if num_samples == 0:
        return out
    total_steps = burn_in + (num_samples - 1) * thin
    # Plain-list walk: per-step cost dominates, so avoid numpy scalar indexing.
    uniforms = rng.random(total_steps).tolist()
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    cur = int(start)
    pos = 0
    for i in range(num_samples):
        for _ in range(burn_in if i == 0 else thin):
            lo = indptr[cur]
            deg = indptr[cur + 1] - lo
            j = int(uniforms[pos] * deg)
            cur = indices[lo + (j if j < deg else deg - 1)]
            pos += 1
        out[i] = cur
    return out


# ---------------------------------------------------------------------------
# Structure checks (utilities for random-walk preconditions)
# ---------------------------------------------------------------------------


def _expand_frontier(g: Graph, frontier: np.ndarray) -> np.ndarray:
    """All neighbors of the frontier nodes, concatenated (with repeats)."""
    lengths = g.degrees[frontier]
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = g.indptr[frontier]
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(lengths)[:-1])), lengths)
    return g.indices[np.arange(total) + offsets]


def is_connected(g: Graph) -> bool:
    """True when every node is reachable from node 0 (vacuously for |V| <= 1)."""
    if g.num_nodes <= 1:
        return True
    seen = np.zeros(g.num_nodes, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        nbrs = _expand_frontier(g, frontier)
        fresh = np.unique(nbrs[~seen[nbrs]])
        seen[fresh] = True
        frontier = fresh
    return bool(seen.all())


def is_bipartite(g: Graph) -> bool:
    """True when the graph admits a 2-coloring (checked per component)."""
    color = np.full(g.num_nodes, -1, dtype=np.int8)
    for root in range(g.num_nodes):
        if color[root] != -1:
            continue
        color[root] = 0
        frontier = np.array([root], dtype=np.int64)
        c = 0
        while frontier.size:
            nbrs = _expand_frontier(g, frontier)
            if np.any(color[nbrs] == c):
                return False
            fresh = np.unique(nbrs[color[nbrs] == -1])
            c ^= 1
            color[fresh] = c
            frontier = fresh
    return True
