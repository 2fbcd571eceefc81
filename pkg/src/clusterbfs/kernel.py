"""Cluster-BFS, plain BFS and a generic frontier edge map."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .bitset import WORD_BITS, BitSubset, capacity_mask
from .graph import Graph

UNREACHABLE = _k.UNREACH
DELTA_UNSET = _k.INF16
DEFAULT_DENSE_FRACTION = 1 / 20

_MODE_CODES = {"auto": 0, "sparse": 1, "dense": 2}
_MODE_NAMES = {1: "sparse", 2: "dense"}


@dataclass(frozen=True)
class Cluster:
    """A set of distinct source vertices with a declared hop-diameter bound."""

    sources: tuple[int, ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(int(s) for s in self.sources))
        if not self.sources:
            raise ValueError("a cluster needs at least one source")
        if len(set(self.sources)) != len(self.sources):
            raise ValueError("cluster sources must be distinct")
        if self.d < 0:
            raise ValueError("d must be >= 0")

    @property
    def k(self) -> int:
        return len(self.sources)


@dataclass
class ClusterDistanceVector:
    """Distances from every source of a cluster to one vertex.

    ``subsets[i]`` holds the sources at distance ``delta + i``.
    ``delta`` is ``None`` when no source reaches the vertex.
    """

    subsets: list[BitSubset]
    delta: int | None


def decode_distance(vec: ClusterDistanceVector, source_index: int) -> int:
    """Hop distance from source ``source_index`` or ``UNREACHABLE``."""
    if vec.delta is None:
        return UNREACHABLE
    for i, sub in enumerate(vec.subsets):
        if source_index in sub:
            return vec.delta + i
    return UNREACHABLE


@dataclass
class ClusterBFSResult:
    cluster: Cluster
    delta: np.ndarray          # uint16, DELTA_UNSET when unreached
    subsets: np.ndarray        # (n, d+1, words) uint64
    frontier_counts: np.ndarray
    frontier_sizes: list[int] = field(default_factory=list)
    modes: list[str] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.frontier_sizes)

    def vector(self, v: int) -> ClusterDistanceVector:
        k = self.cluster.k
        subs = [BitSubset(k, self.subsets[v, i]) for i in range(self.subsets.shape[1])]
        delta = None if self.delta[v] == DELTA_UNSET else int(self.delta[v])
        return ClusterDistanceVector(subs, delta)

    def distances_from(self, j: int) -> np.ndarray:
        """Decoded distances from source ``j`` to every vertex (int64)."""
        word, bit = divmod(j, WORD_BITS)
        col = self.subsets[:, :, word] >> np.uint64(bit) & np.uint64(1)
        hit = col.astype(bool)
        level = np.argmax(hit, axis=1)
        out = self.delta.astype(np.int64) + level
        out[~hit.any(axis=1)] = UNREACHABLE
        return out

    def distance_matrix(self) -> np.ndarray:
        """(k, n) array of decoded distances."""
        return np.stack([self.distances_from(j) for j in range(self.cluster.k)])


def cluster_bfs(
    g: Graph,
    cluster: Cluster,
    threads: int = 1,
    dense_fraction: float = DEFAULT_DENSE_FRACTION,
    mode: str = "auto",
) -> ClusterBFSResult:
    """Distances from all of a cluster's sources to every vertex in one traversal.

    A vertex enters at most ``d + 1`` frontiers. Results are identical for
    every ``threads`` value. ``mode`` forces sparse or dense edge mapping.
    """
    if mode not in _MODE_CODES:
        raise ValueError(f"mode must be one of {sorted(_MODE_CODES)}")
    sources = np.asarray(cluster.sources, dtype=np.int32)
    if sources.min() < 0 or sources.max() >= g.n:
        raise ValueError("cluster source out of range")
    full = capacity_mask(cluster.k)
    force = _MODE_CODES[mode]
    if threads <= 1:
        serial = _k.cbfs_serial_1w if full.size == 1 else _k.cbfs_serial
        delta, subsets, counts, sizes, modes = serial(
            g.out_offsets, g.out_targets, g.in_offsets, g.in_targets,
            sources, cluster.d, full, dense_fraction, force,
        )
    else:
        delta, subsets, counts, sizes, modes = _cbfs_threaded(
            g, sources, cluster.d, full, threads, dense_fraction, force
        )
    return ClusterBFSResult(
        cluster, delta, subsets, counts,
        [int(x) for x in sizes], [_MODE_NAMES[int(x)] for x in modes],
    )


def _cbfs_threaded(g, sources, d, full, threads, dense_fraction, force):
    # Targets are partitioned among workers by vertex range, so every S_next
    # word and claim slot has a single writer per round; no atomics required.
    n = g.n
    nwords = full.size
    seen = np.zeros((n, nwords), np.uint64)
    nxt = np.zeros((n, nwords), np.uint64)
    delta = np.full(n, DELTA_UNSET, np.uint16)
    subsets = np.zeros((n, d + 1, nwords), np.uint64)
    claim = np.full(n, -1, np.int64)
    counts = np.zeros(n, np.int32)
    in_front = np.zeros(n, np.bool_)
    for j, s in enumerate(sources):
        nxt[s, j // WORD_BITS] |= np.uint64(1 << (j % WORD_BITS))
    bounds = np.linspace(0, n, threads + 1).astype(np.int64)
    sizes, modes = [], []
    frontier = sources.copy()
    i = 0
    with ThreadPoolExecutor(threads) as pool:
        while frontier.size:
            sizes.append(frontier.size)
            chunks = np.array_split(frontier, threads)
            work = frontier.size + sum(pool.map(
                lambda c: _k.cbfs_fold(c, i, nxt, seen, delta, subsets, counts, g.out_offsets), chunks))
            dense = work > g.m * dense_fraction if force == 0 else force == 2
            if dense:
                modes.append(2)
                in_front[frontier] = True
                parts = list(pool.map(
                    lambda t: _k.cbfs_dense(bounds[t], bounds[t + 1], i, d, g.in_offsets, g.in_targets,
                                            in_front, delta, seen, nxt, claim, full),
                    range(threads)))
                in_front[frontier] = False
            else:
                modes.append(1)
                emitted = list(pool.map(
                    lambda c: _k.cbfs_emit(c, i, d, g.out_offsets, g.out_targets, delta, threads, n), chunks))

                def apply(t):
                    vs = np.concatenate([e[1][e[0][t]:e[0][t + 1]] for e in emitted])
                    us = np.concatenate([e[2][e[0][t]:e[0][t + 1]] for e in emitted])
                    return _k.cbfs_apply(vs, us, i, nxt, seen, claim)

                parts = list(pool.map(apply, range(threads)))
            frontier = np.concatenate(parts).astype(np.int32, copy=False)
            i += 1
    return delta, subsets, counts, sizes, modes


def plain_bfs(g: Graph, s: int, dense_fraction: float = DEFAULT_DENSE_FRACTION) -> np.ndarray:
    """Single-source hop distances (int32, ``UNREACHABLE`` where unreached)."""
    if not 0 <= s < g.n:
        raise ValueError(f"source {s} out of range")
    return _k.bfs_serial(g.out_offsets, g.out_targets, g.in_offsets, g.in_targets, int(s), dense_fraction)


@dataclass
class Frontier:
    """Active vertices of one round, kept in sparse (sorted ID) form."""

    vertices: np.ndarray
    round: int = 0
    mode: str | None = None

    @classmethod
    def from_mask(cls, mask, round: int = 0) -> Frontier:
        return cls(np.flatnonzero(mask).astype(np.int32), round)

    def mask(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=bool)
        out[self.vertices] = True
        return out

    def __len__(self) -> int:
        return len(self.vertices)


def _ranges(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    shift = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
    return shift + np.arange(total)


def edgemap(
    g: Graph,
    frontier: Frontier,
    cond,
    relax,
    mode: str = "auto",
    dense_fraction: float = DEFAULT_DENSE_FRACTION,
) -> Frontier:
    """Apply ``relax`` over arcs leaving ``frontier`` into vertices passing ``cond``.

    Both callbacks are vectorized. ``cond(v)`` takes a vertex array and returns
    a boolean mask. ``relax(u, v)`` takes parallel arc arrays and returns a
    mask of arcs whose target it newly claimed. Sparse mode walks out-arcs of
    the frontier; dense mode walks in-arcs of every vertex. Either way the
    result is the sorted set of claimed targets.
    """
    f = np.asarray(frontier.vertices, dtype=np.int64)
    nxt_round = frontier.round + 1
    if f.size == 0:
        return Frontier(np.empty(0, dtype=np.int32), nxt_round, None)
    deg = g.out_degree()
    if mode == "auto":
        mode = "dense" if f.size + deg[f].sum() > g.m * dense_fraction else "sparse"
    if mode == "sparse":
        idx = _ranges(g.out_offsets[f], deg[f])
        u = np.repeat(f, deg[f])
        v = g.out_targets[idx].astype(np.int64)
    elif mode == "dense":
        v = np.repeat(np.arange(g.n, dtype=np.int64), g.in_degree())
        u = g.in_targets.astype(np.int64)
        keep = frontier.mask(g.n)[u]
        u, v = u[keep], v[keep]
    else:
        raise ValueError("mode must be 'auto', 'sparse' or 'dense'")
    ok = np.asarray(cond(v), dtype=bool)
    u, v = u[ok], v[ok]
    claimed = np.asarray(relax(u, v), dtype=bool)
    out = np.unique(v[claimed]).astype(np.int32)
    return Frontier(out, nxt_round, mode)
