"""Exact 2-hop distance labels: a cluster phase followed by batched pruned BFS."""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as _k
from .graph import Graph, order_by_degree
from .kernel import UNREACHABLE
from .landmark import DELTA_SATURATED, IndexFormatError, LandmarkIndex, build_ll_index
from .select import SelectionConfig, select_clusters

PLL_MAGIC = b"CBFSPLL1"
PLL_VERSION = 1
FIRST_BATCH = 200
BATCH_GROWTH = 1.5
MAX_BATCH = 1000
_PAIR = np.dtype([("hub", "<u4"), ("dist", "<u2")])


def batch_schedule(remaining: int) -> list[int]:
    """Batch sizes 200, 300, 450, ... capped at 1000, summing to ``remaining``."""
    sizes = []
    i = 0
    while remaining > 0:
        size = min(int(FIRST_BATCH * BATCH_GROWTH**i), MAX_BATCH)
        sizes.append(min(size, remaining))
        remaining -= sizes[-1]
        i += 1
    return sizes


@dataclass
class TwoHopLabels:
    """Hub labels in CSR form plus the cluster-phase landmark index.

    ``hubs[offsets[v]:offsets[v+1]]`` are ranks in the degree order, strictly
    increasing. ``order`` is only known for freshly built labels.
    """

    n: int
    offsets: np.ndarray
    hubs: np.ndarray
    dists: np.ndarray
    cluster_part: LandmarkIndex
    k: int = 0
    d: int = 0
    order: np.ndarray | None = None

    @classmethod
    def empty(cls, n: int, cluster_part: LandmarkIndex, k: int = 0, d: int = 0, order=None) -> TwoHopLabels:
        return cls(n, np.zeros(n + 1, np.int64), np.empty(0, np.uint32), np.empty(0, np.uint16),
                   cluster_part, k, d, order)

    @property
    def r(self) -> int:
        return self.cluster_part.r

    @property
    def label_count(self) -> int:
        return int(self.hubs.size)

    @property
    def avg_labels(self) -> float:
        return self.label_count / self.n if self.n else 0.0

    def labels_of(self, v: int) -> list[tuple[int, int]]:
        a, b = self.offsets[v], self.offsets[v + 1]
        return list(zip(self.hubs[a:b].tolist(), self.dists[a:b].tolist()))

    def query(self, u: int, v: int) -> int:
        return int(self.query_many(np.array([u]), np.array([v]))[0])

    def query_many(self, us, vs) -> np.ndarray:
        us = np.ascontiguousarray(us, dtype=np.int64)
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        if us.size and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= self.n):
            raise ValueError("query vertex out of range")
        est = _k.hub_query_pairs(self.offsets, self.hubs, self.dists, us, vs)
        if self.cluster_part.r:
            est = np.minimum(est, self.cluster_part.query_many(us, vs))
        return est

    def commit(self, add_v, add_d, add_rank) -> None:
        """Append labels; ``add_rank`` must exceed every rank already stored."""
        if len(add_d) and np.max(add_d) > 0xFFFF:
            raise ValueError("hop distance does not fit in 16 bits")
        self.offsets, self.hubs, self.dists = _k.commit_labels(
            self.offsets, self.hubs, self.dists,
            np.asarray(add_v, np.int64), np.asarray(add_d, np.uint16), np.asarray(add_rank, np.uint32))

    def to_bytes(self) -> bytes:
        n, total = self.n, self.label_count
        counts = np.diff(self.offsets)
        starts = 4 * np.arange(n, dtype=np.int64) + 6 * self.offsets[:-1]
        body = np.empty(4 * n + 6 * total, dtype=np.uint8)
        body[starts[:, None] + np.arange(4)] = counts.astype("<u4").view(np.uint8).reshape(n, 4)
        if total:
            pairs = np.empty(total, dtype=_PAIR)
            pairs["hub"] = self.hubs
            pairs["dist"] = self.dists
            owner = np.repeat(np.arange(n), counts)
            pos = starts[owner] + 4 + 6 * (np.arange(total) - self.offsets[owner])
            body[pos[:, None] + np.arange(6)] = pairs.view(np.uint8).reshape(total, 6)
        head = PLL_MAGIC + struct.pack("<IQIII", PLL_VERSION, n, self.r, self.k, self.d)
        return head + self.cluster_part.to_bytes() + body.tobytes()

    @property
    def index_bytes(self) -> int:
        return 32 + len(self.cluster_part.to_bytes()) + 4 * self.n + 6 * self.label_count

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> TwoHopLabels:
        data = Path(path).read_bytes()
        if data[:8] != PLL_MAGIC:
            raise IndexFormatError(f"{path}: not a 2-hop label index (bad magic)")
        try:
            version, n, r, k, d = struct.unpack_from("<IQIII", data, 8)
            if version != PLL_VERSION:
                raise IndexFormatError(f"{path}: unsupported label index version {version}")
            part, pos = LandmarkIndex.from_buffer(data, 32)
            if part.n != n or part.r != r:
                raise IndexFormatError(f"{path}: embedded landmark index does not match header")
            counts = np.empty(n, dtype=np.int64)
            chunks = []
            for v in range(n):
                (c,) = struct.unpack_from("<I", data, pos)
                counts[v] = c
                chunks.append(np.frombuffer(data, dtype=_PAIR, count=c, offset=pos + 4))
                pos += 4 + 6 * c
        except struct.error as exc:
            raise IndexFormatError(f"{path}: truncated label index") from exc
        except ValueError as exc:
            if isinstance(exc, IndexFormatError):
                raise
            raise IndexFormatError(f"{path}: truncated label index") from exc
        if pos != len(data):
            raise IndexFormatError(f"{path}: trailing bytes after label index")
        pairs = np.concatenate(chunks) if chunks else np.empty(0, dtype=_PAIR)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(n, offsets, pairs["hub"].astype(np.uint32), pairs["dist"].astype(np.uint16), part, k, d)

    def __eq__(self, other):
        if not isinstance(other, TwoHopLabels):
            return NotImplemented
        return (self.n == other.n and self.cluster_part == other.cluster_part
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.hubs, other.hubs) and np.array_equal(self.dists, other.dists))


class _Workspace:
    def __init__(self, n: int):
        self.hub_tmp = np.full(n, UNREACHABLE, np.int64)
        self.dist = np.full(n, -1, np.int32)
        self.shadow = np.zeros(n, np.bool_)
        self.queue = np.empty(max(n, 1), np.int32)
        self.out_v = np.empty(max(n, 1), np.int64)
        self.out_d = np.empty(max(n, 1), np.int64)


def _pruned_bfs(g: Graph, labels: TwoHopLabels, h: int, prio: np.ndarray, ws: _Workspace):
    cp = labels.cluster_part
    cnt = _k.pruned_bfs(g.out_offsets, g.out_targets, h, labels.offsets, labels.hubs, labels.dists,
                        cp.records, cp.offsets, cp.ds, cp.nbs, cp.ks, prio,
                        ws.hub_tmp, ws.dist, ws.shadow, ws.queue, ws.out_v, ws.out_d)
    return ws.out_v[:cnt].copy(), ws.out_d[:cnt].copy()


def pruned_bfs(g: Graph, labels: TwoHopLabels, h: int, prio=None) -> tuple[np.ndarray, np.ndarray]:
    """Label additions ``(vertices, distances)`` for hub ``h`` against ``labels``.

    A vertex is dropped (and not expanded) when the labels already give a
    distance no larger than its BFS distance. With ``prio`` given, vertices
    behind (or at) anything ranked ahead of ``h`` are left unlabeled as well.
    ``h`` itself is always kept.
    """
    prio = np.zeros(g.n, np.int64) if prio is None else np.asarray(prio, np.int64)
    return _pruned_bfs(g, labels, h, prio, _Workspace(g.n))


def build_pll(g: Graph, r: int, k: int, d: int, threads: int = 1,
              batch_size: int | None = None, rank_prune: bool = True) -> TwoHopLabels:
    """Exact 2-hop labels: ``r`` cluster-BFS runs, then pruned BFS in degree order.

    Pruned searches in the same batch only see labels from earlier batches.
    ``batch_size`` replaces the growing schedule with a fixed size (1 gives
    the classic sequential construction).

    With ``rank_prune`` a search also leaves unlabeled every vertex that has
    a shortest path from the source through an earlier-ordered vertex. The
    earliest-ordered vertex on any shortest path still labels both ends, so
    exactness holds, and batch mates stop duplicating each other's labels.
    """
    if not g.symmetric:
        raise ValueError("2-hop labeling requires an undirected graph")
    order = order_by_degree(g)
    rank = np.empty(g.n, dtype=np.int64)
    rank[order] = np.arange(g.n)
    clusters = select_clusters(g, SelectionConfig(r, k, d)) if r > 0 else []
    part = build_ll_index(g, clusters, threads=threads)
    for c in range(part.r):
        if np.any(part.records[:, part.offsets[c]] == DELTA_SATURATED):
            raise ValueError("graph too deep for the 1-byte cluster distance field")
    labels = TwoHopLabels.empty(g.n, part, k, d, order)

    is_source = np.zeros(g.n, dtype=bool)
    for c in clusters:
        is_source[list(c.sources)] = True
    rest = order[~is_source[order]]
    prio = np.full(g.n, -1, dtype=np.int64)
    if rank_prune:
        prio[rest] = np.arange(rest.size)
    else:
        prio[:] = 0
    if batch_size is None:
        sizes = batch_schedule(rest.size)
    else:
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        sizes = [batch_size] * (rest.size // batch_size) + ([rest.size % batch_size] if rest.size % batch_size else [])

    workers = max(1, threads)
    spaces = [_Workspace(g.n) for _ in range(workers)]
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        pos = 0
        for size in sizes:
            batch = rest[pos:pos + size]
            pos += size
            parts = np.array_split(batch, min(workers, batch.size))

            def run(t):
                return [_pruned_bfs(g, labels, int(h), prio, spaces[t]) for h in parts[t]]

            if pool is not None and len(parts) > 1:
                results = [x for chunk in pool.map(run, range(len(parts))) for x in chunk]
            else:
                results = [x for t in range(len(parts)) for x in run(t)]
            add_v = np.concatenate([vs for vs, _ in results])
            add_d = np.concatenate([ds for _, ds in results])
            add_rank = np.repeat(rank[batch], [vs.size for vs, _ in results])
            labels.commit(add_v, add_d, add_rank)
    finally:
        if pool is not None:
            pool.shutdown()
    return labels
