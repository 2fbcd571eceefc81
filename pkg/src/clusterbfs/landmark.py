"""Landmark-labeling approximate distance oracle over cluster distance vectors."""

from __future__ import annotations

import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels as _k
from .bitset import BitSubset
from .graph import Graph
from .kernel import UNREACHABLE, Cluster, ClusterDistanceVector, cluster_bfs, plain_bfs

LL_MAGIC = b"CBFSLL01"
LL_VERSION = 1
DELTA_SATURATED = _k.DELTA_SATURATED
DELTA_NONE = _k.DELTA_NONE


class IndexFormatError(ValueError):
    """Raised when a serialized index is malformed."""


def record_bytes(k: int, d: int) -> int:
    """Bytes one vertex spends on one cluster: the distance byte plus ``d`` subsets."""
    return 1 + d * -(-k // 8)


def budget_to_cluster_count(t: int, k: int, d: int) -> int:
    """How many (k, d) clusters fit in ``t`` bytes per vertex."""
    per = record_bytes(k, d)
    if t < per:
        raise ValueError(f"budget {t} B/vertex is below one cluster record ({per} B)")
    return t // per


@dataclass(frozen=True)
class QueryResult:
    estimate: int
    # (cluster index, source index), "bidirectional", or None when unreachable
    witness: tuple[int, int] | str | None = None

    @property
    def reachable(self) -> bool:
        return self.estimate != UNREACHABLE


def _require_symmetric(g: Graph) -> None:
    if not g.symmetric:
        raise ValueError("distance oracles require an undirected graph")


class LandmarkIndex:
    """Per-vertex cluster records laid out exactly as in the index file.

    ``records[v]`` concatenates, per cluster, a distance byte (254 saturated,
    255 unreachable) followed by ``d`` subset bitmaps of ``ceil(k/8)`` bytes,
    bit ``j`` at byte ``j // 8``, position ``j % 8``.
    """

    def __init__(self, n: int, clusters, records: np.ndarray):
        self.n = n
        self.clusters = list(clusters)
        self.ks = np.array([c.k for c in self.clusters], dtype=np.int64)
        self.ds = np.array([c.d for c in self.clusters], dtype=np.int64)
        self.nbs = -(-self.ks // 8)
        sizes = 1 + self.ds * self.nbs
        self.offsets = (np.cumsum(sizes) - sizes).astype(np.int64)
        self.records = np.ascontiguousarray(records, dtype=np.uint8).reshape(n, int(sizes.sum()))

    @property
    def r(self) -> int:
        return len(self.clusters)

    @property
    def bytes_per_vertex(self) -> int:
        return self.records.shape[1]

    def query(self, u: int, v: int) -> QueryResult:
        est, wc, ws = self._scan(np.array([u]), np.array([v]), -1)
        if est[0] == UNREACHABLE:
            return QueryResult(UNREACHABLE, None)
        return QueryResult(int(est[0]), (int(wc[0]), int(ws[0])))

    def query_many(self, us, vs) -> np.ndarray:
        return self._scan(us, vs, -1)[0]

    def cluster_estimates(self, c: int, us, vs) -> np.ndarray:
        """Estimates using only cluster ``c``."""
        return self._scan(us, vs, c)[0]

    def _scan(self, us, vs, which):
        us = np.ascontiguousarray(us, dtype=np.int64)
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        if us.size and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= self.n):
            raise ValueError("query vertex out of range")
        return _k.ll_query_pairs(self.records, self.offsets, self.ds, self.nbs, self.ks, us, vs, which)

    def vector(self, v: int, c: int) -> ClusterDistanceVector:
        """Decode vertex ``v``'s record for cluster ``c``, rebuilding the last subset."""
        k, d, nb, off = int(self.ks[c]), int(self.ds[c]), int(self.nbs[c]), int(self.offsets[c])
        delta = int(self.records[v, off])
        if delta == DELTA_NONE:
            return ClusterDistanceVector([BitSubset(k) for _ in range(d + 1)], None)
        raw = self.records[v, off + 1: off + 1 + d * nb].reshape(d, nb)
        bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :k].astype(bool)
        last = ~bits.any(axis=0)
        levels = [*bits, last]
        subs = [BitSubset.from_members(k, np.flatnonzero(lv).tolist()) for lv in levels]
        return ClusterDistanceVector(subs, delta)

    def __eq__(self, other):
        if not isinstance(other, LandmarkIndex):
            return NotImplemented
        return (self.n == other.n and self.clusters == other.clusters
                and np.array_equal(self.records, other.records))

    def to_bytes(self) -> bytes:
        parts = [LL_MAGIC, struct.pack("<IQI", LL_VERSION, self.n, self.r)]
        for c in self.clusters:
            parts.append(struct.pack("<II", c.k, c.d))
        for c in self.clusters:
            parts.append(np.asarray(c.sources, dtype="<u4").tobytes())
        parts.append(self.records.tobytes())
        return b"".join(parts)

    @classmethod
    def from_buffer(cls, data: bytes, pos: int = 0) -> tuple[LandmarkIndex, int]:
        """Parse an index starting at ``pos``; returns it and the end offset."""
        try:
            if data[pos:pos + 8] != LL_MAGIC:
                raise IndexFormatError("not a landmark index (bad magic)")
            version, n, r = struct.unpack_from("<IQI", data, pos + 8)
            if version != LL_VERSION:
                raise IndexFormatError(f"unsupported landmark index version {version}")
            pos += 24
            shape = np.frombuffer(data, dtype="<u4", count=2 * r, offset=pos).reshape(r, 2)
            pos += 8 * r
            clusters = []
            for k, d in shape.tolist():
                src = np.frombuffer(data, dtype="<u4", count=k, offset=pos)
                pos += 4 * k
                clusters.append(Cluster(tuple(src.tolist()), d))
            width = sum(record_bytes(k, d) for k, d in shape.tolist())
            records = np.frombuffer(data, dtype=np.uint8, count=n * width, offset=pos).reshape(n, width)
            pos += n * width
        except (struct.error, ValueError) as exc:
            if isinstance(exc, IndexFormatError):
                raise
            raise IndexFormatError(f"truncated or corrupt landmark index: {exc}") from exc
        return cls(n, clusters, records.copy()), pos

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> LandmarkIndex:
        data = Path(path).read_bytes()
        idx, end = cls.from_buffer(data)
        if end != len(data):
            raise IndexFormatError(f"{path}: trailing bytes after landmark index")
        return idx


def _cluster_records(res, nb: int) -> np.ndarray:
    n = res.delta.size
    d = res.cluster.d
    out = np.empty((n, 1 + d * nb), dtype=np.uint8)
    delta = res.delta.astype(np.int64)
    out[:, 0] = np.where(delta == _k.INF16, DELTA_NONE, np.minimum(delta, DELTA_SATURATED))
    if d:
        raw = res.subsets[:, :d, :].astype("<u8").view(np.uint8)
        out[:, 1:] = raw.reshape(n, d, -1)[:, :, :nb].reshape(n, d * nb)
    return out


def build_ll_index(g: Graph, clusters, threads: int = 1) -> LandmarkIndex:
    """Run one cluster-BFS per cluster and pack the results into an index."""
    _require_symmetric(g)
    clusters = list(clusters)

    def one(c):
        return _cluster_records(cluster_bfs(g, c), -(-c.k // 8))

    if threads > 1 and len(clusters) > 1:
        with ThreadPoolExecutor(threads) as pool:
            blocks = list(pool.map(one, clusters))
    else:
        blocks = [one(c) for c in clusters]
    records = np.hstack(blocks) if blocks else np.empty((g.n, 0), dtype=np.uint8)
    return LandmarkIndex(g.n, clusters, records)


def build_plain_ll_index(g: Graph, landmarks, threads: int = 1) -> LandmarkIndex:
    """Classic one-BFS-per-landmark index: one saturating byte per landmark."""
    _require_symmetric(g)
    landmarks = [int(x) for x in landmarks]

    def one(s):
        dist = plain_bfs(g, s).astype(np.int64)
        return np.where(dist == UNREACHABLE, DELTA_NONE, np.minimum(dist, DELTA_SATURATED)).astype(np.uint8)

    if threads > 1 and len(landmarks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            cols = list(pool.map(one, landmarks))
    else:
        cols = [one(s) for s in landmarks]
    records = np.stack(cols, axis=1) if cols else np.empty((g.n, 0), dtype=np.uint8)
    return LandmarkIndex(g.n, [Cluster((s,), 0) for s in landmarks], records)


def bidirectional_refine(g: Graph, u: int, v: int, tau: int) -> int:
    """Best meeting distance after expanding ``tau`` vertices from each endpoint."""
    return int(_k.bidir_pairs(g.out_offsets, g.out_targets,
                              np.array([u], dtype=np.int64), np.array([v], dtype=np.int64), int(tau))[0])


def query_combined(idx: LandmarkIndex, g: Graph, u: int, v: int, tau: int) -> QueryResult:
    base = idx.query(u, v)
    local = bidirectional_refine(g, u, v, tau)
    if local < base.estimate:
        return QueryResult(local, "bidirectional")
    return base


class CombinedOracle:
    """Index answers tightened by a bounded bidirectional search."""

    def __init__(self, idx, g: Graph, tau: int):
        self.idx = idx
        self.g = g
        self.tau = tau

    def query_many(self, us, vs) -> np.ndarray:
        us = np.ascontiguousarray(us, dtype=np.int64)
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        est = self.idx.query_many(us, vs)
        if self.tau <= 0:
            return est
        return np.minimum(est, _k.bidir_pairs(self.g.out_offsets, self.g.out_targets, us, vs, self.tau))


@dataclass
class DistortionStats:
    pairs: int
    covered: int
    epsilon_pct: float     # mean(estimate / true - 1) * 100 over covered pairs
    max_distortion: float
    exact_rate: float      # fraction of all pairs answered exactly
    us: np.ndarray
    vs: np.ndarray
    truth: np.ndarray
    estimates: np.ndarray

    @property
    def coverage(self) -> float:
        return self.covered / self.pairs if self.pairs else 0.0


def sample_reachable_pairs(g: Graph, pair_count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform ordered pairs ``u != v`` in the same component.

    Asking for at least as many pairs as exist returns all of them (with a
    warning when strictly more were requested).
    """
    adj = csr_matrix((np.ones(g.m, dtype=np.int8), g.out_targets, g.out_offsets), shape=(g.n, g.n))
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels) if g.n else np.zeros(0, dtype=np.int64)
    total = int((sizes.astype(np.int64) * (sizes - 1)).sum())
    if pair_count >= total:
        if pair_count > total:
            warnings.warn(f"requested {pair_count} pairs but only {total} reachable pairs exist",
                          RuntimeWarning, stacklevel=3)
        us, vs = np.nonzero(labels[:, None] == labels[None, :])
        keep = us != vs
        return us[keep].astype(np.int64), vs[keep].astype(np.int64)
    rng = np.random.default_rng(seed)
    got_u, got_v, have = [], [], 0
    while have < pair_count:
        batch = max(2 * (pair_count - have), 64)
        u = rng.integers(0, g.n, batch)
        v = rng.integers(0, g.n, batch)
        ok = (u != v) & (labels[u] == labels[v])
        got_u.append(u[ok])
        got_v.append(v[ok])
        have += int(ok.sum())
    return np.concatenate(got_u)[:pair_count], np.concatenate(got_v)[:pair_count]


def true_distances(g: Graph, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    out = np.empty(us.size, dtype=np.int64)
    order = np.argsort(us, kind="stable")
    starts = np.flatnonzero(np.r_[True, us[order][1:] != us[order][:-1]])
    for a, b in zip(starts, np.r_[starts[1:], us.size]):
        sel = order[a:b]
        out[sel] = plain_bfs(g, int(us[sel[0]]))[vs[sel]]
    return out


def eval_distortion(backend, g: Graph, pair_count: int, seed: int, tau: int = 0) -> DistortionStats:
    """Sample reachable pairs and measure how far ``backend`` overestimates.

    ``backend`` is anything with ``query_many(us, vs)``. With ``tau > 0`` its
    answers are combined with a bidirectional search of that size.
    """
    if tau > 0:
        backend = CombinedOracle(backend, g, tau)
    us, vs = sample_reachable_pairs(g, pair_count, seed)
    truth = true_distances(g, us, vs)
    est = np.asarray(backend.query_many(us, vs), dtype=np.int64)
    cov = est != UNREACHABLE
    if np.any(est[cov] < truth[cov]):
        raise RuntimeError("backend underestimated a distance")
    ratio = est[cov] / truth[cov]
    return DistortionStats(
        pairs=int(us.size),
        covered=int(cov.sum()),
        epsilon_pct=float((ratio.mean() - 1) * 100) if ratio.size else float("nan"),
        max_distortion=float(ratio.max()) if ratio.size else float("nan"),
        exact_rate=float(np.mean(est == truth)) if us.size else float("nan"),
        us=us, vs=vs, truth=truth, estimates=est,
    )
