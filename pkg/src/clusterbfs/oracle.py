"""Reference distances computed independently of the traversal kernels."""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .graph import Graph
from .kernel import UNREACHABLE


def queue_bfs(g: Graph, s: int) -> list[int]:
    """Textbook FIFO BFS in pure Python."""
    offs = g.out_offsets.tolist()
    tgt = g.out_targets.tolist()
    dist = [UNREACHABLE] * g.n
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for v in tgt[offs[u]:offs[u + 1]]:
            if dist[v] == UNREACHABLE:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def brute_force_oracle(g: Graph, pairs=None) -> np.ndarray:
    """Exact distances for ``pairs`` (an iterable of (u, v)), or the full matrix."""
    if pairs is None:
        return np.array([queue_bfs(g, s) for s in range(g.n)], dtype=np.int64).reshape(g.n, g.n)
    pairs = [(int(u), int(v)) for u, v in pairs]
    cache: dict[int, list[int]] = {}
    out = []
    for u, v in pairs:
        if u not in cache:
            cache[u] = queue_bfs(g, u)
        out.append(cache[u][v])
    return np.array(out, dtype=np.int64)


def all_pairs_distances(g: Graph, sources=None) -> np.ndarray:
    """Distance rows via scipy's compiled BFS; ``UNREACHABLE`` where unreached."""
    adj = csr_matrix((np.ones(g.m, dtype=np.int8), g.out_targets, g.out_offsets), shape=(g.n, g.n))
    if g.n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    dist = shortest_path(adj, directed=not g.symmetric, unweighted=True, indices=sources)
    dist = np.atleast_2d(dist)
    out = np.full(dist.shape, UNREACHABLE, dtype=np.int64)
    finite = np.isfinite(dist)
    out[finite] = dist[finite].astype(np.int64)
    return out
