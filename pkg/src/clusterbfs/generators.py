"""Synthetic undirected graphs for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .graph import Graph, from_arcs


def erdos_renyi(n: int, avg_degree: float, seed: int) -> Graph:
    """G(n, m) with ``m = n * avg_degree / 2`` edges drawn with replacement."""
    rng = np.random.default_rng(seed)
    m = int(round(n * avg_degree / 2))
    return from_arcs(n, rng.integers(0, n, m), rng.integers(0, n, m))


def preferential_attachment(n: int, edges_per_vertex: int, seed: int) -> Graph:
    """Barabasi-Albert style growth: each new vertex links to degree-weighted picks."""
    rng = np.random.default_rng(seed)
    per = edges_per_vertex
    ends = np.empty(2 * n * per + 2, dtype=np.int64)
    src = np.empty(n * per, dtype=np.int64)
    dst = np.empty(n * per, dtype=np.int64)
    draws = rng.random((n, per))
    cnt = 0
    arcs = 0
    for t in range(1, n):
        if cnt == 0:
            picks = np.zeros(1, dtype=np.int64)
        else:
            picks = ends[(draws[t, :min(per, t)] * cnt).astype(np.int64)]
        j = picks.size
        src[arcs:arcs + j] = t
        dst[arcs:arcs + j] = picks
        arcs += j
        ends[cnt:cnt + j] = picks
        ends[cnt + j:cnt + 2 * j] = t
        cnt += 2 * j
    return from_arcs(n, src[:arcs], dst[:arcs])


def path_graph(n: int) -> Graph:
    a = np.arange(max(n - 1, 0))
    return from_arcs(n, a, a + 1)


def star_graph(leaves: int) -> Graph:
    """Center 0 joined to vertices ``1..leaves``."""
    return from_arcs(leaves + 1, np.zeros(leaves, dtype=np.int64), np.arange(1, leaves + 1))
