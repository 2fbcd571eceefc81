"""Greedy degree-first landmark cluster selection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as _k
from .graph import Graph, order_by_degree
from .kernel import Cluster


@dataclass(frozen=True)
class SelectionConfig:
    r: int
    k: int
    d: int
    # mark every member as used; when False only centers are excluded
    exclusive: bool = True

    def __post_init__(self):
        if self.r < 0 or self.k < 1 or self.d < 0:
            raise ValueError(f"need r >= 0, k >= 1, d >= 0 (got r={self.r}, k={self.k}, d={self.d})")


def select_clusters(g: Graph, cfg: SelectionConfig) -> list[Cluster]:
    """Pick up to ``cfg.r`` clusters, each a high-degree center plus nearby high-degree vertices.

    Members come from the center's ``d // 2``-hop ball, so pairwise distance
    is at most ``d``. Marked vertices may still serve as intermediate hops.
    """
    if not g.symmetric:
        raise ValueError("cluster selection requires an undirected graph")
    order = order_by_degree(g)
    rank = np.empty(g.n, dtype=np.int64)
    rank[order] = np.arange(g.n)
    marked = np.zeros(g.n, dtype=bool)
    radius = cfg.d // 2
    clusters: list[Cluster] = []
    pos = 0
    while len(clusters) < cfg.r:
        while pos < g.n and marked[order[pos]]:
            pos += 1
        if pos >= g.n:
            break
        center = int(order[pos])
        members = _gather(g, center, cfg.k, radius, marked, rank)
        if cfg.exclusive:
            marked[members] = True
        else:
            marked[center] = True
        clusters.append(Cluster(tuple(members), cfg.d))
    if len(clusters) < cfg.r:
        warnings.warn(f"only {len(clusters)} of {cfg.r} requested clusters available", RuntimeWarning, stacklevel=2)
    return clusters


def _gather(g: Graph, center: int, k: int, radius: int, marked: np.ndarray, rank: np.ndarray) -> list[int]:
    members = [center]
    if k > 1 and radius > 0:
        dist = _k.bfs_limited(g.out_offsets, g.out_targets, center, radius)
        cand = np.flatnonzero((dist != _k.UNREACH) & ~marked)
        cand = cand[cand != center]
        cand = cand[np.argsort(rank[cand], kind="stable")][: k - 1]
        members += cand.tolist()
    return members


def cluster_around(g: Graph, center: int, k: int, d: int) -> Cluster:
    """The cluster ``select_clusters`` would build at ``center`` on a fresh graph."""
    if not 0 <= center < g.n:
        raise ValueError(f"center {center} out of range")
    rank = np.empty(g.n, dtype=np.int64)
    rank[order_by_degree(g)] = np.arange(g.n)
    return Cluster(tuple(_gather(g, center, k, d // 2, np.zeros(g.n, dtype=bool), rank)), d)


def validate_cluster(g: Graph, c: Cluster) -> bool:
    """True iff every pair of sources is within ``c.d`` hops."""
    src = np.asarray(c.sources, dtype=np.int64)
    for s in src:
        dist = _k.bfs_limited(g.out_offsets, g.out_targets, int(s), c.d)
        if np.any(dist[src] == _k.UNREACH):
            return False
    return True


def write_clusters(clusters, path) -> None:
    lines = [f"{c.d} {c.k} " + " ".join(map(str, c.sources)) for c in clusters]
    Path(path).write_text("".join(line + "\n" for line in lines))


def read_clusters(path) -> list[Cluster]:
    """Parse ``d k v1 ... vk`` lines; raises ValueError with the line number."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-integer token") from None
        if len(nums) < 3 or nums[1] != len(nums) - 2:
            raise ValueError(f"{path}:{lineno}: expected 'd k' followed by k vertex IDs")
        out.append(Cluster(tuple(nums[2:]), nums[0]))
    return out
