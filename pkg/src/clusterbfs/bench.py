"""Timing harness: k plain BFS runs vs. one cluster-BFS, across thread counts."""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass, field

from .graph import Graph
from .kernel import cluster_bfs, plain_bfs
from .select import SelectionConfig, select_clusters


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return time.perf_counter() - start, out


@dataclass
class BenchRecord:
    graph: str
    n: int
    m: int
    k: int
    d: int
    threads: int
    cluster: int
    plain_s: float     # k sequential single-source BFS runs
    seq_s: float       # cluster-BFS on one thread
    par_s: float       # cluster-BFS again on `threads` threads
    rounds: int
    modes: str

    @property
    def bit_speedup(self) -> float:
        return self.plain_s / self.seq_s

    @property
    def self_speedup(self) -> float:
        return self.seq_s / self.par_s

    def row(self) -> dict:
        out = asdict(self)
        out["bit_speedup"] = self.bit_speedup
        out["self_speedup"] = self.self_speedup
        return out


@dataclass
class BenchReport:
    records: list[BenchRecord] = field(default_factory=list)

    COLUMNS = ("graph", "n", "m", "k", "d", "threads", "cluster", "plain_s", "seq_s", "par_s",
               "bit_speedup", "self_speedup", "rounds", "modes")

    def rows(self) -> list[dict]:
        return [r.row() for r in self.records]

    def summary(self) -> list[dict]:
        """Median times per thread count; speedups are ratios of those medians."""
        out = []
        for t in sorted({r.threads for r in self.records}):
            recs = [r for r in self.records if r.threads == t]
            plain = statistics.median(r.plain_s for r in recs)
            seq = statistics.median(r.seq_s for r in recs)
            par = statistics.median(r.par_s for r in recs)
            out.append({"threads": t, "clusters": len(recs), "plain_s": plain, "seq_s": seq, "par_s": par,
                        "bit_speedup": plain / seq, "self_speedup": seq / par})
        return out


def run_bench(g: Graph, name: str, k: int, d: int, threads_list, reps: int = 10) -> BenchReport:
    """Time ``reps`` clusters picked by the greedy selector.

    One warm-up pass keeps JIT compilation out of the measurements.
    """
    clusters = select_clusters(g, SelectionConfig(reps, k, d))
    report = BenchReport()
    if not clusters:
        return report
    warm = clusters[0]
    cluster_bfs(g, warm)
    plain_bfs(g, warm.sources[0])
    for t in threads_list:
        if t > 1:
            cluster_bfs(g, warm, threads=t)
    for ci, c in enumerate(clusters):
        plain_s = sum(timed(plain_bfs, g, s)[0] for s in c.sources)
        seq_s, res = timed(cluster_bfs, g, c)
        for t in threads_list:
            par_s = timed(cluster_bfs, g, c, threads=t)[0]
            report.records.append(BenchRecord(
                name, g.n, g.m, c.k, d, t, ci, plain_s, seq_s, par_s, res.rounds,
                " ".join(f"{size}:{mode[0]}" for size, mode in zip(res.frontier_sizes, res.modes)),
            ))
    return report
