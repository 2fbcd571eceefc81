"""``clusterbfs`` command line: graph conversion, traversal dumps, index build/query, benchmarks.

Exit status is 0 on success, 1 for usage errors and 2 for bad input data.
Vertex IDs on the command line are the dense 0-based IDs of the loaded graph.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import generators
from .graph import GraphFormatError, order_by_degree, read_graph, save_graph, validate, write_edge_list
from .kernel import UNREACHABLE, cluster_bfs
from .landmark import (
    LL_MAGIC,
    CombinedOracle,
    IndexFormatError,
    LandmarkIndex,
    budget_to_cluster_count,
    build_ll_index,
    build_plain_ll_index,
    eval_distortion,
)
from .pll import PLL_MAGIC, TwoHopLabels, build_pll
from .select import SelectionConfig, cluster_around, read_clusters, select_clusters

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return "inf" if x == UNREACHABLE else str(int(x))


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(args, header, rows):
    """Write rows as space-separated text or CSV."""
    with _output(args.out) as out:
        if args.format == "csv":
            w = csv.writer(out)
            w.writerow(header)
            w.writerows(rows)
        else:
            out.write(" ".join(header) + "\n")
            for row in rows:
                out.write(" ".join(str(x) for x in row) + "\n")


def _load_graph(args):
    try:
        return read_graph(args.graph, directed=getattr(args, "directed", False))
    except FileNotFoundError as exc:
        raise DataError(f"cannot read graph: {exc}") from exc


def _undirected(g):
    if not g.symmetric:
        raise UsageError("this command requires an undirected graph")
    return g


def _load_index(path):
    try:
        with open(path, "rb") as fh:
            magic = fh.read(8)
    except OSError as exc:
        raise DataError(f"cannot read index: {exc}") from exc
    if magic == LL_MAGIC:
        return LandmarkIndex.load(path)
    if magic == PLL_MAGIC:
        return TwoHopLabels.load(path)
    raise DataError(f"{path}: unrecognized index file")


def _read_pairs(path):
    fh = sys.stdin if path in (None, "-") else open(path)
    try:
        us, vs = [], []
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise DataError(f"{path or '<stdin>'}:{lineno}: expected 'u v'")
            us.append(int(parts[0]))
            vs.append(int(parts[1]))
    finally:
        if fh is not sys.stdin:
            fh.close()
    return np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64)


def _check_vertices(n, *arrays):
    for a in arrays:
        if a.size and (a.min() < 0 or a.max() >= n):
            raise DataError(f"vertex ID out of range [0, {n})")


# --- commands ---------------------------------------------------------------

def cmd_convert(args):
    g = _load_graph(args)
    diag = validate(g)
    if not diag:
        raise DataError(f"graph failed validation: {diag.violation} ({diag.detail})")
    if args.out is None:
        raise UsageError("convert needs --out")
    save_graph(g, args.out)
    print(f"n={g.n} m={g.m}")


def cmd_generate(args):
    if args.kind == "er":
        g = generators.erdos_renyi(args.n, args.degree, args.seed)
    else:
        g = generators.preferential_attachment(args.n, max(1, int(round(args.degree / 2))), args.seed)
    if args.out is None:
        raise UsageError("generate needs --out")
    if args.binary:
        save_graph(g, args.out)
    else:
        write_edge_list(g, args.out)
    print(f"n={g.n} m={g.m}")


def cmd_cbfs(args):
    g = _load_graph(args)
    if args.cluster_file:
        try:
            clusters = read_clusters(args.cluster_file)
        except (ValueError, OSError) as exc:
            raise UsageError(f"invalid cluster file: {exc}") from exc
        if len(clusters) != 1:
            raise UsageError("cluster file must hold exactly one cluster")
        cluster = clusters[0]
        if max(cluster.sources) >= g.n:
            raise UsageError("cluster file names a vertex outside the graph")
    elif args.center is not None:
        if not 0 <= args.center < g.n:
            raise UsageError(f"--center must be in [0, {g.n})")
        cluster = cluster_around(_undirected(g), args.center, args.k, args.d)
    else:
        picked = select_clusters(_undirected(g), SelectionConfig(1, args.k, args.d))
        if not picked:
            raise DataError("graph has no vertices")
        cluster = picked[0]
    res = cluster_bfs(g, cluster, threads=args.threads)
    if args.raw:
        header = ["vertex", "delta"] + [f"S{i}" for i in range(cluster.d + 1)]
        rows = []
        for v in range(g.n):
            vec = res.vector(v)
            rows.append([v, "inf" if vec.delta is None else vec.delta] + [s.to_bitstring() for s in vec.subsets])
    else:
        header = ["vertex"] + [f"s{s}" for s in cluster.sources]
        dist = res.distance_matrix()
        rows = [[v] + [_fmt(x) for x in dist[:, v]] for v in range(g.n)]
    _emit(args, header, rows)


def cmd_build_ll(args):
    g = _undirected(_load_graph(args))
    if args.out is None:
        raise UsageError("build-ll needs --out")
    if args.plain:
        r = min(args.budget, g.n)
        if r < 1:
            raise UsageError("budget must allow at least one landmark")
        idx = build_plain_ll_index(g, order_by_degree(g)[:r], threads=args.threads)
        print(f"r={r}")
    else:
        try:
            r = budget_to_cluster_count(args.budget, args.k, args.d)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print(f"r={r}")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            clusters = select_clusters(g, SelectionConfig(r, args.k, args.d))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        idx = build_ll_index(g, clusters, threads=args.threads)
    idx.save(args.out)
    print(f"clusters={idx.r} bytes_per_vertex={idx.bytes_per_vertex}")


def cmd_query_ll(args):
    idx = _load_index(args.index)
    if not isinstance(idx, LandmarkIndex):
        raise UsageError("query-ll needs a landmark index; use query-pll for 2-hop labels")
    us, vs = _read_pairs(args.pairs)
    _check_vertices(idx.n, us, vs)
    if args.tau > 0:
        if args.graph is None:
            raise UsageError("--tau needs --graph")
        g = _load_graph(args)
        if g.n != idx.n:
            raise DataError("graph and index disagree on vertex count")
        est = CombinedOracle(idx, g, args.tau).query_many(us, vs)
    else:
        est = idx.query_many(us, vs)
    _emit(args, ["u", "v", "estimate"], [[u, v, _fmt(e)] for u, v, e in zip(us, vs, est)])


def cmd_eval(args):
    idx = _load_index(args.index)
    g = _undirected(_load_graph(args))
    if g.n != idx.n:
        raise DataError("graph and index disagree on vertex count")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        st = eval_distortion(idx, g, args.pairs, args.seed, tau=args.tau)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    header = ["pairs", "covered", "epsilon_pct", "max_distortion", "exact_rate"]
    row = [st.pairs, st.covered, f"{st.epsilon_pct:.4f}", f"{st.max_distortion:.4f}", f"{st.exact_rate:.4f}"]
    if args.format == "csv":
        _emit(args, header, [row])
    else:
        with _output(args.out) as out:
            out.write(f"pairs={st.pairs} covered={st.covered} eps={st.epsilon_pct:.1f}% "
                      f"max={st.max_distortion:.3f} exact={st.exact_rate:.3f}\n")


def cmd_build_pll(args):
    g = _undirected(_load_graph(args))
    if args.out is None:
        raise UsageError("build-pll needs --out")
    try:
        labels = build_pll(g, args.r, args.k, args.d, threads=args.threads)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    labels.save(args.out)
    print(f"avg_labels={labels.avg_labels:.2f} index_bytes={labels.index_bytes}")


def cmd_query_pll(args):
    idx = _load_index(args.index)
    if not isinstance(idx, TwoHopLabels):
        raise UsageError("query-pll needs a 2-hop label index")
    us, vs = _read_pairs(args.pairs)
    _check_vertices(idx.n, us, vs)
    est = idx.query_many(us, vs)
    _emit(args, ["u", "v", "distance"], [[u, v, _fmt(e)] for u, v, e in zip(us, vs, est)])


def cmd_bench(args):
    from .bench import BenchReport, run_bench

    g = _undirected(_load_graph(args))
    try:
        threads = [int(x) for x in args.threads_list.split(",") if x]
    except ValueError:
        raise UsageError("--threads-list must be comma-separated integers") from None
    report = run_bench(g, Path(args.graph).name, args.k, args.d, threads, reps=args.reps)
    if args.format == "csv":
        _emit(args, list(BenchReport.COLUMNS), [[r[c] for c in BenchReport.COLUMNS] for r in report.rows()])
        return
    with _output(args.out) as out:
        for rec in report.records:
            out.write(f"cluster={rec.cluster} k={rec.k} threads={rec.threads} plain={rec.plain_s:.4f}s "
                      f"seq={rec.seq_s:.4f}s par={rec.par_s:.4f}s rounds={rec.rounds} modes=[{rec.modes}]\n")
        for s in report.summary():
            out.write(f"median threads={s['threads']} clusters={s['clusters']} plain={s['plain_s']:.4f}s "
                      f"seq={s['seq_s']:.4f}s par={s['par_s']:.4f}s "
                      f"bit_speedup={s['bit_speedup']:.2f}x self_speedup={s['self_speedup']:.2f}x\n")


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="edge list or binary graph cache")
    common.add_argument("--directed", action="store_true", help="read an edge list as directed")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("text", "csv"), default="text")

    p = _Parser(prog="clusterbfs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help, needs_graph=True):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=fn, needs_graph=needs_graph)
        return sp

    add("convert", cmd_convert, "edge list -> binary graph cache")

    sp = add("generate", cmd_generate, "write a synthetic graph", needs_graph=False)
    sp.add_argument("--kind", choices=("er", "pa"), default="pa")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--degree", type=float, default=10.0, help="target average degree")
    sp.add_argument("--binary", action="store_true", help="write a graph cache instead of an edge list")

    sp = add("cbfs", cmd_cbfs, "distances from one cluster to every vertex")
    sp.add_argument("--k", type=int, default=64)
    sp.add_argument("--d", type=int, default=2)
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--center", type=int)
    grp.add_argument("--cluster-file")
    sp.add_argument("--raw", action="store_true", help="dump delta and subsets instead of distances")

    sp = add("build-ll", cmd_build_ll, "build a landmark index under a byte budget")
    sp.add_argument("--budget", type=int, default=1024, help="bytes per vertex")
    sp.add_argument("--k", type=int, default=64)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--plain", action="store_true", help="one BFS per landmark, one byte each")

    sp = add("query-ll", cmd_query_ll, "answer pairs with a landmark index", needs_graph=False)
    sp.add_argument("--index", required=True)
    sp.add_argument("--pairs", help="file of 'u v' lines (default stdin)")
    sp.add_argument("--tau", type=int, default=0, help="bidirectional search size (needs --graph)")

    sp = add("eval", cmd_eval, "distortion of an index on sampled pairs")
    sp.add_argument("--index", required=True)
    sp.add_argument("--pairs", type=int, default=10000)
    sp.add_argument("--tau", type=int, default=0)

    sp = add("build-pll", cmd_build_pll, "build exact 2-hop labels")
    sp.add_argument("--r", type=int, default=0, help="clusters in the first phase")
    sp.add_argument("--k", type=int, default=64)
    sp.add_argument("--d", type=int, default=2)

    sp = add("query-pll", cmd_query_pll, "answer pairs with 2-hop labels", needs_graph=False)
    sp.add_argument("--index", required=True)
    sp.add_argument("--pairs", help="file of 'u v' lines (default stdin)")

    sp = add("bench", cmd_bench, "time plain BFS vs cluster-BFS")
    sp.add_argument("--k", type=int, default=64)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--threads-list", default="1")
    sp.add_argument("--reps", type=int, default=10, help="number of clusters to time")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.needs_graph and args.graph is None:
        parser.error(f"{args.command} requires --graph")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"clusterbfs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, GraphFormatError, IndexFormatError, OSError) as exc:
        print(f"clusterbfs: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
