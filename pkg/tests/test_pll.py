import numpy as np
import pytest

from clusterbfs.generators import erdos_renyi, path_graph, preferential_attachment, star_graph
from clusterbfs.graph import from_arcs, order_by_degree
from clusterbfs.kernel import UNREACHABLE
from clusterbfs.landmark import IndexFormatError, build_ll_index
from clusterbfs.oracle import all_pairs_distances
from clusterbfs.pll import TwoHopLabels, batch_schedule, build_pll, pruned_bfs
from conftest import disconnected_graph


@pytest.mark.parametrize("remaining,sizes", [
    (100, [100]),
    (1625, [200, 300, 450, 675]),
    (3625, [200, 300, 450, 675, 1000, 1000]),
    (0, []),
    (201, [200, 1]),
])
def test_batch_schedule(remaining, sizes):
    assert batch_schedule(remaining) == sizes


def _all_pairs_ok(g, labels):
    truth = all_pairs_distances(g)
    us, vs = np.meshgrid(np.arange(g.n), np.arange(g.n), indexing="ij")
    return np.array_equal(labels.query_many(us.ravel(), vs.ravel()).reshape(g.n, g.n), truth)


def test_path_without_clusters():
    g = path_graph(5)
    labels = build_pll(g, 0, 64, 2)
    assert _all_pairs_ok(g, labels)
    assert labels.query(0, 4) == 4


@pytest.mark.parametrize("r", [0, 1, 4])
def test_exact_on_small_graphs(r):
    for seed in range(4):
        g = erdos_renyi(150, 5, seed)
        assert _all_pairs_ok(g, build_pll(g, r, 16, 2))


def test_disconnected_graphs():
    for seed in range(3):
        g = disconnected_graph(seed, 200)
        labels = build_pll(g, 2, 16, 2)
        assert _all_pairs_ok(g, labels)


def test_top_ranked_vertex_labels_its_component():
    g = disconnected_graph(5, 200)
    labels = build_pll(g, 0, 1, 0)
    top = int(order_by_degree(g)[0])
    reach = all_pairs_distances(g, [top])[0]
    has = np.array([any(h == 0 for h, _ in labels.labels_of(v)) for v in range(g.n)])
    assert np.array_equal(has, reach != UNREACHABLE)


def test_hubs_sorted_per_vertex():
    g = preferential_attachment(500, 3, 3)
    labels = build_pll(g, 2, 16, 2)
    for v in range(g.n):
        hubs = [h for h, _ in labels.labels_of(v)]
        assert hubs == sorted(set(hubs))


def test_batched_matches_sequential_label_count():
    g = preferential_attachment(1500, 3, 4)
    seq = build_pll(g, 1, 64, 2, batch_size=1)
    assert build_pll(g, 1, 64, 2).label_count == seq.label_count


def test_threads_do_not_change_labels():
    g = preferential_attachment(800, 3, 5)
    assert build_pll(g, 2, 32, 2, threads=3) == build_pll(g, 2, 32, 2, threads=1)


def test_plain_batched_mode_is_exact():
    g = erdos_renyi(300, 4, 6)
    assert _all_pairs_ok(g, build_pll(g, 1, 16, 2, rank_prune=False))


def test_pruned_bfs_without_labels_reaches_everything():
    g = path_graph(4)
    labels = TwoHopLabels.empty(g.n, build_ll_index(g, []))
    vs, ds = pruned_bfs(g, labels, 1)
    assert sorted(zip(vs.tolist(), ds.tolist())) == [(0, 1), (1, 0), (2, 1), (3, 2)]


def test_pruned_bfs_stops_at_covered_vertices():
    g = path_graph(4)
    labels = TwoHopLabels.empty(g.n, build_ll_index(g, []))
    # hub rank 0 at vertex 1 covers every distance through vertex 1
    labels.commit([0, 1, 2, 3], [1, 0, 1, 2], [0, 0, 0, 0])
    vs, ds = pruned_bfs(g, labels, 2)
    assert sorted(zip(vs.tolist(), ds.tolist())) == [(2, 0), (3, 1)]


def test_pruned_bfs_skips_cluster_covered_vertices():
    g = star_graph(4)
    from clusterbfs.kernel import Cluster

    labels = TwoHopLabels.empty(g.n, build_ll_index(g, [Cluster((0,), 0)]))
    vs, _ = pruned_bfs(g, labels, 1)
    assert vs.tolist() == [1]


def test_prio_shadow():
    g = path_graph(5)
    labels = TwoHopLabels.empty(g.n, build_ll_index(g, []))
    prio = np.array([5, 5, 0, 5, 5])
    vs, _ = pruned_bfs(g, labels, 0, prio)
    # vertex 2 outranks the hub, so it and everything behind it stay unlabeled
    assert sorted(vs.tolist()) == [0, 1]


def test_deep_graph_with_clusters_is_rejected():
    with pytest.raises(ValueError, match="too deep"):
        build_pll(path_graph(300), 1, 2, 2)
    assert build_pll(path_graph(300), 0, 2, 2).query(0, 299) == 299


def test_directed_rejected():
    with pytest.raises(ValueError):
        build_pll(from_arcs(3, [0], [1], directed=True), 0, 1, 0)


def test_round_trip(tmp_path):
    g = disconnected_graph(7, 300)
    labels = build_pll(g, 2, 16, 2)
    labels.save(tmp_path / "p.pll")
    assert (tmp_path / "p.pll").stat().st_size == labels.index_bytes
    back = TwoHopLabels.load(tmp_path / "p.pll")
    assert back == labels
    us = np.arange(g.n)
    vs = us[::-1].copy()
    assert np.array_equal(back.query_many(us, vs), labels.query_many(us, vs))


def test_corrupt_labels(tmp_path):
    build_pll(path_graph(20), 0, 1, 0).save(tmp_path / "p.pll")
    data = (tmp_path / "p.pll").read_bytes()
    for bad in (data[:-3], data + b"\0", b"XXXXXXXX" + data[8:]):
        (tmp_path / "b.pll").write_bytes(bad)
        with pytest.raises(IndexFormatError):
            TwoHopLabels.load(tmp_path / "b.pll")
