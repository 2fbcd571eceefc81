import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterbfs.generators import erdos_renyi, path_graph, preferential_attachment
from clusterbfs.graph import from_arcs, order_by_degree
from clusterbfs.kernel import (
    UNREACHABLE,
    Cluster,
    ClusterDistanceVector,
    Frontier,
    cluster_bfs,
    decode_distance,
    edgemap,
    plain_bfs,
)
from clusterbfs.bitset import BitSubset
from clusterbfs.oracle import all_pairs_distances, queue_bfs
from clusterbfs.select import SelectionConfig, select_clusters, validate_cluster


def test_tail_vertex_vector(cycle_tail):
    res = cluster_bfs(cycle_tail, Cluster((0, 1, 2, 3), 2))
    vec = res.vector(4)
    assert vec.delta == 1
    assert vec.subsets[1].to_bitstring() == "1010"
    assert decode_distance(vec, 0) == decode_distance(vec, 2) == 2
    assert decode_distance(vec, 1) == 1


def test_cycle_tail_vectors_disjoint_and_complete(cycle_tail):
    res = cluster_bfs(cycle_tail, Cluster((0, 1, 2, 3), 2))
    for v in range(5):
        vec = res.vector(v)
        union = BitSubset(4)
        for s in vec.subsets:
            assert not s.intersects(union)
            union = union | s
        assert union.to_bitstring() == "1111"


def test_empty_vector_decodes_unreachable():
    vec = ClusterDistanceVector([BitSubset(3), BitSubset(3)], None)
    assert decode_distance(vec, 1) == UNREACHABLE


def test_singleton_cluster_equals_plain_bfs():
    g = erdos_renyi(300, 5, 1)
    for s in (0, 17, 299):
        res = cluster_bfs(g, Cluster((s,), 0))
        assert np.array_equal(res.distances_from(0), plain_bfs(g, s))
        assert res.frontier_counts.max() <= 1


def test_star_cluster_matches_independent_bfs():
    g = erdos_renyi(500, 8, 2)
    hub = int(order_by_degree(g)[0])
    nbrs = g.neighbors(hub)[:63].tolist()
    c = Cluster((hub, *nbrs), 2)
    assert validate_cluster(g, c)
    res = cluster_bfs(g, c)
    expect = np.array([queue_bfs(g, s) for s in c.sources])
    assert np.array_equal(res.distance_matrix(), expect)


def test_decode_matches_oracle_every_pair():
    g = preferential_attachment(200, 3, 4)
    c = select_clusters(g, SelectionConfig(1, 20, 2))[0]
    res = cluster_bfs(g, c)
    oracle = all_pairs_distances(g, list(c.sources))
    for j in range(c.k):
        for v in range(g.n):
            assert decode_distance(res.vector(v), j) == oracle[j, v]


def test_unreachable_vertices_have_empty_vectors():
    g = from_arcs(6, [0, 1, 3], [1, 2, 4])
    res = cluster_bfs(g, Cluster((0, 1), 1))
    for v in (3, 4, 5):
        vec = res.vector(v)
        assert vec.delta is None and not any(vec.subsets)


def test_multiword_cluster():
    g = preferential_attachment(2000, 4, 6)
    c = select_clusters(g, SelectionConfig(1, 130, 2))[0]
    assert c.k == 130
    res = cluster_bfs(g, c)
    assert res.subsets.shape[2] == 3
    assert np.array_equal(res.distance_matrix(), all_pairs_distances(g, list(c.sources)))


def test_directed_graph():
    rng = np.random.default_rng(3)
    g = from_arcs(200, rng.integers(0, 200, 800), rng.integers(0, 200, 800), directed=True)
    c = Cluster((0, 5, 9), 40)
    for mode in ("auto", "sparse", "dense"):
        res = cluster_bfs(g, c, mode=mode)
        assert np.array_equal(res.distance_matrix(), all_pairs_distances(g, [0, 5, 9]))
    assert np.array_equal(plain_bfs(g, 5), all_pairs_distances(g, [5])[0])


def test_round_count_bound():
    g = preferential_attachment(1000, 3, 8)
    c = select_clusters(g, SelectionConfig(1, 64, 2))[0]
    res = cluster_bfs(g, c)
    ecc = max(int(d[d != UNREACHABLE].max()) for d in all_pairs_distances(g, list(c.sources)))
    # rounds run until the last frontier empties: eccentricity(S) + 1 non-empty rounds at most
    assert res.rounds <= ecc + 1


@pytest.mark.parametrize("mode", ["sparse", "dense"])
def test_forced_modes_agree(mode):
    g = erdos_renyi(400, 10, 5)
    c = select_clusters(g, SelectionConfig(1, 64, 2))[0]
    base = cluster_bfs(g, c)
    res = cluster_bfs(g, c, mode=mode)
    assert set(res.modes) == {mode}
    assert np.array_equal(res.subsets, base.subsets) and np.array_equal(res.delta, base.delta)


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_thread_counts_bit_identical(threads):
    g = preferential_attachment(3000, 5, 1)
    for c in select_clusters(g, SelectionConfig(3, 64, 4)):
        a = cluster_bfs(g, c)
        b = cluster_bfs(g, c, threads=threads)
        assert np.array_equal(a.subsets, b.subsets) and np.array_equal(a.delta, b.delta)
        assert np.array_equal(a.frontier_counts, b.frontier_counts)
        assert a.frontier_sizes == b.frontier_sizes


def test_dense_mode_engages_on_dense_graph():
    g = erdos_renyi(2000, 30, 11)
    res = cluster_bfs(g, select_clusters(g, SelectionConfig(1, 64, 2))[0])
    assert "dense" in res.modes


def test_cluster_validation_errors():
    with pytest.raises(ValueError):
        Cluster((1, 1), 2)
    with pytest.raises(ValueError):
        Cluster((), 2)
    with pytest.raises(ValueError):
        cluster_bfs(path_graph(3), Cluster((5,), 0))


def test_plain_bfs_basics():
    g = path_graph(3)
    assert plain_bfs(g, 0).tolist() == [0, 1, 2]
    g = erdos_renyi(1000, 3, 12)
    for s in (0, 500):
        assert plain_bfs(g, s)[s] == 0
        assert plain_bfs(g, s).tolist() == queue_bfs(g, s)


def _bfs_step(dist, level):
    def cond(v):
        return dist[v] == UNREACHABLE

    def relax(u, v):
        fresh = dist[v] == UNREACHABLE
        first = np.zeros(v.size, bool)
        idx = np.flatnonzero(fresh)
        _, pos = np.unique(v[idx], return_index=True)
        first[idx[pos]] = True
        dist[v[first]] = level + 1
        return first

    return cond, relax


def test_edgemap_path_chain():
    g = path_graph(3)
    dist = np.full(3, UNREACHABLE, np.int64)
    dist[0] = 0
    f = Frontier(np.array([0]))
    seen = []
    while len(f):
        cond, relax = _bfs_step(dist, f.round)
        f = edgemap(g, f, cond, relax)
        seen.append(f.vertices.tolist())
    assert seen == [[1], [2], []]
    assert dist.tolist() == [0, 1, 2]


def test_edgemap_empty_frontier():
    g = path_graph(4)
    out = edgemap(g, Frontier(np.array([], dtype=np.int32)), lambda v: np.ones(v.size, bool),
                  lambda u, v: np.ones(v.size, bool))
    assert len(out) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_edgemap_modes_agree(seed):
    g = erdos_renyi(150, 6, seed)
    rng = np.random.default_rng(seed)
    frontier = Frontier.from_mask(rng.random(g.n) < 0.2)
    marks = rng.random(g.n) < 0.5
    outs = []
    for mode in ("sparse", "dense"):
        claimed = np.zeros(g.n, bool)

        def relax(u, v, claimed=claimed):
            fresh = ~claimed[v]
            claimed[v] = True
            return fresh

        outs.append(edgemap(g, frontier, lambda v: marks[v], relax, mode=mode).vertices.tolist())
    assert outs[0] == outs[1]


def test_more_workers_than_vertices():
    g = path_graph(5)
    c = Cluster((2,), 1)
    assert np.array_equal(cluster_bfs(g, c, threads=16).delta, cluster_bfs(g, c).delta)
