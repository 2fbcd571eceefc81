import warnings

import numpy as np
import pytest

from clusterbfs.generators import erdos_renyi, path_graph, preferential_attachment
from clusterbfs.graph import from_arcs
from clusterbfs.kernel import UNREACHABLE, Cluster, cluster_bfs, decode_distance
from clusterbfs.landmark import (
    CombinedOracle,
    IndexFormatError,
    LandmarkIndex,
    bidirectional_refine,
    budget_to_cluster_count,
    build_ll_index,
    build_plain_ll_index,
    eval_distortion,
    query_combined,
    record_bytes,
    sample_reachable_pairs,
)
from clusterbfs.oracle import all_pairs_distances
from clusterbfs.pll import build_pll
from clusterbfs.select import SelectionConfig, select_clusters


@pytest.mark.parametrize("t,k,d,r", [(1024, 64, 2, 60), (1024, 8, 2, 341), (1024, 64, 3, 40), (1024, 64, 4, 31)])
def test_budget_counts(t, k, d, r):
    assert budget_to_cluster_count(t, k, d) == r


def test_budget_too_small():
    assert record_bytes(64, 2) == 17
    with pytest.raises(ValueError):
        budget_to_cluster_count(16, 64, 2)


def test_plain_budget_is_one_byte_per_landmark():
    g = erdos_renyi(2000, 4, 1)
    idx = build_plain_ll_index(g, range(1024))
    assert idx.bytes_per_vertex == 1024


def test_empty_index_answers_unreachable():
    g = path_graph(4)
    idx = build_ll_index(g, [])
    assert idx.query(0, 3).estimate == UNREACHABLE and not idx.query(0, 3).reachable
    assert idx.query_many(np.arange(4), np.arange(4)).tolist() == [UNREACHABLE] * 4


def test_singleton_cluster_equals_plain_landmark():
    g = erdos_renyi(300, 5, 2)
    a = build_ll_index(g, [Cluster((7,), 0)])
    b = build_plain_ll_index(g, [7])
    assert np.array_equal(a.records, b.records)


def test_landmark_endpoint_is_exact():
    g = erdos_renyi(300, 5, 3)
    idx = build_plain_ll_index(g, [11])
    truth = all_pairs_distances(g, [11])[0]
    assert np.array_equal(idx.query_many(np.full(g.n, 11), np.arange(g.n)), truth)


def test_source_self_query_is_zero():
    g = preferential_attachment(300, 3, 4)
    (c,) = select_clusters(g, SelectionConfig(1, 20, 2))
    idx = build_ll_index(g, [c])
    for s in c.sources:
        q = idx.query(s, s)
        assert q.estimate == 0 and q.witness[0] == 0


def test_cycle_tail_query(cycle_tail):
    c = Cluster((0, 1, 2, 3), 2)
    idx = build_ll_index(cycle_tail, [c])
    res = cluster_bfs(cycle_tail, c)
    f, e = 4, 2
    brute = min(decode_distance(res.vector(f), j) + decode_distance(res.vector(e), j) for j in range(4))
    assert idx.query(f, e).estimate == brute == 2


def test_index_decodes_to_cluster_bfs():
    g = preferential_attachment(400, 3, 5)
    cs = select_clusters(g, SelectionConfig(3, 40, 2))
    idx = build_ll_index(g, cs)
    for ci, c in enumerate(cs):
        res = cluster_bfs(g, c)
        for v in range(g.n):
            a, b = idx.vector(v, ci), res.vector(v)
            assert a.delta == b.delta and a.subsets == b.subsets


def test_budget_honesty():
    g = preferential_attachment(500, 5, 6)
    r = budget_to_cluster_count(200, 64, 2)
    cs = select_clusters(g, SelectionConfig(r, 64, 2))
    idx = build_ll_index(g, cs)
    assert idx.bytes_per_vertex == sum(record_bytes(c.k, c.d) for c in cs) <= 200


def test_monotone_in_clusters():
    g = erdos_renyi(300, 4, 7)
    cs = select_clusters(g, SelectionConfig(6, 16, 2))
    us, vs = np.meshgrid(np.arange(g.n), np.arange(g.n))
    prev = None
    for r in range(len(cs) + 1):
        est = build_ll_index(g, cs[:r]).query_many(us.ravel(), vs.ravel())
        if prev is not None:
            assert np.all(est <= prev)
        prev = est


def test_saturated_distance_is_skipped():
    g = path_graph(300)
    idx = build_ll_index(g, [Cluster((0,), 0)])
    assert idx.records[299, 0] == 254
    assert idx.query(299, 298).estimate == UNREACHABLE
    assert idx.query(10, 20).estimate == 30


def test_bidirectional_refine():
    g = path_graph(6)
    assert bidirectional_refine(g, 0, 5, 0) == UNREACHABLE
    assert bidirectional_refine(g, 2, 3, 2) == 1
    assert bidirectional_refine(g, 3, 3, 1) == 0
    h = erdos_renyi(400, 4, 8)
    truth = all_pairs_distances(h)
    rng = np.random.default_rng(0)
    for u, v in rng.integers(0, h.n, (200, 2)):
        assert bidirectional_refine(h, u, v, h.n) == truth[u, v]
        assert bidirectional_refine(h, u, v, 5) >= truth[u, v]


def test_query_combined():
    g = erdos_renyi(300, 5, 9)
    idx = build_ll_index(g, select_clusters(g, SelectionConfig(2, 16, 2)))
    truth = all_pairs_distances(g)
    for u, v in [(0, 1), (5, 99), (42, 42)]:
        assert query_combined(idx, g, u, v, 0) == idx.query(u, v)
        q = query_combined(idx, g, u, v, g.n)
        assert q.estimate == truth[u, v]
        if q.estimate < idx.query(u, v).estimate:
            assert q.witness == "bidirectional"


def test_round_trip_and_layout(tmp_path):
    g = preferential_attachment(200, 3, 10)
    idx = build_ll_index(g, select_clusters(g, SelectionConfig(3, 12, 3)))
    idx.save(tmp_path / "i.ll")
    back = LandmarkIndex.load(tmp_path / "i.ll")
    assert back == idx
    raw = (tmp_path / "i.ll").read_bytes()
    assert raw[:8] == b"CBFSLL01"
    # records close the file, vertex-major
    assert raw[-idx.records.size:] == idx.records.tobytes()


def test_corrupt_index(tmp_path):
    g = path_graph(10)
    build_ll_index(g, [Cluster((0, 1), 1)]).save(tmp_path / "i.ll")
    data = (tmp_path / "i.ll").read_bytes()
    for bad in (data[:-1], data + b"x", b"NOTMAGIC" + data[8:]):
        (tmp_path / "b.ll").write_bytes(bad)
        with pytest.raises(IndexFormatError):
            LandmarkIndex.load(tmp_path / "b.ll")


def test_directed_graph_rejected():
    g = from_arcs(3, [0, 1], [1, 2], directed=True)
    with pytest.raises(ValueError):
        build_ll_index(g, [Cluster((0,), 0)])


def test_sampling_is_reachable_and_seeded():
    g = from_arcs(10, [0, 1, 2, 5, 6], [1, 2, 3, 6, 7])
    with pytest.warns(RuntimeWarning):
        us, vs = sample_reachable_pairs(g, 50, seed=4)
    truth = all_pairs_distances(g)
    assert np.all(us != vs) and np.all(truth[us, vs] != UNREACHABLE)
    us2, vs2 = sample_reachable_pairs(g, 10, seed=4)
    us3, vs3 = sample_reachable_pairs(g, 10, seed=4)
    assert np.array_equal(us2, us3) and np.array_equal(vs2, vs3)


def test_eval_exact_backend_has_zero_epsilon():
    g = erdos_renyi(300, 4, 11)
    st = eval_distortion(build_pll(g, 0, 64, 2), g, 500, seed=1)
    assert st.epsilon_pct == 0.0 and st.exact_rate == 1.0 and st.max_distortion == 1.0


def test_eval_empty_index_is_coverage_failure():
    g = erdos_renyi(100, 4, 12)
    st = eval_distortion(build_ll_index(g, []), g, 200, seed=1, tau=0)
    assert st.covered == 0 and st.coverage == 0.0 and np.isnan(st.epsilon_pct)


def test_eval_full_enumeration_matches_direct_computation():
    g = erdos_renyi(40, 3, 13)
    idx = build_ll_index(g, select_clusters(g, SelectionConfig(2, 8, 2)))
    with pytest.warns(RuntimeWarning, match="only"):
        st = eval_distortion(idx, g, 10**6, seed=0)
    truth = all_pairs_distances(g)
    us, vs = np.nonzero((truth != UNREACHABLE) & (truth > 0))
    est = idx.query_many(us, vs)
    cov = est != UNREACHABLE
    assert st.pairs == us.size
    assert st.epsilon_pct == pytest.approx((np.mean(est[cov] / truth[us, vs][cov]) - 1) * 100)
    # requesting exactly the total enumerates everything without a warning
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert eval_distortion(idx, g, us.size, seed=0).pairs == us.size


def test_combined_oracle_tau_zero_is_index():
    g = erdos_renyi(100, 4, 14)
    idx = build_ll_index(g, select_clusters(g, SelectionConfig(2, 8, 2)))
    us = np.arange(50)
    vs = np.arange(50, 100)
    assert np.array_equal(CombinedOracle(idx, g, 0).query_many(us, vs), idx.query_many(us, vs))
