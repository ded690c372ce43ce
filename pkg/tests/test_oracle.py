"""The oracle itself, cross-checked, plus verification fault injection."""

import copy

import numpy as np
import pytest

import roadknn as rk
from roadknn.errors import UnknownVertexError
from roadknn.oracle import oracle_knn_all

from conftest import built_instance, path_graph, random_instance


class TestDijkstraSssp:
    def test_single_vertex(self):
        net = rk.RoadNetwork(1, [[]], 0)
        assert rk.dijkstra_sssp(net, 0) == [0]

    def test_path(self):
        assert rk.dijkstra_sssp(path_graph((1, 1)), 0) == [0, 1, 2]

    def test_unknown_source(self):
        with pytest.raises(UnknownVertexError):
            rk.dijkstra_sssp(path_graph((1,)), 5)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_floyd_warshall(self, seed):
        net, _, _ = random_instance(seed, n_range=(2, 50))
        fw = rk.floyd_warshall(net)
        for s in range(net.n):
            d = rk.dijkstra_sssp(net, s)
            assert np.array_equal(np.array(d, dtype=float), fw[s])


class TestDijkstraKnn:
    def test_all_objects_k1(self):
        net, _, _ = random_instance(2)
        objects = rk.ObjectSet(range(net.n))
        for u in range(net.n):
            assert rk.dijkstra_knn(net, objects, 1, u) == [(u, 0)]

    def test_worked_example(self):
        net = path_graph((1, 1))
        objects = rk.ObjectSet([0, 2])
        assert rk.dijkstra_knn(net, objects, 2, 1) == [(0, 1), (2, 1)]
        assert rk.dijkstra_knn(net, objects, 2, 0) == [(0, 0), (2, 2)]

    def test_singleton_object(self):
        net, _, _ = random_instance(4)
        o = net.n - 1
        objects = rk.ObjectSet([o])
        true = rk.dijkstra_sssp(net, o)
        for u in range(0, net.n, 3):
            assert rk.dijkstra_knn(net, objects, 3, u) == [(o, true[u])]

    def test_prefix_property(self):
        net, objects, _ = random_instance(6)
        k = min(5, objects.size)
        for u in range(0, net.n, 4):
            full = rk.dijkstra_knn(net, objects, k, u)
            for j in range(1, k + 1):
                assert rk.dijkstra_knn(net, objects, j, u) == full[: min(j, len(full))]

    def test_batch_oracle_agrees(self):
        for seed in (1, 5, 9):
            net, objects, k = random_instance(seed)
            batch = oracle_knn_all(net, objects, k)
            for u in range(net.n):
                assert batch[u] == rk.dijkstra_knn(net, objects, k, u)


class TestVerifyIndex:
    def test_fresh_index_clean(self):
        net, objects, k, *_, index = built_instance(3)
        report = rk.verify_index(net, objects, k, index)
        assert report.ok
        assert report.checked == net.n

    def test_corrupted_distance_flagged(self):
        net, objects, k, *_, index = built_instance(3)
        bad = copy.deepcopy(index)
        victim = next(v for v in range(net.n) if bad.lists[v])
        o, d = bad.lists[victim][-1]
        bad.lists[victim][-1] = (o, d + 17)
        report = rk.verify_index(net, objects, k, bad)
        assert not report.ok
        assert report.violation_count == 1
        assert report.violations[0].vertex == victim

    def test_shape_violation_flagged(self):
        net, objects, k, *_, index = built_instance(8, k_choices=(5,))
        bad = copy.deepcopy(index)
        bad.lists[0] = bad.lists[0][:-1]
        report = rk.verify_index(net, objects, k, bad)
        assert not report.ok
        assert report.violations[0].kind == "shape"

    def test_non_object_member_flagged(self):
        net, _, _ = random_instance(12, n_range=(6, 30))
        objects = rk.ObjectSet([0, 1])
        order, bn = rk.build_bn_graph(net)
        partial = rk.compute_partial_knn(bn, order, objects, 2)
        index = rk.build_index_bidirectional(bn, order, partial, objects, 2)
        bad = copy.deepcopy(index)
        outsider = next(v for v in range(net.n) if v not in objects)
        v0 = next(v for v in range(net.n) if all(o != outsider for o, _ in bad.lists[v]))
        # replace the last entry, keeping its distance to dodge the
        # multiset check and hit the membership check instead
        o, d = bad.lists[v0][-1]
        bad.lists[v0][-1] = (outsider, d)
        report = rk.verify_index(net, objects, 2, bad)
        assert not report.ok

    def test_report_caps_recorded_violations(self):
        net, objects, k, *_, index = built_instance(2, n_range=(30, 50))
        bad = copy.deepcopy(index)
        for v in range(bad.n):
            if bad.lists[v]:
                o, d = bad.lists[v][-1]
                bad.lists[v][-1] = (o, d + 1)
        report = rk.verify_index(net, objects, k, bad)
        assert report.violation_count >= 20
        assert len(report.violations) == report.MAX_RECORDED


class TestVerifyBnGraph:
    def test_fresh_build_clean(self):
        net, _, _ = random_instance(7)
        _, bn = rk.build_bn_graph(net)
        report = rk.verify_bn_graph(net, bn)
        assert report.ok, report.summary()

    def test_inflated_edge_flagged(self):
        net, _, _ = random_instance(7)
        _, bn = rk.build_bn_graph(net)
        bad = copy.deepcopy(bn)
        u = next(v for v in range(bad.n) if bad.adj[v])
        nbr, w = bad.adj[u][0]
        bad.adj[u][0] = (nbr, w + 5)
        report = rk.verify_bn_graph(net, bad)
        assert not report.ok
        assert any(v.kind in ("edge-weight", "pair-distance") for v in report.violations)

    def test_missing_vertex_flagged(self):
        net, _, _ = random_instance(7)
        _, bn = rk.build_bn_graph(net)
        bad = copy.deepcopy(bn)
        bad.n -= 1
        report = rk.verify_bn_graph(net, bad)
        assert not report.ok
        assert report.violations[0].kind == "vertex-set"

    def test_large_instance_sampled_pairs(self):
        net = rk.generate_random_connected(400, 40, (1, 100), 5)
        _, bn = rk.build_bn_graph(net)
        report = rk.verify_bn_graph(net, bn, pair_samples=256, seed=1)
        assert report.ok, report.summary()
