import random

import hypothesis
import pytest

import roadknn as rk

hypothesis.settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


def path_graph(weights=(1, 1)):
    """Chain 0-1-...-len(weights) with the given edge weights."""
    edges = [(i, i + 1, w) for i, w in enumerate(weights)]
    return rk.RoadNetwork.from_edges(len(weights) + 1, edges)


def random_instance(seed, n_range=(5, 60), extra_factor=2, weight_choices=(3, 10, 1000),
                    k_choices=(1, 2, 5, 20), density_range=(0.05, 1.0)):
    """One seeded random test instance: graph, objects, k."""
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    max_extra = n * (n - 1) // 2 - (n - 1)
    extra = rng.randint(0, min(extra_factor * n, max_extra))
    wmax = rng.choice(weight_choices)
    net = rk.generate_random_connected(n, extra, (1, wmax), seed)
    k = rng.choice(k_choices)
    lo, hi = density_range
    density = min(1.0, max(lo, rng.random() * (hi - lo) + lo))
    m_size = max(1, min(n, round(density * n)))
    objects = rk.ObjectSet(rng.sample(range(n), m_size))
    return net, objects, k


def built_instance(seed, **kwargs):
    """random_instance plus the full build (both directions share it)."""
    net, objects, k = random_instance(seed, **kwargs)
    order, bn = rk.build_bn_graph(net)
    partial = rk.compute_partial_knn(bn, order, objects, k)
    index = rk.build_index_bidirectional(bn, order, partial, objects, k)
    return net, objects, k, order, bn, partial, index


@pytest.fixture
def path3():
    """The worked 3-vertex path: unit weights, objects {0, 2}, k=2."""
    net = path_graph((1, 1))
    objects = rk.ObjectSet([0, 2])
    order, bn = rk.build_bn_graph(net)
    partial = rk.compute_partial_knn(bn, order, objects, 2)
    index = rk.build_index_bidirectional(bn, order, partial, objects, 2)
    return net, objects, order, bn, partial, index
