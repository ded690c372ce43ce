"""Brute-force ground truth and verification reports.

Everything here is deliberately independent of the index machinery:
plain Dijkstra over the road network (no pruned graph, no ranks), a
Floyd-Warshall cross-check for small graphs, and report generators
that compare an index or a pruned graph against those baselines.

The oracle breaks distance ties by object id, like the builders, so
list comparisons can be exact wherever ties allow.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

import numpy as np

from .builders import KnnIndex, KnnList
from .bngraph import BnGraph
from .errors import UnknownVertexError
from .graph import INFINITY, ObjectSet, RoadNetwork


def dijkstra_sssp(net: RoadNetwork, source: int) -> list[int]:
    """Exact distances from source to every vertex (INFINITY if unreachable)."""
    if not (0 <= source < net.n):
        raise UnknownVertexError(f"source {source} outside [0,{net.n})")
    dist = [INFINITY] * net.n
    dist[source] = 0
    heap = [(0, source)]
    adj = net.adj
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _sssp_adjacency(adj, n: int, source: int) -> list[int]:
    dist = [INFINITY] * n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def dijkstra_knn(net: RoadNetwork, objects: ObjectSet, k: int, u: int) -> KnnList:
    """k nearest objects of u by label-setting expansion from u.

    Terminates once min(k, |M|) objects are settled. Heap keys are
    (distance, vertex id), so equal-distance objects settle in id
    order and the result respects the package-wide tie-break.
    """
    if not (0 <= u < net.n):
        raise UnknownVertexError(f"vertex {u} outside [0,{net.n})")
    want = min(k, objects.size)
    dist = [INFINITY] * net.n
    dist[u] = 0
    heap = [(0, u)]
    adj = net.adj
    found: KnnList = []
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        if x in objects:
            found.append((x, d))
            if len(found) == want:
                break
        for y, w in adj[x]:
            nd = d + w
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return found


def floyd_warshall(net: RoadNetwork) -> np.ndarray:
    """All-pairs distances, vectorized over the middle vertex.

    Independent second oracle for small n; uses float64 internally but
    all inputs are exact small integers so values stay exact.
    """
    n = net.n
    mat = np.full((n, n), np.inf)
    np.fill_diagonal(mat, 0.0)
    for u, v, w in net.edges():
        if w < mat[u, v]:
            mat[u, v] = w
            mat[v, u] = w
    for mid in range(n):
        np.minimum(mat, mat[:, mid : mid + 1] + mat[mid : mid + 1, :], out=mat)
    return mat


def descending_distance_table(bn: BnGraph, source: int) -> dict[int, int]:
    """Shortest strictly rank-decreasing path lengths from source.

    Treats the pruned graph as a DAG directed from higher to lower
    rank; plain Dijkstra over that orientation. Used only to verify
    the partial-kNN sweep, never by the builders themselves.
    """
    rank = bn.order.rank
    dist = {source: 0}
    heap = [(0, source)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        rx = rank[x]
        for y, w in bn.adj[x]:
            if rank[y] < rx:
                nd = d + w
                if nd < dist.get(y, INFINITY):
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
    return dist


def oracle_knn_all(net: RoadNetwork, objects: ObjectSet, k: int) -> list[KnnList]:
    """Ground-truth lists for every vertex, choosing the cheaper direction.

    With few objects, one Dijkstra per object covers all vertices;
    with many, per-vertex expansion settles after min(k, |M|) objects.
    Both produce the same (distance, id)-ordered lists.
    """
    n = net.n
    want = min(k, objects.size)
    members = sorted(objects)
    if objects.size <= max(32, k):
        cols = np.empty((len(members), n), dtype=np.int64)
        for i, o in enumerate(members):
            cols[i] = dijkstra_sssp(net, o)
        ids = np.array(members, dtype=np.int64)
        out: list[KnnList] = []
        dists = cols.T  # row per vertex
        for v in range(n):
            row = dists[v]
            if len(members) > want:
                part = np.argpartition(row, want - 1)[:want]
            else:
                part = np.arange(len(members))
            pairs = sorted((int(row[j]), int(ids[j])) for j in part)
            out.append([(o, d) for d, o in pairs])
        return out
    return [dijkstra_knn(net, objects, k, v) for v in range(n)]


@dataclass
class Violation:
    kind: str
    vertex: int
    detail: str


@dataclass
class VerificationReport:
    checked: int = 0
    violation_count: int = 0
    violations: list[Violation] = field(default_factory=list)

    MAX_RECORDED = 10

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def record(self, kind: str, vertex: int, detail: str) -> None:
        self.violation_count += 1
        if len(self.violations) < self.MAX_RECORDED:
            self.violations.append(Violation(kind, vertex, detail))

    def summary(self) -> str:
        lines = [f"checked={self.checked} violations={self.violation_count}"]
        for v in self.violations:
            lines.append(f"  [{v.kind}] vertex {v.vertex}: {v.detail}")
        return "\n".join(lines)


def verify_index(net: RoadNetwork, objects: ObjectSet, k: int,
                 index: KnnIndex) -> VerificationReport:
    """Compare every vertex's stored list against the Dijkstra oracle.

    Checks, per vertex: list shape (length min(k, |M|)), exact distance
    multiset equality with the oracle, and validity as a kNN set (every
    stored entry carries its true distance; memberships may differ from
    the oracle's only among equal-distance objects).
    """
    report = VerificationReport()
    expected = oracle_knn_all(net, objects, k)
    want = min(k, objects.size)
    for v in range(net.n):
        report.checked += 1
        got = index.lists[v] if v < len(index.lists) else None
        exp = expected[v]
        if got is None or len(got) != want:
            report.record(
                "shape", v,
                f"expected {want} entries, got {'none' if got is None else len(got)}",
            )
            continue
        got_d = [d for _, d in got]
        exp_d = [d for _, d in exp]
        if got_d != exp_d:
            report.record(
                "distance-multiset", v,
                f"expected distances {exp_d}, got {got_d} (expected list {exp}, got {got})",
            )
            continue
        exp_by_obj = dict((o, d) for o, d in exp)
        threshold = exp_d[-1]
        full = None
        for o, d in got:
            if o not in objects:
                report.record("membership", v, f"entry ({o},{d}) is not an object")
                break
            true_d = exp_by_obj.get(o)
            if true_d is None:
                # Tie substitution: only legal at the k-th distance, and
                # the substituted object must truly sit there.
                if full is None:
                    full = dijkstra_sssp(net, v)
                if d != threshold or full[o] != d:
                    report.record(
                        "membership", v,
                        f"entry ({o},{d}) not a valid tie substitute "
                        f"(true distance {full[o]}, k-th distance {threshold})",
                    )
                    break
            elif true_d != d:
                report.record(
                    "distance", v,
                    f"entry ({o},{d}) has true distance {true_d}",
                )
                break
    return report


def verify_index_members(net: RoadNetwork, index: KnnIndex,
                         report: VerificationReport, sample: int = 0,
                         seed: int = 0) -> None:
    """Spot-check stored member distances with per-pair Dijkstra runs.

    Complements verify_index's multiset check on instances where tie
    substitution occurred; expensive, so callers choose a sample size.
    """
    if sample <= 0:
        return
    rng = random.Random(seed)
    n = net.n
    for _ in range(sample):
        v = rng.randrange(n)
        if not index.lists[v]:
            continue
        o, d = rng.choice(index.lists[v])
        true_d = dijkstra_sssp(net, v)[o]
        report.checked += 1
        if true_d != d:
            report.record("distance", v, f"entry ({o},{d}) has true distance {true_d}")


def _targeted_distances(net: RoadNetwork, source: int,
                        targets: list[int]) -> dict[int, int]:
    """Dijkstra from source, stopped once all targets settle."""
    remaining = set(targets)
    dist = [INFINITY] * net.n
    dist[source] = 0
    heap = [(0, source)]
    out = {}
    adj = net.adj
    while heap and remaining:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u in remaining:
            remaining.discard(u)
            out[u] = d
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return out


def verify_bn_graph(net: RoadNetwork, bn: BnGraph, pair_samples: int = 1000,
                    seed: int = 0) -> VerificationReport:
    """Check the three defining laws of the pruned graph.

    (1) same vertex set as the base graph; (2) every surviving edge
    weight equals the true distance between its endpoints (checked for
    all edges); (3) pairwise distances are preserved, checked on all
    pairs when n <= 200 and on sampled pairs otherwise.
    """
    report = VerificationReport()
    if bn.n != net.n:
        report.record("vertex-set", -1, f"graph has {net.n} vertices, pruned graph {bn.n}")
        report.checked += 1
        return report
    report.checked += 1

    for u in range(net.n):
        targets = [v for v, _ in bn.adj[u] if v > u]
        if not targets:
            continue
        true = _targeted_distances(net, u, targets)
        for v, w in bn.adj[u]:
            if v < u:
                continue
            report.checked += 1
            td = true.get(v, INFINITY)
            if td != w:
                report.record(
                    "edge-weight", u,
                    f"edge ({u},{v}) weight {w} but true distance {td}",
                )

    n = net.n
    if n <= 200:
        base = floyd_warshall(net)
        pruned_net = RoadNetwork(bn.n, bn.adj, bn.edge_count())
        pruned = floyd_warshall(pruned_net)
        report.checked += n * n
        if not np.array_equal(base, pruned):
            bad = np.argwhere(base != pruned)
            u, v = (int(x) for x in bad[0])
            report.violation_count += int(len(bad))
            report.violations.append(Violation(
                "pair-distance", u,
                f"dist({u},{v}) is {base[u, v]:.0f} in graph but {pruned[u, v]:.0f} in pruned graph",
            ))
    else:
        rng = random.Random(seed)
        sources = max(1, min(32, pair_samples // 32))
        per_source = max(1, -(-pair_samples // sources))
        for _ in range(sources):
            s = rng.randrange(n)
            base_d = dijkstra_sssp(net, s)
            bn_d = _sssp_adjacency(bn.adj, bn.n, s)
            for _ in range(per_source):
                t = rng.randrange(n)
                report.checked += 1
                if base_d[t] != bn_d[t]:
                    report.record(
                        "pair-distance", s,
                        f"dist({s},{t}) is {base_d[t]} in graph but {bn_d[t]} in pruned graph",
                    )
    return report
