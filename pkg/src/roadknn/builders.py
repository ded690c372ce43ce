"""Index construction: descending partial kNN plus two full builders.

Every per-vertex result list is sorted by (distance, object id)
ascending; that tie-break is used consistently here, in the query
layer, in maintenance, and in the brute-force oracle, so the two
builders produce bit-identical lists, not merely equivalent ones.

The bottom-up builder materializes, for each vertex, the subgraph
reachable along strictly rank-increasing edges and runs one
label-setting shortest-path pass inside it (n passes total). The
bidirectional builder replaces all of that with a second sweep in
decreasing rank that reads already-final lists of higher-ranked
bridge neighbors; it performs zero shortest-path passes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .bngraph import BnGraph, VertexOrder
from .errors import UnknownVertexError
from .graph import ObjectSet

# A kNN list is a Python list of (object id, distance) tuples sorted by
# (distance, object id). Kept as plain tuples for speed.
KnnList = list[tuple[int, int]]


@dataclass
class IndexBuildStats:
    """Counters for a single builder run."""

    sssp_invocations: int = 0
    max_candidates: int = 0  # largest per-vertex candidate set seen
    algorithm: str = ""


class PartialKnn:
    """Per-vertex top-k objects under the descending-rank distance.

    lists[v] may be shorter than min(k, |M|): only objects reachable
    from v along strictly rank-decreasing edges appear. ``stale``
    flips to True once the index has been maintained in place, because
    updates do not touch this structure.
    """

    __slots__ = ("lists", "k", "stale")

    def __init__(self, lists: list[KnnList], k: int, stale: bool = False):
        self.lists = lists
        self.k = k
        self.stale = stale

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PartialKnn)
            and self.k == other.k
            and self.stale == other.stale
            and self.lists == other.lists
        )


class KnnIndex:
    """Per-vertex sorted (object, distance) lists of length min(k, |M|).

    Immutable for queries; the maintenance module mutates lists in
    place under an exclusive-writer contract. ``touches`` counts entry
    reads performed by the query layer (instrumentation for the O(k)
    contract; benign under the single-writer model).
    """

    __slots__ = ("lists", "k", "object_count", "build_stats", "touches")

    def __init__(self, lists: list[KnnList], k: int, object_count: int,
                 build_stats: Optional[IndexBuildStats] = None):
        self.lists = lists
        self.k = k
        self.object_count = object_count
        self.build_stats = build_stats or IndexBuildStats()
        self.touches = 0

    @property
    def n(self) -> int:
        return len(self.lists)

    def total_entries(self) -> int:
        return sum(len(lst) for lst in self.lists)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KnnIndex)
            and self.k == other.k
            and self.lists == other.lists
        )


def _top_k(best: dict[int, int], k: int) -> KnnList:
    """k smallest (distance, id) pairs out of an object -> distance map."""
    items = [(d, o) for o, d in best.items()]
    if len(items) > k:
        items = heapq.nsmallest(k, items)
    else:
        items.sort()
    return [(o, d) for d, o in items]


def compute_partial_knn(bn: BnGraph, order: VertexOrder, objects: ObjectSet,
                        k: int) -> PartialKnn:
    """Sweep vertices in increasing rank, merging lower-rank neighbor lists.

    For each vertex u the candidate pool is u itself (when it is an
    object, at distance 0) plus every entry of every lower-rank bridge
    neighbor's list, shifted by the connecting edge weight; the k
    smallest under (distance, id) survive.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = bn.n
    lists: list[Optional[KnnList]] = [None] * n
    bns_lower = bn.bns_lower
    for u in order.by_rank:
        best: dict[int, int] = {}
        if u in objects:
            best[u] = 0
        for w, phi in bns_lower[u]:
            for o, d in lists[w]:
                nd = phi + d
                cur = best.get(o)
                if cur is None or nd < cur:
                    best[o] = nd
        lists[u] = _top_k(best, k)
    return PartialKnn(lists, k)


class IncreasingSubgraph:
    """Vertices and edges reachable from a root along rank-increasing paths.

    The edge set is the full induced adjacency on the reachable
    vertices: any edge between two reachable vertices lies on some
    rank-increasing path from the root (its lower-ranked endpoint is
    reachable), so "induced" and "union of monotone paths" coincide.
    """

    __slots__ = ("root", "vertices", "adj")

    def __init__(self, root: int, vertices: list[int], adj: dict[int, list[tuple[int, int]]]):
        self.root = root
        self.vertices = vertices
        self.adj = adj

    def __len__(self) -> int:
        return len(self.vertices)


def build_increasing_subgraph(bn: BnGraph, u: int) -> IncreasingSubgraph:
    """Monotone BFS from u following only edges toward higher ranks."""
    if not (0 <= u < bn.n):
        raise UnknownVertexError(f"vertex {u} outside [0,{bn.n})")
    rank = bn.order.rank
    seen = {u}
    queue = [u]
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        rx = rank[x]
        for y, _ in bn.adj[x]:
            if rank[y] > rx and y not in seen:
                seen.add(y)
                queue.append(y)
    adj = {}
    for x in queue:
        adj[x] = [(y, w) for y, w in bn.adj[x] if y in seen]
    return IncreasingSubgraph(u, queue, adj)


def sssp_on_subgraph(sub: IncreasingSubgraph, source: int,
                     stats: Optional[IndexBuildStats] = None) -> dict[int, int]:
    """Exact single-source distances inside the subgraph (binary heap)."""
    if source not in sub.adj:
        raise UnknownVertexError(f"source {source} not in subgraph")
    if stats is not None:
        stats.sssp_invocations += 1
    dist = {source: 0}
    heap = [(0, source)]
    settled = set()
    adj = sub.adj
    while heap:
        d, x = heapq.heappop(heap)
        if x in settled:
            continue
        settled.add(x)
        for y, w in adj[x]:
            nd = d + w
            cur = dist.get(y)
            if cur is None or nd < cur:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def build_index_bottom_up(bn: BnGraph, order: VertexOrder, objects: ObjectSet,
                          k: int) -> KnnIndex:
    """Full index via per-vertex ascending subgraphs (one SSSP each).

    For every vertex u: candidates are the partial lists of every
    vertex w in u's ascending subgraph, shifted by the exact in-subgraph
    distance u -> w. Subgraph distances equal true distances because
    the pruned graph preserves them.
    """
    stats = IndexBuildStats(algorithm="bottomup")
    partial = compute_partial_knn(bn, order, objects, k)
    plists = partial.lists
    n = bn.n
    lists: list[Optional[KnnList]] = [None] * n
    for u in order.by_rank:
        sub = build_increasing_subgraph(bn, u)
        dist = sssp_on_subgraph(sub, u, stats)
        best: dict[int, int] = {}
        for w in sub.vertices:
            dw = dist[w]
            for o, d in plists[w]:
                nd = dw + d
                cur = best.get(o)
                if cur is None or nd < cur:
                    best[o] = nd
        if len(best) > stats.max_candidates:
            stats.max_candidates = len(best)
        lists[u] = _top_k(best, k)
    return KnnIndex(lists, k, objects.size, stats)


def build_index_bidirectional(bn: BnGraph, order: VertexOrder,
                              partial: PartialKnn, objects: ObjectSet,
                              k: int) -> KnnIndex:
    """Full index via a decreasing-rank sweep over final neighbor lists.

    For every vertex u (highest rank first): candidates are u's own
    partial list plus the already-final lists of higher-rank bridge
    neighbors, shifted by the connecting edge weight. No shortest-path
    pass is ever run.
    """
    if partial.k != k:
        raise ValueError(f"partial lists built for k={partial.k}, asked for k={k}")
    stats = IndexBuildStats(algorithm="bidirectional")
    plists = partial.lists
    n = bn.n
    lists: list[Optional[KnnList]] = [None] * n
    bns_higher = bn.bns_higher
    for u in reversed(order.by_rank):
        best: dict[int, int] = dict(
            (o, d) for o, d in plists[u]
        )
        for w, phi in bns_higher[u]:
            for o, d in lists[w]:
                nd = phi + d
                cur = best.get(o)
                if cur is None or nd < cur:
                    best[o] = nd
        if len(best) > stats.max_candidates:
            stats.max_candidates = len(best)
        lists[u] = _top_k(best, k)
    return KnnIndex(lists, k, objects.size, stats)
