"""Vertex ordering and bridge-neighbor-preserved graph construction.

The construction runs in two passes over a working copy of the road
network:

1. Elimination / augmentation. Vertices are ranked one at a time; the
   next rank always goes to the unprocessed vertex with the fewest
   unprocessed neighbors in the evolving graph (ties to the smallest
   id). When a vertex is ranked, every pair of its unprocessed
   neighbors is connected by an edge carrying the through-weight, or
   relaxed if the edge already exists. The rank assignment is therefore
   fused with the augmentation; asking for the order alone still runs
   the full pass.

2. Pruning. Vertices are revisited in decreasing rank. For a vertex w
   and higher-ranked neighbors u, v: if routing w->v->u beats the edge
   (w,u), the edge weight is lowered to the detour length and the edge
   is marked. Updates are applied immediately so later checks in the
   same pass observe them; marked edges are dropped only at the end.

The surviving adjacency is the bridge neighbor set of each vertex:
every remaining edge weight equals the true shortest-path distance,
and all pairwise distances are preserved.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .graph import RoadNetwork


@dataclass(frozen=True)
class VertexOrder:
    """Bijective rank assignment over vertices.

    rank[v] is the elimination rank of v in [0, n); by_rank is the
    inverse permutation (by_rank[rank[v]] == v).
    """

    rank: list[int]
    by_rank: list[int]

    def __post_init__(self):
        assert all(self.by_rank[self.rank[v]] == v for v in range(len(self.rank)))


@dataclass
class BuildStats:
    """Structural statistics of one BN-graph construction.

    rho: maximum vertex degree in the augmented graph right after the
    insertion pass. tau: max |higher-rank bridge neighbors| over all
    vertices. tau_prime: max |bridge neighbors|. eta: max size of the
    ascending-reachable vertex set, filled in lazily because computing
    it costs the very sweep the bidirectional builder avoids.
    """

    rho: int = 0
    tau: int = 0
    tau_prime: int = 0
    eta: Optional[int] = None
    edges_inserted: int = 0
    edges_removed: int = 0


class AugmentedGraph:
    """Intermediate product of the elimination pass (pre-pruning)."""

    __slots__ = ("n", "adj", "order", "stats")

    def __init__(self, n, adj, order, stats):
        self.n = n
        self.adj = adj  # list of dict neighbor -> weight
        self.order = order
        self.stats = stats


class BnGraph:
    """Bridge-neighbor-preserved augmentation of a road network.

    adj[v] holds (neighbor, weight) pairs sorted by neighbor id, where
    every weight equals the true shortest-path distance in the base
    graph. bns_lower / bns_higher split the neighbors by rank relative
    to v and carry the edge weight alongside to spare lookups in the
    hot construction loops.
    """

    __slots__ = ("base", "n", "adj", "bns_lower", "bns_higher", "order", "stats")

    def __init__(self, base, n, adj, bns_lower, bns_higher, order, stats):
        self.base = base
        self.n = n
        self.adj = adj
        self.bns_lower = bns_lower
        self.bns_higher = bns_higher
        self.order = order
        self.stats = stats

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def ascending_reach_size(self, u: int) -> int:
        """Number of vertices reachable from u along strictly rank-increasing edges."""
        rank = self.order.rank
        seen = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            rx = rank[x]
            for y, _ in self.adj[x]:
                if rank[y] > rx and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen)

    def compute_eta(self) -> int:
        """Fill stats.eta (max ascending-reach size over all vertices)."""
        if self.stats.eta is None:
            self.stats.eta = max(
                self.ascending_reach_size(v) for v in range(self.n)
            ) if self.n else 0
        return self.stats.eta

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BnGraph)
            and self.n == other.n
            and self.adj == other.adj
            and self.order.rank == other.order.rank
        )


def eliminate_and_augment(net: RoadNetwork) -> tuple[VertexOrder, AugmentedGraph]:
    """Rank all vertices and insert the through-edges (insertion pass).

    For each vertex w in increasing rank, every pair of higher-rank
    (equivalently: unprocessed) neighbors u, v becomes connected; a
    missing edge (u,v) is inserted with weight w(u,w) + w(w,v), an
    existing one is relaxed to the minimum. Records rho.
    """
    n = net.n
    adj: list[dict[int, int]] = [dict(net.adj[v]) for v in range(n)]
    unproc = [len(adj[v]) for v in range(n)]
    processed = bytearray(n)
    heap = [(unproc[v], v) for v in range(n)]
    heapq.heapify(heap)
    rank = [0] * n
    by_rank = []
    stats = BuildStats()
    inserted = 0

    for step in range(n):
        while True:
            cnt, w = heapq.heappop(heap)
            if not processed[w] and cnt == unproc[w]:
                break
        processed[w] = 1
        rank[w] = step
        by_rank.append(w)
        adj_w = adj[w]
        nbrs = sorted(u for u in adj_w if not processed[u])
        for u in nbrs:
            unproc[u] -= 1
        for i, u in enumerate(nbrs):
            adj_u = adj[u]
            wu = adj_w[u]
            for v in nbrs[i + 1 :]:
                through = wu + adj_w[v]
                cur = adj_u.get(v)
                if cur is None:
                    adj_u[v] = through
                    adj[v][u] = through
                    unproc[u] += 1
                    unproc[v] += 1
                    inserted += 1
                elif through < cur:
                    adj_u[v] = through
                    adj[v][u] = through
        for u in nbrs:
            heapq.heappush(heap, (unproc[u], u))

    stats.edges_inserted = inserted
    stats.rho = max((len(adj[v]) for v in range(n)), default=0)
    order = VertexOrder(rank, by_rank)
    return order, AugmentedGraph(n, adj, order, stats)


def compute_order(net: RoadNetwork) -> VertexOrder:
    """Compute the elimination order alone (runs the fused pass, drops the graph)."""
    order, _ = eliminate_and_augment(net)
    return order


def prune_to_bn_graph(aug: AugmentedGraph, order: VertexOrder) -> BnGraph:
    """Deletion pass: drop edges dominated by two-hop detours through
    higher-ranked neighbors, then split the survivors by rank.

    Weight updates are applied the moment they are found, so later pair
    checks (for the same vertex and for lower-ranked ones) see them;
    marked edges stay readable until the final removal. Consumes the
    augmented graph (its adjacency is modified in place).
    """
    n = aug.n
    rank = order.rank
    adj = aug.adj
    marked: set[tuple[int, int]] = set()

    for w in reversed(order.by_rank):
        rw = rank[w]
        adj_w = adj[w]
        nbrs = sorted(u for u in adj_w if rank[u] > rw)
        for u in nbrs:
            best = adj_w[u]
            changed = False
            for v in nbrs:
                if v == u:
                    continue
                detour = adj_w[v] + adj[v][u]
                if detour < best:
                    best = detour
                    changed = True
            if changed:
                adj_w[u] = best
                adj[u][w] = best
                marked.add((w, u) if w < u else (u, w))

    for u, v in marked:
        del adj[u][v]
        del adj[v][u]

    stats = aug.stats
    stats.edges_removed = len(marked)

    pruned: list[list[tuple[int, int]]] = []
    bns_lower: list[list[tuple[int, int]]] = []
    bns_higher: list[list[tuple[int, int]]] = []
    tau = 0
    tau_prime = 0
    for v in range(n):
        entries = sorted(adj[v].items())
        pruned.append(entries)
        rv = rank[v]
        lo = [(u, w) for u, w in entries if rank[u] < rv]
        hi = [(u, w) for u, w in entries if rank[u] > rv]
        bns_lower.append(lo)
        bns_higher.append(hi)
        tau = max(tau, len(hi))
        tau_prime = max(tau_prime, len(entries))
    stats.tau = tau
    stats.tau_prime = tau_prime

    return BnGraph(None, n, pruned, bns_lower, bns_higher, order, stats)


def build_bn_graph(net: RoadNetwork) -> tuple[VertexOrder, BnGraph]:
    """Full construction: elimination/augmentation followed by pruning."""
    order, aug = eliminate_and_augment(net)
    bn = prune_to_bn_graph(aug, order)
    bn.base = net
    return order, bn
