"""Road-network model, DIMACS ingestion, synthetic generators, object sets.

Vertices are 0-based internally; every external format (DIMACS ``.gr``
arcs, object lists) is 1-based. Edge weights are positive integers on
input; path distances accumulate in plain Python ints and are serialized
as 64-bit unsigned values, so there is no floating-point comparison
anywhere in the package.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Iterable, Iterator

from .errors import GraphParseError, GraphStructureError, ObjectSetError

# Sentinel for "unreachable"; the maximum representable 64-bit distance.
# Finite distances are sums of at most n 32-bit weights with n < 2^31,
# so real values never collide with it.
INFINITY = (1 << 64) - 1


class RoadNetwork:
    """Undirected, connected, positive-integer-weighted graph.

    ``adj[v]`` is a list of ``(neighbor, weight)`` pairs sorted by
    neighbor id. Instances are immutable after construction and safe to
    share between threads.
    """

    __slots__ = ("n", "m", "adj")

    def __init__(self, n: int, adj: list[list[tuple[int, int]]], m: int):
        self.n = n
        self.adj = adj
        self.m = m

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "RoadNetwork":
        """Build and validate a network from (u, v, w) triples.

        Duplicate pairs collapse to the minimum weight. Raises
        GraphStructureError on self-loops, non-positive weights,
        out-of-range ids, or a disconnected result.
        """
        if n < 1:
            raise GraphStructureError("graph must have at least one vertex")
        best: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphStructureError(f"edge ({u},{v}) has a vertex outside [0,{n})")
            if u == v:
                raise GraphStructureError(f"self-loop at vertex {u}")
            if w < 1:
                raise GraphStructureError(f"edge ({u},{v}) has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            cur = best.get(key)
            if cur is None or w < cur:
                best[key] = w
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (u, v), w in best.items():
            adj[u].append((v, w))
            adj[v].append((u, w))
        for lst in adj:
            lst.sort()
        net = cls(n, adj, len(best))
        net._check_connected()
        return net

    def _check_connected(self) -> None:
        seen = bytearray(self.n)
        seen[0] = 1
        queue = deque([0])
        count = 1
        while queue:
            u = queue.popleft()
            for v, _ in self.adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    queue.append(v)
        if count != self.n:
            missing = seen.index(0)
            raise GraphStructureError(
                f"graph is disconnected: vertex {missing + 1} is unreachable from vertex 1"
            )

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Yield each undirected edge once as (u, v, w) with u < v."""
        for u in range(self.n):
            for v, w in self.adj[u]:
                if u < v:
                    yield u, v, w

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RoadNetwork)
            and self.n == other.n
            and self.m == other.m
            and self.adj == other.adj
        )

    def __repr__(self) -> str:
        return f"RoadNetwork(n={self.n}, m={self.m})"


def parse_dimacs_gr(text: str | bytes) -> RoadNetwork:
    """Parse a DIMACS 9th-challenge ``.gr`` file into a RoadNetwork.

    Reciprocal arc pairs merge into one undirected edge; duplicates keep
    the minimum weight. Ids shift to 0-based. The graph must be
    connected.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    n = None
    declared_m = None
    edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise GraphParseError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "sp":
                raise GraphParseError(f"expected 'p sp <n> <m>', got {line!r}", lineno)
            try:
                n = int(parts[2])
                declared_m = int(parts[3])
            except ValueError:
                raise GraphParseError(f"non-integer counts in {line!r}", lineno) from None
            if n < 1 or declared_m < 0:
                raise GraphParseError(f"invalid counts in {line!r}", lineno)
        elif parts[0] == "a":
            if n is None:
                raise GraphParseError("arc line before problem line", lineno)
            if len(parts) != 4:
                raise GraphParseError(f"expected 'a <u> <v> <w>', got {line!r}", lineno)
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphParseError(f"non-integer arc fields in {line!r}", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphParseError(f"vertex id out of range in {line!r}", lineno)
            if w < 1:
                raise GraphParseError(f"zero or negative weight in {line!r}", lineno)
            if u == v:
                raise GraphParseError(f"self-loop in {line!r}", lineno)
            edges.append((u - 1, v - 1, w))
        else:
            raise GraphParseError(f"unrecognized line {line!r}", lineno)
    if n is None:
        raise GraphParseError("missing problem line 'p sp <n> <m>'")
    return RoadNetwork.from_edges(n, edges)


def serialize_dimacs_gr(net: RoadNetwork) -> str:
    """Write a RoadNetwork back to ``.gr`` text (both arc directions).

    parse(serialize(g)) == g, byte-stable for a given network.
    """
    lines = [f"p sp {net.n} {2 * net.m}"]
    for u, v, w in net.edges():
        lines.append(f"a {u + 1} {v + 1} {w}")
        lines.append(f"a {v + 1} {u + 1} {w}")
    return "\n".join(lines) + "\n"


def generate_grid(
    rows: int, cols: int, weight_range: tuple[int, int], seed: int
) -> RoadNetwork:
    """rows x cols lattice with 4-neighborhood edges and seeded weights.

    Weights are drawn uniformly from the inclusive range in a fixed
    cell order (row-major; east edge before south edge), so the same
    seed always yields a bit-identical graph.
    """
    lo, hi = weight_range
    if rows < 1 or cols < 1:
        raise GraphStructureError("grid must have at least one row and column")
    if lo < 1 or hi < lo:
        raise GraphStructureError(f"invalid weight range [{lo},{hi}]")
    rng = random.Random(seed)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, rng.randint(lo, hi)))
            if r + 1 < rows:
                edges.append((v, v + cols, rng.randint(lo, hi)))
    n = rows * cols
    if n == 1:
        return RoadNetwork(1, [[]], 0)
    return RoadNetwork.from_edges(n, edges)


def generate_random_connected(
    n: int, extra_edges: int, weight_range: tuple[int, int], seed: int
) -> RoadNetwork:
    """Random spanning tree plus ``extra_edges`` distinct non-tree edges."""
    lo, hi = weight_range
    if n < 1:
        raise GraphStructureError("need at least one vertex")
    if lo < 1 or hi < lo:
        raise GraphStructureError(f"invalid weight range [{lo},{hi}]")
    max_extra = n * (n - 1) // 2 - (n - 1)
    if extra_edges < 0 or extra_edges > max_extra:
        raise GraphStructureError(
            f"extra_edges={extra_edges} outside [0, {max_extra}] for n={n}"
        )
    rng = random.Random(seed)
    if n == 1:
        return RoadNetwork(1, [[]], 0)
    present: set[tuple[int, int]] = set()
    edges = []
    for v in range(1, n):
        u = rng.randrange(v)
        present.add((u, v))
        edges.append((u, v, rng.randint(lo, hi)))
    added = 0
    while added < extra_edges:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in present:
            continue
        present.add(key)
        edges.append((key[0], key[1], rng.randint(lo, hi)))
        added += 1
    return RoadNetwork.from_edges(n, edges)


class ObjectSet:
    """Candidate objects as a vertex subset with O(1) membership.

    Reads are thread-safe once constructed. The maintenance module
    mutates the set through add/discard under its exclusive-writer
    contract; nothing else may.
    """

    __slots__ = ("_members",)

    def __init__(self, members: Iterable[int]):
        self._members = set(members)
        if not self._members:
            raise ObjectSetError("object set must be non-empty")

    @property
    def size(self) -> int:
        return len(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, v: int) -> bool:
        return v in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._members))

    def __eq__(self, other) -> bool:
        return isinstance(other, ObjectSet) and self._members == other._members

    def add(self, v: int) -> None:
        self._members.add(v)

    def discard(self, v: int) -> None:
        self._members.discard(v)

    def validate(self, net: RoadNetwork) -> None:
        for v in self._members:
            if not (0 <= v < net.n):
                raise ObjectSetError(f"object id {v + 1} outside graph with n={net.n}")

    def __repr__(self) -> str:
        return f"ObjectSet(size={len(self._members)})"


def sample_objects(net: RoadNetwork, density: float, seed: int) -> ObjectSet:
    """Uniformly sample max(1, round(density * n)) distinct vertices."""
    if not (0.0 < density <= 1.0):
        raise ObjectSetError(f"density must be in (0, 1], got {density}")
    count = max(1, int(density * net.n + 0.5))
    count = min(count, net.n)
    rng = random.Random(seed)
    members = rng.sample(range(net.n), count)
    return ObjectSet(members)


def load_objects(text: str, net: RoadNetwork) -> ObjectSet:
    """Parse an object list: one 1-based vertex id per line, ``#`` comments."""
    members = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = int(line)
        except ValueError:
            raise GraphParseError(f"expected a vertex id, got {line!r}", lineno) from None
        if not (1 <= v <= net.n):
            raise GraphParseError(f"vertex id {v} out of range [1,{net.n}]", lineno)
        members.add(v - 1)
    if not members:
        raise ObjectSetError("object list is empty")
    return ObjectSet(members)


def serialize_objects(objects: ObjectSet) -> str:
    """One 1-based id per line, ascending."""
    return "\n".join(str(v + 1) for v in objects) + "\n"
