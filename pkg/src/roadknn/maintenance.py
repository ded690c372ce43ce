"""Incremental index maintenance under object insertion and deletion.

Both operations run a frontier search over bridge-neighbor edges from
the updated object, admitting a vertex when the update can possibly
change its list. The frontier is label-correcting: a vertex whose
tentative distance improves after it was first expanded is re-queued,
so final distances are exact even when the first admission happened
through a detour. (A single-visit frontier can lock in overestimates
and then wrongly skip vertices whose admission test depends on the
exact distance.)

Insertion then splices the new object into every admitted list at its
exact distance. Deletion removes the object and refills each admitted
list from its bridge neighbors' lists, processing in decreasing rank
so higher-ranked lists are final when read; because lower-ranked
neighbors may still be mid-update at that point (and the stored
descending partial lists may be stale or may never have held the
needed entry at all), a repair sweep afterwards re-merges the affected
lists until nothing changes. The sweep is a no-op whenever the first
pass already got everything right.

Updates take exclusive access to the index and the object set; no
queries may run concurrently. The descending partial lists are never
maintained; they are flagged stale after the first update.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .bngraph import BnGraph
from .builders import KnnIndex, PartialKnn, _top_k
from .errors import UnknownVertexError, UpdateError
from .graph import INFINITY, ObjectSet


@dataclass
class UpdateReport:
    """What one insert/delete touched.

    affected_count is the number of vertices whose lists changed;
    frontier_visits counts neighbor inspections from first-time
    expansions (requeues are tallied separately); admission_order
    records the order vertices entered the frontier, for locality
    checks.
    """

    operation: str
    affected_count: int
    frontier_visits: int
    requeue_visits: int = 0
    candidate_touches: int = 0
    repair_merges: int = 0
    admission_order: list[int] = field(default_factory=list)


def _check_vertex(bn: BnGraph, u: int) -> None:
    if not (0 <= u < bn.n):
        raise UnknownVertexError(f"vertex {u} outside [0,{bn.n})")


def insert_object(bn: BnGraph, index: KnnIndex, objects: ObjectSet, u: int,
                  partial: Optional[PartialKnn] = None) -> UpdateReport:
    """Add object u and update every list it now belongs in.

    A vertex v is affected exactly when the new object lands strictly
    inside v's current k-th distance (a tie with the k-th leaves the
    distance multiset unchanged, so such lists are left alone). Lists
    shorter than k always accept the new object.
    """
    _check_vertex(bn, u)
    if u in objects:
        raise UpdateError(f"object {u} is already in the candidate set")
    lists = index.lists
    k = index.k
    adj = bn.adj

    dist = {u: 0}
    affected = {u}
    admission_order = [u]
    queue = deque([u])
    in_queue = {u}
    expanded = set()
    visits = 0
    requeue_visits = 0

    while queue:
        w = queue.popleft()
        in_queue.discard(w)
        first = w not in expanded
        expanded.add(w)
        dw = dist[w]
        for v, phi in adj[w]:
            if first:
                visits += 1
            else:
                requeue_visits += 1
            nd = dw + phi
            cur = dist.get(v, INFINITY)
            if nd >= cur:
                continue
            dist[v] = nd
            if v not in affected:
                lst = lists[v]
                threshold = lst[-1][1] if len(lst) >= k else INFINITY
                if nd < threshold:
                    affected.add(v)
                    admission_order.append(v)
                    if v not in in_queue:
                        queue.append(v)
                        in_queue.add(v)
            else:
                # Already admitted: the improved bound must flow onward.
                if v not in in_queue:
                    queue.append(v)
                    in_queue.add(v)

    for v in affected:
        lst = lists[v]
        if len(lst) >= k:
            lst.pop()
        d = dist[v]
        pos = len(lst)
        for i, (o_i, d_i) in enumerate(lst):
            if (d, u) < (d_i, o_i):
                pos = i
                break
        lst.insert(pos, (u, d))

    objects.add(u)
    index.object_count = objects.size
    if partial is not None:
        partial.stale = True
    return UpdateReport(
        operation="insert",
        affected_count=len(affected),
        frontier_visits=visits,
        requeue_visits=requeue_visits,
        admission_order=admission_order,
    )


def _contains_object(lst, u: int) -> bool:
    for o, _ in lst:
        if o == u:
            return True
    return False


def _merge_list(bn: BnGraph, lists, v: int, u: int, target: int,
                partial: Optional[PartialKnn], report: UpdateReport):
    """Best target-length list for v from its own entries plus all
    bridge neighbors' current entries (and valid descending partials).

    Neighbor entries are shifted by the connecting edge weight; every
    shifted value is the length of a real walk, so it can only
    overestimate, never underestimate. The deleted object is skipped.
    """
    best = {o: d for o, d in lists[v] if o != u}
    touches = 0
    for w, phi in bn.adj[v]:
        for o, d in lists[w]:
            touches += 1
            if o == u:
                continue
            nd = phi + d
            cur = best.get(o)
            if cur is None or nd < cur:
                best[o] = nd
    if partial is not None and not partial.stale:
        for o, d in partial.lists[v]:
            touches += 1
            if o == u:
                continue
            cur = best.get(o)
            if cur is None or d < cur:
                best[o] = d
    report.candidate_touches += touches
    return _top_k(best, target)


def delete_object(bn: BnGraph, index: KnnIndex, objects: ObjectSet, u: int,
                  partial: Optional[PartialKnn] = None) -> UpdateReport:
    """Remove object u and refill every list that contained it.

    The frontier forwards through any vertex whose k-th distance is at
    least the tentative distance to u (ties included: a vertex can sit
    exactly at the boundary without holding u, yet still lie on the
    only path to vertices that do hold it). Only vertices whose lists
    actually contain u count as affected and get rewritten.
    """
    _check_vertex(bn, u)
    if u not in objects:
        raise UpdateError(f"object {u} is not in the candidate set")
    if objects.size < 2:
        raise UpdateError("cannot delete the last object")
    lists = index.lists
    adj = bn.adj
    rank = bn.order.rank

    dist = {u: 0}
    forwarded = {u}
    affected = [u] if _contains_object(lists[u], u) else []
    affected_set = set(affected)
    admission_order = [u]
    queue = deque([u])
    in_queue = {u}
    expanded = set()
    visits = 0
    requeue_visits = 0

    while queue:
        w = queue.popleft()
        in_queue.discard(w)
        first = w not in expanded
        expanded.add(w)
        dw = dist[w]
        for v, phi in adj[w]:
            if first:
                visits += 1
            else:
                requeue_visits += 1
            nd = dw + phi
            cur = dist.get(v, INFINITY)
            if nd >= cur:
                continue
            dist[v] = nd
            if v not in forwarded:
                lst = lists[v]
                threshold = lst[-1][1]
                if nd <= threshold:
                    forwarded.add(v)
                    admission_order.append(v)
                    if _contains_object(lst, u):
                        affected.append(v)
                        affected_set.add(v)
                    if v not in in_queue:
                        queue.append(v)
                        in_queue.add(v)
            else:
                if v not in in_queue:
                    queue.append(v)
                    in_queue.add(v)

    objects.discard(u)
    target = min(index.k, objects.size)
    report = UpdateReport(
        operation="delete",
        affected_count=len(affected),
        frontier_visits=visits,
        requeue_visits=requeue_visits,
        admission_order=admission_order,
    )

    # First pass: decreasing rank, so higher-ranked lists are final
    # when a vertex reads them.
    for v in sorted(affected, key=lambda x: -rank[x]):
        lists[v] = _merge_list(bn, lists, v, u, target, partial, report)

    # Repair sweep to a fixpoint. The first pass can miss a
    # replacement that only becomes visible once a lower-ranked
    # neighbor has its own replacement in place.
    queue = deque(sorted(affected, key=lambda x: rank[x]))
    in_queue = set(queue)
    while queue:
        v = queue.popleft()
        in_queue.discard(v)
        merged = _merge_list(bn, lists, v, u, target, partial, report)
        if merged != lists[v]:
            lists[v] = merged
            report.repair_merges += 1
            for w, _ in adj[v]:
                if w in affected_set and w not in in_queue:
                    queue.append(w)
                    in_queue.add(w)

    index.object_count = objects.size
    if partial is not None:
        partial.stale = True
    return report
