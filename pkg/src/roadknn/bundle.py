"""Durable bundle format for a built index and everything around it.

Little-endian binary layout, bit-exact for a given bundle:

    magic    8 bytes  "KNNIDX1\\0"
    header   version u32, n u64, m u64 (base-graph undirected edges),
             k u32, object count u64, flags u32 (bit0 partial-stale,
             bit1 partial-present), graph fingerprint 32 bytes (sha256)
    sections in fixed order, each: payload length u64, blake2b-64
             checksum of the payload, payload
      order     n * rank u32
      bn-graph  per vertex: count u32, then (neighbor u32, weight u64)*
      objects   count u64, then sorted vertex ids u32*
      knn       per vertex: count u16, then (object u32, distance u64)*
      partial   same layout as knn (empty when absent)
      stats     eight u64 counters plus a one-byte algorithm code

Fixed-width fields make the total size a closed-form function of the
stored counts; predicted_size computes it so tests can pin the file
size exactly.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Optional

from .bngraph import BnGraph, BuildStats, VertexOrder
from .builders import IndexBuildStats, KnnIndex, PartialKnn
from .errors import (
    BundleFormatError,
    BundleIntegrityError,
    FingerprintMismatchError,
)
from .graph import ObjectSet, RoadNetwork

MAGIC = b"KNNIDX1\x00"
VERSION = 1
_HEADER = struct.Struct("<IQQIQI32s")
_SECTION_PREFIX = struct.Struct("<Q8s")
_STATS = struct.Struct("<8QB")
_ETA_NONE = (1 << 64) - 1

FLAG_PARTIAL_STALE = 1
FLAG_PARTIAL_PRESENT = 2

_ALGO_CODES = {"": 0, "bottomup": 1, "bidirectional": 2}
_ALGO_NAMES = {v: k for k, v in _ALGO_CODES.items()}


def graph_fingerprint(net: RoadNetwork) -> bytes:
    """Content hash of the graph (sha256 over the canonical edge list)."""
    h = hashlib.sha256()
    h.update(struct.pack("<QQ", net.n, net.m))
    for u, v, w in net.edges():
        h.update(struct.pack("<IIQ", u, v, w))
    return h.digest()


@dataclass
class Bundle:
    """Everything needed to serve and maintain queries for one graph."""

    fingerprint: bytes
    order: VertexOrder
    bn: BnGraph
    objects: ObjectSet
    index: KnnIndex
    partial: Optional[PartialKnn]
    base_edge_count: int = 0

    @property
    def n(self) -> int:
        return self.bn.n

    @property
    def k(self) -> int:
        return self.index.k

    def check_graph(self, net: RoadNetwork) -> None:
        got = graph_fingerprint(net)
        if got != self.fingerprint:
            raise FingerprintMismatchError(
                "bundle was built for a different graph "
                f"(expected {self.fingerprint.hex()[:16]}..., got {got.hex()[:16]}...)"
            )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bundle)
            and self.fingerprint == other.fingerprint
            and self.order.rank == other.order.rank
            and self.bn == other.bn
            and self.objects == other.objects
            and self.index == other.index
            and self.partial == other.partial
        )


def build_bundle(net: RoadNetwork, objects: ObjectSet, k: int,
                 algorithm: str = "bidirectional") -> Bundle:
    """Construct the full bundle from scratch with the chosen builder."""
    from .bngraph import build_bn_graph
    from .builders import (
        build_index_bidirectional,
        build_index_bottom_up,
        compute_partial_knn,
    )

    order, bn = build_bn_graph(net)
    partial = compute_partial_knn(bn, order, objects, k)
    if algorithm == "bidirectional":
        index = build_index_bidirectional(bn, order, partial, objects, k)
    elif algorithm == "bottomup":
        index = build_index_bottom_up(bn, order, objects, k)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return Bundle(graph_fingerprint(net), order, bn, objects, index, partial,
                  base_edge_count=net.m)


def _knn_payload(lists) -> bytes:
    parts = []
    for lst in lists:
        parts.append(struct.pack("<H", len(lst)))
        for o, d in lst:
            parts.append(struct.pack("<IQ", o, d))
    return b"".join(parts)


def _parse_knn_payload(payload: bytes, n: int):
    lists = []
    off = 0
    for _ in range(n):
        if off + 2 > len(payload):
            raise BundleFormatError("truncated knn list section")
        (count,) = struct.unpack_from("<H", payload, off)
        off += 2
        lst = []
        for _ in range(count):
            if off + 12 > len(payload):
                raise BundleFormatError("truncated knn list entry")
            o, d = struct.unpack_from("<IQ", payload, off)
            off += 12
            lst.append((o, d))
        lists.append(lst)
    if off != len(payload):
        raise BundleFormatError("trailing bytes in knn list section")
    return lists


def _section_bytes(payload: bytes) -> bytes:
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return _SECTION_PREFIX.pack(len(payload), digest) + payload


def save_bundle(path: str, bundle: Bundle) -> int:
    """Write the bundle; returns the number of bytes written."""
    flags = 0
    partial = bundle.partial
    if partial is not None:
        flags |= FLAG_PARTIAL_PRESENT
        if partial.stale:
            flags |= FLAG_PARTIAL_STALE

    order_payload = struct.pack(f"<{bundle.n}I", *bundle.order.rank) if bundle.n else b""
    bn_parts = []
    for v in range(bundle.n):
        entries = bundle.bn.adj[v]
        bn_parts.append(struct.pack("<I", len(entries)))
        for nbr, w in entries:
            bn_parts.append(struct.pack("<IQ", nbr, w))
    bn_payload = b"".join(bn_parts)
    members = sorted(bundle.objects)
    obj_payload = struct.pack("<Q", len(members)) + struct.pack(
        f"<{len(members)}I", *members
    )
    knn_payload = _knn_payload(bundle.index.lists)
    partial_payload = _knn_payload(partial.lists) if partial is not None else b""
    s = bundle.bn.stats
    bs = bundle.index.build_stats
    stats_payload = _STATS.pack(
        s.rho,
        s.tau,
        s.tau_prime,
        _ETA_NONE if s.eta is None else s.eta,
        s.edges_inserted,
        s.edges_removed,
        bs.sssp_invocations,
        bs.max_candidates,
        _ALGO_CODES.get(bs.algorithm, 0),
    )

    blob = bytearray()
    blob += MAGIC
    blob += _HEADER.pack(
        VERSION, bundle.n, bundle.base_edge_count, bundle.k, bundle.objects.size,
        flags, bundle.fingerprint,
    )
    for payload in (order_payload, bn_payload, obj_payload, knn_payload,
                    partial_payload, stats_payload):
        blob += _section_bytes(payload)
    data = bytes(blob)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def _read_section(data: bytes, off: int) -> tuple[bytes, int]:
    if off + _SECTION_PREFIX.size > len(data):
        raise BundleFormatError("truncated section header")
    length, digest = _SECTION_PREFIX.unpack_from(data, off)
    off += _SECTION_PREFIX.size
    if off + length > len(data):
        raise BundleFormatError("section payload extends past end of file")
    payload = data[off : off + length]
    if hashlib.blake2b(payload, digest_size=8).digest() != digest:
        raise BundleIntegrityError("section checksum mismatch")
    return payload, off + length


def load_bundle(path: str) -> Bundle:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + _HEADER.size:
        raise BundleFormatError("file too short to be a bundle")
    if data[: len(MAGIC)] != MAGIC:
        raise BundleFormatError("bad magic; not a bundle file")
    version, n, base_m, k, obj_count, flags, fingerprint = _HEADER.unpack_from(
        data, len(MAGIC)
    )
    if version != VERSION:
        raise BundleFormatError(f"unsupported bundle version {version}")
    off = len(MAGIC) + _HEADER.size
    order_payload, off = _read_section(data, off)
    bn_payload, off = _read_section(data, off)
    obj_payload, off = _read_section(data, off)
    knn_payload, off = _read_section(data, off)
    partial_payload, off = _read_section(data, off)
    stats_payload, off = _read_section(data, off)
    if off != len(data):
        raise BundleFormatError("trailing bytes after last section")

    if len(order_payload) != 4 * n:
        raise BundleFormatError("order section has wrong size")
    rank = list(struct.unpack(f"<{n}I", order_payload)) if n else []
    by_rank = [0] * n
    for v, r in enumerate(rank):
        if not (0 <= r < n):
            raise BundleFormatError("rank value out of range")
        by_rank[r] = v
    order = VertexOrder(rank, by_rank)

    adj = []
    pos = 0
    for _ in range(n):
        if pos + 4 > len(bn_payload):
            raise BundleFormatError("truncated adjacency section")
        (count,) = struct.unpack_from("<I", bn_payload, pos)
        pos += 4
        entries = []
        for _ in range(count):
            if pos + 12 > len(bn_payload):
                raise BundleFormatError("truncated adjacency entry")
            nbr, w = struct.unpack_from("<IQ", bn_payload, pos)
            pos += 12
            entries.append((nbr, w))
        adj.append(entries)
    if pos != len(bn_payload):
        raise BundleFormatError("trailing bytes in adjacency section")

    (member_count,) = struct.unpack_from("<Q", obj_payload, 0)
    expect = 8 + 4 * member_count
    if len(obj_payload) != expect:
        raise BundleFormatError("object section has wrong size")
    members = struct.unpack_from(f"<{member_count}I", obj_payload, 8)
    objects = ObjectSet(members)
    if objects.size != obj_count:
        raise BundleFormatError("object count disagrees with header")

    knn_lists = _parse_knn_payload(knn_payload, n)
    (rho, tau, tau_prime, eta, ins, rem, sssp, max_cand, algo) = _STATS.unpack(
        stats_payload
    )
    stats = BuildStats(
        rho=rho,
        tau=tau,
        tau_prime=tau_prime,
        eta=None if eta == _ETA_NONE else eta,
        edges_inserted=ins,
        edges_removed=rem,
    )

    bns_lower = []
    bns_higher = []
    for v in range(n):
        rv = rank[v]
        bns_lower.append([(u, w) for u, w in adj[v] if rank[u] < rv])
        bns_higher.append([(u, w) for u, w in adj[v] if rank[u] > rv])
    bn = BnGraph(None, n, adj, bns_lower, bns_higher, order, stats)

    build_stats = IndexBuildStats(
        sssp_invocations=sssp,
        max_candidates=max_cand,
        algorithm=_ALGO_NAMES.get(algo, ""),
    )
    index = KnnIndex(knn_lists, k, objects.size, build_stats)

    partial = None
    if flags & FLAG_PARTIAL_PRESENT:
        plists = _parse_knn_payload(partial_payload, n)
        partial = PartialKnn(plists, k, stale=bool(flags & FLAG_PARTIAL_STALE))
    elif partial_payload:
        raise BundleFormatError("partial section present but flag unset")

    return Bundle(fingerprint, order, bn, objects, index, partial,
                  base_edge_count=base_m)


def index_payload_bytes(index: KnnIndex) -> int:
    """Entry-payload size of the stored lists (the index-size statistic)."""
    return sum(2 + 12 * len(lst) for lst in index.lists)


def predicted_size(bundle: Bundle) -> int:
    """Closed-form byte size of save_bundle's output for this bundle."""
    n = bundle.n
    sec = _SECTION_PREFIX.size
    total = len(MAGIC) + _HEADER.size
    total += sec + 4 * n
    total += sec + sum(4 + 12 * len(bundle.bn.adj[v]) for v in range(n))
    total += sec + 8 + 4 * bundle.objects.size
    total += sec + index_payload_bytes(bundle.index)
    if bundle.partial is not None:
        total += sec + sum(2 + 12 * len(lst) for lst in bundle.partial.lists)
    else:
        total += sec
    total += sec + _STATS.size
    return total
