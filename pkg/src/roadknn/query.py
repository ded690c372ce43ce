"""Query processing: O(k) retrieval and progressive iteration.

Both paths only ever read the stored per-vertex list; the number of
entries touched is counted on the index so tests can pin the contract
exactly (min(k', stored length) touches, independent of graph size).
"""

from __future__ import annotations

from typing import Iterator

from .builders import KnnIndex, KnnList
from .errors import QueryParameterError, UnknownVertexError


def knn_query(index: KnnIndex, u: int, k_prime: int) -> KnnList:
    """First min(k', stored length) entries of u's list.

    k' may be any value up to the k the index was built with; asking
    for more is a hard error rather than a silent slow fallback, and
    the fix is to rebuild with a larger k.
    """
    if not (0 <= u < index.n):
        raise UnknownVertexError(f"vertex {u} outside [0,{index.n})")
    if k_prime < 1:
        raise QueryParameterError(f"k'={k_prime} must be >= 1")
    if k_prime > index.k:
        raise QueryParameterError(
            f"k'={k_prime} exceeds the index's k={index.k}; "
            f"rebuild the index with k >= {k_prime}"
        )
    lst = index.lists[u]
    result = lst[:k_prime]
    index.touches += len(result)
    return result


def progressive_query(index: KnnIndex, u: int) -> Iterator[tuple[int, int]]:
    """Yield (object, distance) pairs in nondecreasing distance order.

    Each yield does constant work beyond the previous one; callers may
    stop at any point having paid only for what they consumed.
    """
    if not (0 <= u < index.n):
        raise UnknownVertexError(f"vertex {u} outside [0,{index.n})")
    lst = index.lists[u]
    for entry in lst:
        index.touches += 1
        yield entry
