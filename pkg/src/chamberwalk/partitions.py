"""Ordered set partitions of ``{1..n}`` and their braid sign vectors.

An ordered partition is a tuple of frozensets listed top block first. In the
braid arrangement the block order is the coordinate order read from the top:
cards in earlier blocks have larger coordinates, so for ``i < j`` the sign on
the hyperplane ``x_i = x_j`` is ``+`` when ``i`` sits in an earlier block.
"""
from __future__ import annotations

from itertools import combinations
from typing import Iterator, Sequence

from .errors import StructuralError

OrderedSetPartition = tuple[frozenset[int], ...]


def braid_pairs(n: int) -> list[tuple[int, int]]:
    """Hyperplane index order: pairs ``(i, j)``, ``i < j``, lexicographic."""
    return list(combinations(range(1, n + 1), 2))


def check_partition(blocks: Sequence, n: int) -> OrderedSetPartition:
    out = tuple(frozenset(b) for b in blocks)
    seen: set[int] = set()
    for b in out:
        if not b:
            raise StructuralError("ordered set partition has an empty block")
        if seen & b:
            raise StructuralError("blocks of an ordered set partition overlap")
        seen |= b
    if seen != set(range(1, n + 1)):
        raise StructuralError(f"blocks do not cover 1..{n}")
    return out


def ordered_set_partitions(items: Sequence[int]) -> Iterator[OrderedSetPartition]:
    """All ordered set partitions of ``items`` (ordered Bell number many)."""
    items = list(items)
    if not items:
        yield ()
        return
    n = len(items)
    for mask in range(1, 1 << n):
        top = frozenset(items[k] for k in range(n) if mask >> k & 1)
        remaining = [x for x in items if x not in top]
        for tail in ordered_set_partitions(remaining):
            yield (top,) + tail


def partition_signs(blocks: OrderedSetPartition, n: int) -> tuple[int, ...]:
    where = {}
    for k, b in enumerate(blocks):
        for x in b:
            where[x] = k
    out = []
    for i, j in braid_pairs(n):
        bi, bj = where[i], where[j]
        out.append(1 if bi < bj else -1 if bi > bj else 0)
    return tuple(out)


def signs_to_partition(signs: Sequence[int], n: int) -> OrderedSetPartition:
    """Inverse of :func:`partition_signs`; raises if the signs are not a face."""
    above = {x: 0 for x in range(1, n + 1)}
    equal = {x: {x} for x in range(1, n + 1)}
    for (i, j), s in zip(braid_pairs(n), signs):
        if s == 1:
            above[j] += 1
        elif s == -1:
            above[i] += 1
        else:
            equal[i].add(j)
            equal[j].add(i)
    blocks: dict[frozenset[int], int] = {}
    for x in range(1, n + 1):
        blocks[frozenset(equal[x])] = above[x]
    ordered = tuple(b for b, _ in sorted(blocks.items(), key=lambda kv: kv[1]))
    if partition_signs(ordered, n) != tuple(signs):
        raise StructuralError("sign vector is not an ordered set partition")
    return ordered


def refine(f: OrderedSetPartition, g: OrderedSetPartition) -> OrderedSetPartition:
    """Braid face product: blocks ``B_i & C_j`` in lexicographic ``(i, j)`` order."""
    return tuple(b & c for b in f for c in g if b & c)


def permutation_blocks(order: Sequence[int]) -> OrderedSetPartition:
    """Chamber of a deck read top to bottom."""
    return tuple(frozenset([x]) for x in order)


def partition_to_str(blocks: OrderedSetPartition) -> str:
    return "".join("{" + ",".join(map(str, sorted(b))) + "}" for b in blocks)
