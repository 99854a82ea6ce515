"""Small bitmask helpers for node sets (node v <-> bit v)."""

from __future__ import annotations

from typing import Iterable, Sequence


def mask_of(nodes: Iterable[int]) -> int:
    mask = 0
    for v in nodes:
        mask |= 1 << v
    return mask


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def component(adjacency: Sequence[int], start: int, avail: int) -> int:
    """Bitmask of the connected component of ``start`` within ``avail``."""
    comp = 0
    frontier = (1 << start) & avail
    while frontier:
        comp |= frontier
        grown = 0
        m = frontier
        while m:
            low = m & -m
            grown |= adjacency[low.bit_length() - 1]
            m ^= low
        frontier = grown & avail & ~comp
    return comp


def lex_less(a: int, b: int) -> bool:
    """Order node sets by their sorted tuples: {1,3} < {2}, {1} < {1,2}."""
    if a == b:
        return False
    low = (a ^ b) & -(a ^ b)
    if a & low:
        return (b >> low.bit_length()) != 0  # b continues above, so a is smaller
    return (a >> low.bit_length()) == 0  # a is a strict prefix of b
