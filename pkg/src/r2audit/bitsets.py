"""Bitmask helpers for subset enumeration over small feature universes."""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator


def mask_of(indices: Iterable[int]) -> int:
    """Pack feature indices into a bitmask."""
    mask = 0
    for i in indices:
        if i < 0:
            raise ValueError(f"negative feature index {i}")
        mask |= 1 << i
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    """Unpack a bitmask into sorted feature indices."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def iter_submasks(mask: int) -> Iterator[int]:
    """Yield every submask of ``mask`` in ascending order (includes 0 and mask)."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def masks_of_size(universe: Iterable[int], size: int) -> Iterator[int]:
    """Yield masks of all ``size``-subsets of ``universe`` in lexicographic order."""
    for combo in combinations(tuple(universe), size):
        yield mask_of(combo)
