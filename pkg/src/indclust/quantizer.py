"""Nested dyadic partitions of m-blocks into 2**l cells.

Level-l cells of an m-block are formed by round-robin bit interleaving: bit
``j`` (1-based) of the cell index is bit ``ceil(j/m)`` of the binary expansion
of coordinate ``((j-1) mod m) + 1``. Dropping the last bit of a level-(l+1)
index gives the level-l index, so the cell families are nested in ``l``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import SeriesSet, ValidationError

# Finest binary resolution kept per sample; levels beyond this are rejected.
MAX_BITS = 52


@dataclass(frozen=True)
class QuantizerSpec:
    """Per-series affine normalization bounds."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValidationError("lo/hi length mismatch")
        for a, b in zip(self.lo, self.hi):
            if not a < b:
                raise ValidationError(f"normalizer needs lo < hi, got ({a}, {b})")

    def normalize(self, s: SeriesSet) -> np.ndarray:
        """Map each series into [0, 1], clamping values outside the fitted range."""
        if s.N != len(self.lo):
            raise ValidationError(f"quantizer fitted for {len(self.lo)} series, got {s.N}")
        lo = np.asarray(self.lo)[:, None]
        hi = np.asarray(self.hi)[:, None]
        return np.clip((s.data - lo) / (hi - lo), 0.0, 1.0)


def fit_normalizer(s: SeriesSet) -> QuantizerSpec:
    lo = s.data.min(axis=1)
    hi = s.data.max(axis=1)
    hi = np.where(hi > lo, hi, lo + 1.0)
    return QuantizerSpec(tuple(float(v) for v in lo), tuple(float(v) for v in hi))


def dyadic_codes(values: np.ndarray, bits: int) -> np.ndarray:
    """``floor(v * 2**bits)`` with v clamped to [0, 1] and the top cell closed."""
    if not 0 <= bits <= MAX_BITS:
        raise ValidationError(f"bits must lie in [0, {MAX_BITS}]")
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    top = (1 << bits) - 1
    return np.minimum(np.floor(v * float(1 << bits)).astype(np.int64), top)


def bits_per_coordinate(m: int, l: int) -> list[int]:
    """How many leading binary digits of each of the m coordinates a level-l cell uses."""
    return [len(range(c, l + 1, m)) for c in range(1, m + 1)]


def cell_index(block: Sequence[float], l: int) -> int:
    """Index in ``[0, 2**l)`` of the level-l cell containing ``block``."""
    m = len(block)
    if m < 1:
        raise ValidationError("block must have at least one coordinate")
    if l < 0:
        raise ValidationError("level must be non-negative")
    if l == 0:
        return 0
    depth = -(-l // m)
    codes = [int(c) for c in dyadic_codes(np.asarray(block, dtype=float), depth)]
    index = 0
    for j in range(1, l + 1):
        coord = (j - 1) % m
        digit = -(-j // m)  # which binary digit of that coordinate
        bit = (codes[coord] >> (depth - digit)) & 1
        index = (index << 1) | bit
    return index
