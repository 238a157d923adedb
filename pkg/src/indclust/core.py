"""Shared data model: series sets, partitions, weights and run configuration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class ValidationError(ValueError):
    """Malformed input data or arguments."""


class CapacityError(RuntimeError):
    """A configured size cap would be exceeded."""


class IntegrityError(RuntimeError):
    """An internal consistency check failed (tolerance or oracle trouble)."""


class InconsistentOracleError(IntegrityError):
    """A splitting loop exceeded its iteration guard."""


@dataclass(frozen=True)
class SeriesSet:
    """N aligned real-valued sequences of common length n.

    ``data`` is stored as a read-only ``(N, n)`` float array.
    """

    data: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.array(self.data, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("series data must be a non-empty (N, n) array")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("series contain NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        names = tuple(self.names) or tuple(f"x{i + 1}" for i in range(arr.shape[0]))
        if len(names) != arr.shape[0]:
            raise ValidationError(f"expected {arr.shape[0]} names, got {len(names)}")
        if len(set(names)) != len(names):
            raise ValidationError("series names must be unique")
        object.__setattr__(self, "names", names)

    @classmethod
    def from_series(cls, series: Sequence[Sequence[float]], names: Iterable[str] = ()):
        lengths = {len(s) for s in series}
        if len(lengths) > 1:
            raise ValidationError(f"series lengths differ: {sorted(lengths)}")
        return cls(np.asarray(series, dtype=float), tuple(names))

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.N


@dataclass(frozen=True)
class Partition:
    """Assignment of series indices to cluster labels.

    Indices are 0-based internally; ``assignment[i]`` is the label of series
    ``i``. Labels must be exactly ``0..k-1`` with no gaps.
    """

    assignment: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(v) for v in self.assignment)
        if not a:
            raise ValidationError("partition must cover at least one index")
        used = set(a)
        if used != set(range(len(used))):
            raise ValidationError(f"labels must be 0..k-1 without gaps, got {sorted(used)}")
        object.__setattr__(self, "assignment", a)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], N: int | None = None) -> "Partition":
        blocks = [sorted(set(b)) for b in blocks]
        members = [i for b in blocks for i in b]
        if any(not b for b in blocks):
            raise ValidationError("empty block")
        if len(members) != len(set(members)):
            raise ValidationError("blocks overlap")
        N = len(members) if N is None else N
        if sorted(members) != list(range(N)):
            raise ValidationError("blocks must cover 0..N-1 exactly")
        assignment = [0] * N
        for label, b in enumerate(blocks):
            for i in b:
                assignment[i] = label
        return canonicalize(cls(tuple(assignment)))

    @property
    def N(self) -> int:
        return len(self.assignment)

    @property
    def k(self) -> int:
        return max(self.assignment) + 1

    @property
    def blocks(self) -> list[frozenset[int]]:
        out: dict[int, set[int]] = {}
        for i, lab in enumerate(self.assignment):
            out.setdefault(lab, set()).add(i)
        return [frozenset(out[lab]) for lab in sorted(out, key=lambda lab: min(out[lab]))]

    def as_lists(self, one_based: bool = False) -> list[list[int]]:
        off = 1 if one_based else 0
        return [sorted(i + off for i in b) for b in self.blocks]


def canonicalize(p: Partition) -> Partition:
    """Relabel clusters in order of their smallest member."""
    mapping: dict[int, int] = {}
    for lab in p.assignment:
        if lab not in mapping:
            mapping[lab] = len(mapping)
    return Partition(tuple(mapping[lab] for lab in p.assignment))


def is_refinement(p1: Partition, p2: Partition) -> bool:
    """True iff every cluster of ``p1`` lies inside a cluster of ``p2``."""
    if p1.N != p2.N:
        raise ValidationError(f"partitions over different sizes: {p1.N} vs {p2.N}")
    target: dict[int, int] = {}
    for a, b in zip(p1.assignment, p2.assignment):
        if target.setdefault(a, b) != b:
            return False
    return True


def weight(j: int) -> float:
    """Summable weight 1/(j(j+1))."""
    if j < 1:
        raise ValidationError(f"weight index must be >= 1, got {j}")
    return 1.0 / (j * (j + 1))


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by the estimators, tests and clustering drivers.

    ``m_max``/``l_max`` cap block length and quantization level on top of the
    automatic ``floor(log2 n)`` truncation; ``None`` means no extra cap.
    """

    m_max: int | None = None
    l_max: int | None = None
    seed: int = 0
    alpha: float = 0.05
    threshold_c: float = 1.0
    permutation_count: int = 200
    threads: int = 1

    def __post_init__(self):
        for name in ("m_max", "l_max"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValidationError(f"{name} must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        if self.threshold_c <= 0:
            raise ValidationError("threshold_c must be positive")
        if self.permutation_count < 1:
            raise ValidationError("permutation_count must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ValidationError("threads must be positive")


def normalize_parts(parts: Iterable[Iterable[int]]) -> list[frozenset[int]]:
    """Convert to frozensets and check pairwise disjointness."""
    out = [frozenset(int(i) for i in p) for p in parts]
    seen: set[int] = set()
    for p in out:
        if seen & p:
            raise ValidationError(f"parts overlap on {sorted(seen & p)}")
        seen |= p
    return out
