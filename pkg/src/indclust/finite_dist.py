"""Exact information quantities for explicit finite joint distributions.

This is the known-distribution setting: the joint pmf of all variables is
available, so entropies and mutual informations are computed exactly (up to
floating point). It doubles as the correctness yardstick for the clustering
algorithms via :func:`brute_force_finest`.
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import CapacityError, IntegrityError, Partition, ValidationError, normalize_parts

DEFAULT_CAP = 2**24
ZERO_TOL = 1e-9
MAX_BRUTE_FORCE_N = 10


@dataclass(frozen=True, eq=False)
class FiniteJoint:
    """Joint pmf over N finite-valued variables, stored as an N-d array."""

    pmf: np.ndarray

    def __post_init__(self):
        p = np.array(self.pmf, dtype=float, copy=True)
        if p.ndim < 1:
            raise ValidationError("pmf must have at least one axis")
        if np.any(p < 0):
            raise ValidationError("pmf has negative entries")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError(f"pmf sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "pmf", p)
        object.__setattr__(self, "_cache", {})

    @classmethod
    def from_table(cls, alphabet_sizes: Sequence[int], outcomes: Iterable[tuple[Sequence[int], float]],
                   cap: int = DEFAULT_CAP) -> "FiniteJoint":
        sizes = tuple(int(a) for a in alphabet_sizes)
        if not sizes or any(a < 1 for a in sizes):
            raise ValidationError("alphabet sizes must be positive")
        check_capacity(sizes, cap)
        p = np.zeros(sizes)
        for outcome, prob in outcomes:
            outcome = tuple(int(v) for v in outcome)
            if len(outcome) != len(sizes) or any(not 0 <= v < a for v, a in zip(outcome, sizes)):
                raise ValidationError(f"outcome {outcome} outside alphabet {sizes}")
            p[outcome] += prob
        return cls(p)

    @property
    def N(self) -> int:
        return self.pmf.ndim

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.pmf.shape

    def marginal(self, subset: Iterable[int]) -> np.ndarray:
        keep = sorted(set(subset))
        for i in keep:
            if not 0 <= i < self.N:
                raise ValidationError(f"variable index {i} out of range")
        drop = tuple(i for i in range(self.N) if i not in keep)
        return self.pmf.sum(axis=drop) if drop else self.pmf


def check_capacity(sizes: Sequence[int], cap: int = DEFAULT_CAP) -> None:
    total = 1
    for a in sizes:
        total *= a
    if total > cap:
        raise CapacityError(f"product alphabet {total} exceeds cap {cap}")


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(d: FiniteJoint, subset: Iterable[int]) -> float:
    """Shannon entropy in bits of the marginal on ``subset`` (0 for the empty set)."""
    key = frozenset(int(i) for i in subset)
    if not key:
        return 0.0
    cache = d._cache
    if key not in cache:
        cache[key] = _h(d.marginal(key))
    return cache[key]


def mutual_information(d: FiniteJoint, A: Iterable[int], B: Iterable[int]) -> float:
    A, B = normalize_parts([A, B])
    if not A or not B:
        return 0.0
    return max(0.0, entropy(d, A) + entropy(d, B) - entropy(d, A | B))


def multi_information(d: FiniteJoint, parts: Iterable[Iterable[int]]) -> float:
    """Sum of part entropies minus the joint entropy; zero iff the parts are independent."""
    parts = [p for p in normalize_parts(parts) if p]
    if not parts:
        raise ValidationError("multi_information needs a nonempty union")
    union = frozenset().union(*parts)
    value = sum(entropy(d, p) for p in parts) - entropy(d, union)
    return max(0.0, value)


def exact_oracle_compare(d: FiniteJoint, A, B, C, D) -> bool:
    """Is I(A,B) > I(C,D)? Differences within ``ZERO_TOL`` count as equal."""
    return mutual_information(d, A, B) > mutual_information(d, C, D) + ZERO_TOL


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of ``range(n)`` as restricted growth strings."""
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(a)
            return
        for v in range(top + 2):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    a[0] = 0
    yield from rec(1, 0)


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    return sum(1 for _ in set_partitions(n))


def brute_force_finest(d: FiniteJoint, max_n: int = MAX_BRUTE_FORCE_N) -> Partition:
    """Exhaustively find the finest partition into mutually independent blocks."""
    if d.N > max_n:
        raise CapacityError(f"brute force limited to N <= {max_n}, got {d.N}")
    best: list[Partition] = []
    best_k = 0
    for rgs in set_partitions(d.N):
        k = max(rgs) + 1
        if k < best_k:
            continue
        p = Partition(rgs)
        if multi_information(d, p.blocks) >= ZERO_TOL:
            continue
        if k > best_k:
            best, best_k = [p], k
        else:
            best.append(p)
    if len(best) != 1:
        shown = [b.as_lists(one_based=True) for b in best]
        raise IntegrityError(f"finest independent partition is not unique: {shown}")
    return best[0]


def parity_distribution(group_sizes: Sequence[int], cap: int = DEFAULT_CAP) -> FiniteJoint:
    """Independent groups of g-1 fair bits followed by their XOR."""
    if not group_sizes or any(g < 2 for g in group_sizes):
        raise ValidationError("every parity group needs at least 2 variables")
    check_capacity([2] * sum(group_sizes), cap)
    pmf = np.ones(())
    for g in group_sizes:
        table = np.zeros((2,) * g)
        for bits in itertools.product((0, 1), repeat=g - 1):
            table[bits + (sum(bits) % 2,)] = 1.0 / 2 ** (g - 1)
        pmf = np.multiply.outer(pmf, table)
    return FiniteJoint(pmf)


def product_joint(factors: Sequence[np.ndarray], order: Sequence[int] | None = None,
                  cap: int = DEFAULT_CAP) -> FiniteJoint:
    """Independent product of factor tables, axes optionally permuted by ``order``."""
    check_capacity([a for f in factors for a in np.shape(f)], cap)
    pmf = np.ones(())
    for f in factors:
        pmf = np.multiply.outer(pmf, np.asarray(f, dtype=float))
    if order is not None:
        pmf = np.transpose(pmf, order)
    return FiniteJoint(pmf / pmf.sum())


def random_structured_joint(rng: np.random.Generator, N: int, max_alphabet: int = 3):
    """Random joint with a planted ground truth; returns ``(joint, partition)``.

    Variables are split into random groups. Each group of size >= 2 is either a
    parity group or a generic (Dirichlet) joint table; singletons get random
    marginals. Axis order is shuffled so groups are not contiguous.
    """
    labels = list(rng.integers(0, N, size=N))
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    group_list = list(groups.values())
    factors = []
    for g in group_list:
        size = len(g)
        if size >= 2 and rng.random() < 0.5:
            factors.append(parity_distribution([size]).pmf)
        else:
            shape = tuple(int(a) for a in rng.integers(2, max_alphabet + 1, size=size))
            factors.append(rng.dirichlet(np.full(int(np.prod(shape)), 0.7)).reshape(shape))
    # axes of the product appear group by group; map them back to variable ids
    flat = [i for g in group_list for i in g]
    order = [flat.index(v) for v in range(N)]
    truth = Partition.from_blocks(group_list, N)
    return product_joint(factors, order), truth


def dumps(d: FiniteJoint) -> str:
    """Text form: an ``alphabet`` header then one ``outcome... probability`` line per atom."""
    out = io.StringIO()
    out.write("alphabet " + " ".join(str(a) for a in d.alphabet_sizes) + "\n")
    for idx in zip(*np.nonzero(d.pmf)):
        out.write(" ".join(str(int(v)) for v in idx) + f" {float(d.pmf[idx])!r}\n")
    return out.getvalue()


def loads(text: str, cap: int = DEFAULT_CAP) -> FiniteJoint:
    sizes = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if sizes is None:
            if fields[0] != "alphabet":
                raise ValidationError(f"line {lineno}: expected 'alphabet' header")
            try:
                sizes = [int(v) for v in fields[1:]]
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: bad alphabet size") from exc
            continue
        if len(fields) != len(sizes) + 1:
            raise ValidationError(f"line {lineno}: expected {len(sizes)} symbols and a probability")
        try:
            rows.append(([int(v) for v in fields[:-1]], float(fields[-1])))
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
    if sizes is None:
        raise ValidationError("empty distribution file")
    return FiniteJoint.from_table(sizes, rows, cap=cap)
