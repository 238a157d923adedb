"""Empirical information estimates over quantized sliding blocks.

The central quantity is the empirical sum-information

    I_n(parts) = sum_{m<=M} w_m/m sum_{l<=L} w_l/l [ sum_i h(part_i) - h(all parts) ]

where ``h`` is the plug-in entropy of level-l quantized m-blocks counted over
overlapping windows. Cells of a multi-series block are the tuple of per-series
cells. Entropies are computed incrementally in ``l``: the level-(l+1) labels
refine the level-l labels by one bit per series, so each level costs a
bincount over the already-dense labels instead of a fresh sort.
"""
from __future__ import annotations

import bz2
import lzma
import threading
import zlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numba import njit

from .core import IntegrityError, RunConfig, SeriesSet, ValidationError, normalize_parts, weight
from .quantizer import MAX_BITS, QuantizerSpec, bits_per_coordinate, dyadic_codes, fit_normalizer

TERM_TOL = 1e-12


@dataclass
class FrequencyTable:
    counts: dict[tuple, int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise IntegrityError("frequency counts do not sum to total")


@dataclass
class SumInfoBreakdown:
    value: float
    terms: np.ndarray  # weighted (m, l) contributions, shape (M, L)
    m_used: int
    l_used: int


class EstimatorBudget:
    """Thread-safe counter of sum-information requests."""

    def __init__(self):
        self._calls = 0
        self._lock = threading.Lock()

    def tick(self, k: int = 1) -> None:
        with self._lock:
            self._calls += k

    @property
    def calls(self) -> int:
        return self._calls


def truncation(n: int, cfg: RunConfig) -> tuple[int, int]:
    """Block-length and level caps: ``floor(log2 n)`` (at least 1), further capped by cfg."""
    base = max(1, int(np.floor(np.log2(n)))) if n >= 2 else 1
    M = min(base, cfg.m_max) if cfg.m_max else base
    L = min(base, cfg.l_max) if cfg.l_max else base
    return min(M, n), min(L, MAX_BITS)


def block_frequencies(s: SeriesSet, subset: Iterable[int], m: int, l: int,
                      q: QuantizerSpec | None = None) -> FrequencyTable:
    """Counts of per-series level-l cell tuples over overlapping m-windows."""
    subset = sorted(set(subset))
    if not subset:
        raise ValidationError("subset must be nonempty")
    if not 1 <= m <= s.n:
        raise ValidationError(f"block length {m} outside [1, {s.n}]")
    q = q or fit_normalizer(s)
    v = q.normalize(s)
    depths = bits_per_coordinate(m, l)
    W = s.n - m + 1
    columns = []
    for i in subset:
        for c, b in enumerate(depths):
            columns.append(dyadic_codes(v[i, c:c + W], b))
    keys = zip(*columns)
    counts = Counter(tuple(int(x) for x in key) for key in keys)
    return FrequencyTable(dict(counts), W)


def empirical_entropy(f: FrequencyTable) -> float:
    """Plug-in entropy in bits, no small-count correction."""
    if f.total < 1 or not f.counts:
        raise ValidationError("empty frequency table")
    c = np.fromiter(f.counts.values(), dtype=float)
    return _entropy_from_counts(c, f.total)


def _entropy_from_counts(c: np.ndarray, total: int) -> float:
    c = c[c > 0]
    return float(np.log2(total) - (c * np.log2(c)).sum() / total)


class _BitPlanes:
    """Binary digits of the normalized samples of one series, shape ``(depth, n)``."""

    def __init__(self, values: np.ndarray, depth: int):
        codes = dyadic_codes(values, depth)
        shifts = np.arange(depth - 1, -1, -1, dtype=np.int64)[:, None]
        self.planes = ((codes[None, :] >> shifts) & 1).astype(np.uint8)
        # a digit adds nothing if it is constant or repeats the previous digit
        # of the same coordinate, which is always already part of the label
        self.redundant = np.array([
            bool(np.all(p == p[0])) or (k > 0 and bool(np.array_equal(p, self.planes[k - 1])))
            for k, p in enumerate(self.planes)
        ], dtype=np.bool_)

    def rolled(self, offset: int) -> "_BitPlanes":
        clone = object.__new__(_BitPlanes)
        clone.planes = np.roll(self.planes, offset, axis=1)
        clone.redundant = self.redundant
        return clone


@njit(cache=True)
def _chain_kernel(planes, redundant, m, L, W):
    S = planes.shape[0]
    labels = np.zeros(W, dtype=np.int64)
    remap = np.full(2 * W + 2, -1, dtype=np.int64)
    counts = np.zeros(W + 1, dtype=np.int64)
    out = np.empty(L)
    h = 0.0
    size = 1
    for l in range(1, L + 1):
        c = (l - 1) % m
        k = (l - 1) // m
        changed = False
        for s in range(S):
            if redundant[s, k]:
                continue
            nxt = 0
            for t in range(W):
                x = labels[t] * 2 + planes[s, k, c + t]
                r = remap[x]
                if r < 0:
                    r = nxt
                    remap[x] = r
                    nxt += 1
                labels[t] = r
            for x in range(2 * size):
                remap[x] = -1
            size = nxt
            changed = True
        if changed:
            for j in range(size):
                counts[j] = 0
            for t in range(W):
                counts[labels[t]] += 1
            acc = 0.0
            for j in range(size):
                cj = counts[j]
                if cj > 0:
                    acc += cj * np.log2(cj)
            h = np.log2(W) - acc / W
        out[l - 1] = h
    return out


def _entropy_table(planes: Sequence[_BitPlanes], M: int, L: int, n: int, threads: int = 1) -> np.ndarray:
    """``(M, L)`` entropies of level-l quantized m-blocks of the joint series in ``planes``."""
    stacked = np.ascontiguousarray(np.stack([bp.planes for bp in planes]))
    redundant = np.stack([bp.redundant for bp in planes])

    def row(m):
        return _chain_kernel(stacked, redundant, m, L, n - m + 1)

    if threads > 1 and M > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(row, range(1, M + 1)))
    else:
        rows = [row(m) for m in range(1, M + 1)]
    return np.vstack(rows)


def level_weights(M: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    wm = np.array([weight(m) / m for m in range(1, M + 1)])
    wl = np.array([weight(l) / l for l in range(1, L + 1)])
    return wm, wl


class SumInformation:
    """Empirical sum-information evaluator bound to one sample.

    Entropy chains are cached per subset of series, so repeated queries that
    share parts (as the clustering searches do) only pay for new subsets.
    """

    def __init__(self, s: SeriesSet, cfg: RunConfig | None = None, q: QuantizerSpec | None = None):
        self.s = s
        self.cfg = cfg or RunConfig()
        if s.n < 2:
            raise ValidationError("sum-information needs n >= 2")
        self.q = q or fit_normalizer(s)
        self.M, self.L = truncation(s.n, self.cfg)
        depth = self.L  # m = 1 uses the most digits per coordinate
        values = self.q.normalize(s)
        self._planes = [_BitPlanes(values[i], depth) for i in range(s.N)]
        self._cache: dict[frozenset[int], np.ndarray] = {}
        self._lock = threading.Lock()
        self.budget = EstimatorBudget()
        self.wm, self.wl = level_weights(self.M, self.L)

    @property
    def calls(self) -> int:
        return self.budget.calls

    def entropies(self, subset: frozenset[int] | None, planes: Sequence[_BitPlanes] | None = None) -> np.ndarray:
        """``(M, L)`` table of plug-in block entropies of the joint subset.

        Passing explicit ``planes`` (e.g. shifted copies) bypasses the cache.
        """
        cacheable = planes is None
        if cacheable:
            with self._lock:
                hit = self._cache.get(subset)
            if hit is not None:
                return hit
            planes = [self._planes[i] for i in sorted(subset)]
        table = _entropy_table(planes, self.M, self.L, self.s.n, self.cfg.threads)
        if cacheable:
            with self._lock:
                table = self._cache.setdefault(subset, table)
        return table

    def breakdown(self, parts: Iterable[Iterable[int]], count: bool = True) -> SumInfoBreakdown:
        parts = [p for p in normalize_parts(parts) if p]
        for p in parts:
            for i in p:
                if not 0 <= i < self.s.N:
                    raise ValidationError(f"series index {i} out of range")
        if count:
            self.budget.tick()
        if len(parts) < 2:
            return SumInfoBreakdown(0.0, np.zeros((self.M, self.L)), self.M, self.L)
        # canonical part order makes the float sum independent of how parts were listed
        parts.sort(key=min)
        union = frozenset().union(*parts)
        raw = sum(self.entropies(p) for p in parts) - self.entropies(union)
        return self._assemble(raw, len(union))

    def _assemble(self, raw: np.ndarray, n_series: int) -> SumInfoBreakdown:
        if raw.min() < -TERM_TOL * max(1.0, float(np.abs(raw).max())):
            raise IntegrityError(f"negative multi-information term {raw.min()!r}")
        # plug-in multi-information per (m, l) is at most n_series * l bits
        scaled = raw / np.arange(1, self.L + 1)[None, :]
        if scaled.max() > n_series + 1e-9:
            raise IntegrityError("multi-information term exceeds its bound")
        terms = np.clip(raw, 0.0, None) * self.wm[:, None] * self.wl[None, :]
        # fixed summation order keeps results bit-identical across runs
        value = float(sum(float(t) for t in terms.ravel()))
        return SumInfoBreakdown(value, terms, self.M, self.L)

    def __call__(self, parts: Iterable[Iterable[int]]) -> float:
        return self.breakdown(parts).value

    def shifted(self, parts: Sequence[frozenset[int]], shift_part: int, offset: int) -> float:
        """Sum-information with every series of ``parts[shift_part]`` circularly shifted."""
        shifted_planes = {i: self._planes[i].rolled(offset) for i in parts[shift_part]}
        plane_of = lambda i: shifted_planes.get(i, self._planes[i])  # noqa: E731
        tables = []
        for j, p in enumerate(parts):
            if j == shift_part:
                tables.append(self.entropies(None, [plane_of(i) for i in sorted(p)]))
            else:
                tables.append(self.entropies(p))
        union = sorted(frozenset().union(*parts))
        joint = _entropy_table([plane_of(i) for i in union], self.M, self.L, self.s.n, self.cfg.threads)
        return self._assemble(sum(tables) - joint, len(union)).value


def sum_information(s: SeriesSet, parts: Iterable[Iterable[int]], cfg: RunConfig | None = None,
                    q: QuantizerSpec | None = None) -> SumInfoBreakdown:
    return SumInformation(s, cfg, q).breakdown(parts)


def threshold(n: int, cfg: RunConfig) -> float:
    """Decision margin ``c * n**(-1/3)`` for comparing two estimates."""
    return cfg.threshold_c * n ** (-1.0 / 3.0)


def thresholded_compare(est: SumInformation, C: Iterable[int], R: Iterable[int], x: int) -> bool:
    """Does dropping ``x`` from R lower the estimate of I(C;R) by more than the margin?"""
    C, R = normalize_parts([C, R])
    if x not in R:
        raise ValidationError(f"{x} is not in R")
    if not C:
        return False
    gap = est([C, R]) - est([C, R - {x}])
    return gap > threshold(est.s.n, est.cfg)


def _test_rng(cfg: RunConfig, C: frozenset[int], R: frozenset[int]) -> np.random.Generator:
    key = [len(C), *sorted(C), *sorted(R)]
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=key))


def shift_surrogate_stats(est: SumInformation, C: Iterable[int], R: Iterable[int]):
    """Observed statistic and its circular-shift surrogate distribution."""
    C, R = normalize_parts([C, R])
    n = est.s.n
    if n < 8:
        raise ValidationError("shift test needs n >= 8")
    if not C or not R:
        raise ValidationError("shift test needs nonempty C and R")
    t0 = est([C, R])
    rng = _test_rng(est.cfg, C, R)
    offsets = rng.integers(n // 4, 3 * n // 4, endpoint=True, size=est.cfg.permutation_count)
    surrogates = np.array([est.shifted([C, R], 1, int(u)) for u in offsets])
    return t0, surrogates


def shift_independence_test(est: SumInformation, C: Iterable[int], R: Iterable[int]) -> bool:
    """True ("dependent") iff the observed estimate exceeds the (1 - alpha) surrogate quantile."""
    t0, surrogates = shift_surrogate_stats(est, C, R)
    return bool(t0 > np.quantile(surrogates, 1.0 - est.cfg.alpha))


COMPRESSORS: dict[str, Callable[[bytes], int]] = {
    "zlib": lambda b: len(zlib.compress(b, 9)),
    "bz2": lambda b: len(bz2.compress(b, 9)),
    "lzma": lambda b: len(lzma.compress(b, preset=9 | lzma.PRESET_EXTREME)),
}


def get_compressor(name: str) -> Callable[[bytes], int]:
    try:
        return COMPRESSORS[name]
    except KeyError:
        raise ValidationError(f"unknown compressor {name!r}; choose from {sorted(COMPRESSORS)}") from None


def compression_sum_rate(s: SeriesSet, parts: Iterable[Iterable[int]],
                         compressor: Callable[[bytes], int] | str = "lzma", level: int = 1,
                         q: QuantizerSpec | None = None) -> float:
    """Compression-based information-rate estimate in bits.

    Each series is quantized to ``level`` binary digits (one byte per symbol).
    The result is the sum of compressed part lengths minus the compressed length
    of all parts interleaved per time step; it can be negative.
    """
    if not 1 <= level <= 8:
        raise ValidationError("compression level must lie in [1, 8]")
    if isinstance(compressor, str):
        compressor = get_compressor(compressor)
    parts = [sorted(p) for p in normalize_parts(parts) if p]
    q = q or fit_normalizer(s)
    symbols = dyadic_codes(q.normalize(s), level).astype(np.uint8)
    if len(parts) < 2:
        return 0.0
    total = sum(compressor(symbols[p].T.tobytes()) for p in parts)
    union = [i for p in parts for i in p]
    joint = compressor(symbols[union].T.tobytes())
    return 8.0 * (total - joint)
