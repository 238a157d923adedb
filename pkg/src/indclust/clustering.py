"""Independence clustering drivers.

``clin`` recursively splits a set in two using an oracle that compares mutual
informations; it needs no cluster count but relies on being able to tell zero
from non-zero. ``clink`` only compares sum-information estimates, enumerates
candidate partitions built from greedy split chains and returns the one with
the smallest estimate; it needs the number of clusters ``k``.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (InconsistentOracleError, IntegrityError, Partition, RunConfig, SeriesSet,
                   ValidationError, normalize_parts)
from .estimators import (EstimatorBudget, SumInformation, level_weights, shift_independence_test,
                         threshold)
from .finite_dist import ZERO_TOL, FiniteJoint, multi_information, mutual_information

Block = frozenset

# --------------------------------------------------------------------------
# oracles for clin


class DependenceOracle:
    """Answers "is I(A,B) > I(C,D)?" and "is I(A,B) > 0?" and counts the calls."""

    def __init__(self):
        self.calls = 0

    def compare(self, A, B, C, D) -> bool:
        self.calls += 1
        return self._compare(*normalize_parts([A, B]), *normalize_parts([C, D]))

    def is_positive(self, A, B) -> bool:
        self.calls += 1
        A, B = normalize_parts([A, B])
        if not A or not B:
            return False
        return self._is_positive(A, B)

    def _compare(self, A, B, C, D) -> bool:
        raise NotImplementedError

    def _is_positive(self, A, B) -> bool:
        raise NotImplementedError


class ExactOracle(DependenceOracle):
    def __init__(self, d: FiniteJoint):
        super().__init__()
        self.d = d

    def _compare(self, A, B, C, D):
        return mutual_information(self.d, A, B) > mutual_information(self.d, C, D) + ZERO_TOL

    def _is_positive(self, A, B):
        return mutual_information(self.d, A, B) > ZERO_TOL


class PluginOracle(DependenceOracle):
    """Sample-based oracle: thresholded estimate differences and a shift-surrogate test."""

    def __init__(self, est: SumInformation):
        super().__init__()
        self.est = est
        self.margin = threshold(est.s.n, est.cfg)

    def _compare(self, A, B, C, D):
        return self.est([A, B]) - self.est([C, D]) > self.margin

    def _is_positive(self, A, B):
        return shift_independence_test(self.est, A, B)


class FickleOracle(DependenceOracle):
    """Exact answers on strict inequalities, adversarial (seeded coin) on ties."""

    def __init__(self, info: Callable[[Block, Block], float], policy_seed: int, tol: float = ZERO_TOL):
        super().__init__()
        self.info = info
        self.tol = tol
        self.rng = np.random.default_rng(policy_seed)
        self.ties = 0

    def _coin(self) -> bool:
        self.ties += 1
        return bool(self.rng.integers(2))

    def _compare(self, A, B, C, D):
        a, b = self.info(A, B), self.info(C, D)
        if abs(a - b) > self.tol:
            return a > b
        return self._coin()

    def _is_positive(self, A, B):
        v = self.info(A, B)
        if v > self.tol:
            return True
        return self._coin()


def make_fickle(source, policy_seed: int, tol: float = ZERO_TOL) -> FickleOracle:
    """Fickle oracle over a FiniteJoint or any ``(A, B) -> information`` callable."""
    if isinstance(source, FiniteJoint):
        d = source
        return FickleOracle(lambda A, B: mutual_information(d, A, B), policy_seed, tol)
    if callable(source):
        return FickleOracle(source, policy_seed, tol)
    raise ValidationError("make_fickle needs a FiniteJoint or a callable of two index sets")


# --------------------------------------------------------------------------
# sum-information evaluators for clink


class SumInfoEvaluator:
    """Callable ``parts -> value`` with a call budget and an ordering rule.

    ``greater`` is the only way the search compares two values, so swapping it
    for an adversarial rule turns any evaluator into a fickle oracle.
    """

    def __init__(self):
        self.budget = EstimatorBudget()

    @property
    def calls(self) -> int:
        return self.budget.calls

    def __call__(self, parts) -> float:
        self.budget.tick()
        return self.value(parts)

    def value(self, parts) -> float:
        raise NotImplementedError

    def greater(self, a: float, b: float) -> bool:
        return a > b


class EmpiricalEvaluator(SumInfoEvaluator):
    """Wraps :class:`SumInformation` (which already counts its own calls)."""

    def __init__(self, est: SumInformation):
        self.est = est
        self.budget = est.budget

    def __call__(self, parts) -> float:
        return self.est(parts)


class BinaryExactEvaluator(SumInfoEvaluator):
    """Exact sum-information of binary-valued processes.

    With values in {0, 1}, the level-l cell of an m-block is determined by the
    first ``min(l, m)`` time steps, so every term reduces to the multi-information
    of that many consecutive steps, supplied by ``block_info(parts, t)``.
    """

    def __init__(self, block_info: Callable[[list[Block], int], float], M: int, L: int):
        super().__init__()
        self.block_info = block_info
        self.M, self.L = M, L
        self.wm, self.wl = level_weights(M, L)
        self._memo: dict = {}

    def value(self, parts) -> float:
        parts = [p for p in normalize_parts(parts) if p]
        if len(parts) < 2:
            return 0.0
        key = frozenset(parts)
        if key not in self._memo:
            per_t = {t: self.block_info(parts, t) for t in range(1, max(self.M, self.L) + 1)}
            total = 0.0
            for m in range(1, self.M + 1):
                for l in range(1, self.L + 1):
                    total += self.wm[m - 1] * self.wl[l - 1] * per_t[min(l, m)]
            self._memo[key] = total
        return self._memo[key]


def iid_binary_evaluator(d: FiniteJoint, M: int, L: int) -> BinaryExactEvaluator:
    """Exact evaluator for series drawn i.i.d. in time from a binary joint ``d``."""
    if any(a != 2 for a in d.alphabet_sizes):
        raise ValidationError("iid_binary_evaluator needs binary variables")
    return BinaryExactEvaluator(lambda parts, t: t * multi_information(d, parts), M, L)


def _arc_atoms(angle: float, offsets: Sequence[float], t: int) -> list[tuple[tuple[int, ...], float]]:
    """Exact law of (X_{j,i}) for i = 1..t when X_{j,i} = 1{r + o_j + i*angle > 1/2 (mod 1)}, r uniform."""
    cuts = {0.0}
    for o in offsets:
        for i in range(1, t + 1):
            cuts.add((0.5 - o - i * angle) % 1.0)
            cuts.add((-o - i * angle) % 1.0)
    cuts = sorted(cuts) + [1.0]
    atoms: dict[tuple[int, ...], float] = {}
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        r = 0.5 * (a + b)
        key = tuple(int((r + o + i * angle) % 1.0 > 0.5) for o in offsets for i in range(1, t + 1))
        atoms[key] = atoms.get(key, 0.0) + (b - a)
    return list(atoms.items())


def _atoms_entropy(atoms, positions: Sequence[int]) -> float:
    acc: dict[tuple[int, ...], float] = {}
    for key, p in atoms:
        sub = tuple(key[j] for j in positions)
        acc[sub] = acc.get(sub, 0.0) + p
    probs = np.array([p for p in acc.values() if p > 0])
    return float(-(probs * np.log2(probs)).sum())


def translation_evaluator(angles: Sequence[float], clusters: Sequence[Sequence[int]],
                          offsets: Sequence[float], M: int, L: int) -> BinaryExactEvaluator:
    """Exact evaluator for clusters of offset-coupled translation processes.

    Cluster ``c`` rotates by ``angles[c]``; series ``j`` has hidden-state offset
    ``offsets[j]``. Clusters with rationally independent angles are independent,
    so the joint law is the product of per-cluster arc laws.
    """
    clusters = [list(c) for c in clusters]
    members = sorted(i for c in clusters for i in c)
    if members != list(range(len(offsets))):
        raise ValidationError("clusters must cover every series exactly once")
    cache: dict[int, list] = {}

    def joint(t: int):
        if t not in cache:
            per = [_arc_atoms(angles[c], [offsets[j] for j in cl], t) for c, cl in enumerate(clusters)]
            # variable layout: series-major within cluster, clusters concatenated
            order = [j for cl in clusters for j in cl]
            atoms = []
            for combo in itertools.product(*per):
                key = sum((k for k, _ in combo), ())
                p = float(np.prod([q for _, q in combo]))
                atoms.append((key, p))
            cache[t] = (atoms, order)
        return cache[t]

    def block_info(parts, t):
        atoms, order = joint(t)
        pos = {j: idx for idx, j in enumerate(order)}

        def positions(part):
            return [pos[j] * t + i for j in sorted(part) for i in range(t)]

        union = frozenset().union(*parts)
        total = sum(_atoms_entropy(atoms, positions(p)) for p in parts)
        return max(0.0, total - _atoms_entropy(atoms, positions(union)))

    return BinaryExactEvaluator(block_info, M, L)


class FickleEvaluator(SumInfoEvaluator):
    """Exact values, adversarial comparisons whenever two values tie within ``tol``."""

    def __init__(self, base: SumInfoEvaluator, policy_seed: int, tol: float = ZERO_TOL):
        super().__init__()
        self.base = base
        self.tol = tol
        self.rng = np.random.default_rng(policy_seed)
        self.ties = 0

    def value(self, parts) -> float:
        return self.base.value(parts)

    def greater(self, a: float, b: float) -> bool:
        if abs(a - b) > self.tol:
            return a > b
        self.ties += 1
        return bool(self.rng.integers(2))


# --------------------------------------------------------------------------
# results


@dataclass
class ClusteringResult:
    partition: Partition
    score: float | None = None
    oracle_calls: int = 0
    estimator_calls: int = 0
    candidates_examined: int = 0
    call_bound: int = 0
    scores: dict = field(default_factory=dict, repr=False)


@dataclass
class ThreeSampleResult:
    label: str
    margin: float
    low_margin: bool
    left: float  # estimate for (x1, x2) | x3
    right: float  # estimate for x1 | (x2, x3)


# --------------------------------------------------------------------------
# CLIN


def clin_split(S: Iterable[int], o: DependenceOracle) -> tuple[Block, Block]:
    """Split ``S`` into (C, R) with C independent of R, or return R empty."""
    S = frozenset(S)
    if not S:
        raise ValidationError("cannot split an empty set")
    C = {min(S)}
    R = set(S - C)
    rounds = 0
    while R and o.is_positive(C, R):
        rounds += 1
        if rounds > len(S):
            raise InconsistentOracleError(f"split of {sorted(S)} did not settle in {len(S)} rounds")
        remaining = set(R)
        for x in sorted(R):
            if o.compare(C, remaining, C, remaining - {x}):
                C.add(x)
                break
            remaining.discard(x)
        R = set(S - C)
    return frozenset(C), frozenset(R)


def _clin_rec(S: Block, o: DependenceOracle, out: list[Block]) -> None:
    C, R = clin_split(S, o)
    if R:
        _clin_rec(C, o, out)
        _clin_rec(R, o, out)
    else:
        out.append(C)


def clin(S, o: DependenceOracle) -> ClusteringResult:
    """Finest independent partition by recursive two-way splitting.

    ``S`` is a FiniteJoint, a SeriesSet or an explicit index count/collection;
    only its size is used, all information comes from the oracle.
    """
    if isinstance(S, (FiniteJoint, SeriesSet)):
        indices = frozenset(range(S.N))
    elif isinstance(S, int):
        indices = frozenset(range(S))
    else:
        indices = frozenset(S)
    N = len(indices)
    start = o.calls
    blocks: list[Block] = []
    _clin_rec(indices, o, blocks)
    # re-index if a strict subset of a larger universe was clustered
    order = sorted(indices)
    local = {g: i for i, g in enumerate(order)}
    partition = Partition.from_blocks([[local[i] for i in b] for b in blocks], N)
    calls = o.calls - start
    bound = 2 * partition.k * N * N
    if calls > bound:
        raise IntegrityError(f"clin used {calls} oracle calls, above the bound {bound}")
    return ClusteringResult(partition, None, oracle_calls=calls, call_bound=bound)


# --------------------------------------------------------------------------
# CLINk


def clink_split(S: Iterable[int], est: SumInfoEvaluator) -> list[tuple[Block, Block]]:
    """Greedy chain of candidate splits of ``S``.

    Starting from the smallest index, C grows by the element of R whose
    removal from R (removals accumulating over the scan) most decreases the
    estimate between C and R. Every intermediate (C, R) is recorded, ending
    with (S, empty).
    """
    S = frozenset(S)
    if not S:
        raise ValidationError("cannot split an empty set")
    C = {min(S)}
    R = set(S - C)
    snapshots: list[tuple[Block, Block]] = []
    while R:
        snapshots.append((frozenset(C), frozenset(R)))
        d = 0.0
        xmax = min(R)
        remaining = set(R)
        for x in sorted(R):
            r = est([C, remaining])
            remaining.discard(x)
            r2 = est([C, remaining])
            if est.greater(r - r2, d):
                d, xmax = r - r2, x
        C.add(xmax)
        R = set(S - C)
    snapshots.append((frozenset(C), frozenset()))
    return snapshots


def _canonical(parts: Iterable[Block]) -> tuple[Block, ...]:
    return tuple(sorted(parts, key=min))


def _sort_key(parts: tuple[Block, ...]):
    return tuple(tuple(sorted(p)) for p in parts)


def clink_candidates(S: Iterable[int], k: int, est: SumInfoEvaluator) -> list[tuple[Block, ...]]:
    """All deduplicated k-part partitions reachable by recursive greedy splitting."""
    S = frozenset(S)
    splits: dict[Block, list[tuple[Block, Block]]] = {}
    frontier = {_canonical([S])}
    for _ in range(k - 1):
        nxt = set()
        for partial in sorted(frontier, key=_sort_key):
            for part in partial:
                if len(part) < 2:
                    continue
                if part not in splits:
                    splits[part] = clink_split(part, est)
                for C, R in splits[part]:
                    if R:
                        nxt.add(_canonical([p for p in partial if p != part] + [C, R]))
        frontier = nxt
    return sorted(frontier, key=_sort_key)


def clink(S, k: int, est: SumInfoEvaluator | SumInformation, cfg: RunConfig | None = None) -> ClusteringResult:
    """Known-k clustering by minimum sum-information over greedy candidates."""
    cfg = cfg or RunConfig()
    if isinstance(est, SumInformation):
        est = EmpiricalEvaluator(est)
    if isinstance(S, (SeriesSet, FiniteJoint)):
        indices = frozenset(range(S.N))
    elif isinstance(S, int):
        indices = frozenset(range(S))
    else:
        indices = frozenset(S)
    N = len(indices)
    if k < 2:
        raise ValidationError("k must be at least 2: with unknown or single-cluster k there is no consistent test")
    if k > N:
        raise ValidationError(f"k={k} exceeds the number of series N={N}")
    start = est.calls
    candidates = clink_candidates(indices, k, est)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            values = list(pool.map(lambda c: est(list(c)), candidates))
    else:
        values = [est(list(c)) for c in candidates]
    best = 0
    for i in range(1, len(candidates)):
        if est.greater(values[best], values[i]):
            best = i
    calls = est.calls - start
    bound = N ** (2 * k - 2)
    if calls > bound:
        raise IntegrityError(f"clink used {calls} estimator calls, above the bound {bound}")
    order = sorted(indices)
    local = {g: i for i, g in enumerate(order)}
    partition = Partition.from_blocks([[local[i] for i in b] for b in candidates[best]], N)
    scores = {tuple(tuple(sorted(local[i] for i in b)) for b in c): v for c, v in zip(candidates, values)}
    return ClusteringResult(partition, values[best], estimator_calls=calls,
                            candidates_examined=len(candidates), call_bound=bound, scores=scores)


def three_sample(x1, x2, x3, cfg: RunConfig | None = None,
                 est: SumInfoEvaluator | SumInformation | None = None) -> ThreeSampleResult:
    """Decide between (x1,x2) independent of x3 and x1 independent of (x2,x3)."""
    cfg = cfg or RunConfig()
    if est is None:
        est = SumInformation(SeriesSet(np.vstack([x1, x2, x3])), cfg)
    left = est([{0, 1}, {2}])
    right = est([{0}, {1, 2}])
    label = "(12)|3" if left <= right else "1|(23)"
    margin = abs(left - right)
    n = len(x1)
    return ThreeSampleResult(label, margin, margin < threshold(n, cfg), left, right)

