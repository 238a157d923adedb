"""Seeded synthetic processes with known independence structure.

All randomness comes from numpy's PCG64 seeded through ``SeedSequence``; each
series (or independent cluster) gets its own spawned stream so output is a
pure function of the arguments and the seed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .core import Partition, SeriesSet, ValidationError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# Fractional parts of square roots of distinct primes: together with 1 they are
# linearly independent over the rationals, so rotations by different entries
# are jointly ergodic and therefore independent along a single sample path.
ANGLES = (GOLDEN, math.sqrt(2.0) - 1.0, math.sqrt(3.0) - 1.0, math.sqrt(7.0) - 2.0,
          math.sqrt(11.0) - 3.0, math.sqrt(13.0) - 3.0, math.sqrt(17.0) - 4.0)

KINDS = ("parity", "translation", "translation_pair", "perturbed_translation",
         "gaussian_clusters", "translation_clusters")


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown process kind {self.kind!r}")
        if self.n < 1:
            raise ValidationError("n must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        return cls(kind=d["kind"], n=int(d["n"]), seed=int(d.get("seed", 0)), params=dict(d.get("params", {})))


@dataclass(frozen=True)
class Generated:
    series: SeriesSet
    truth: Partition
    spec: ProcessSpec | None = None


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(ss)) for ss in np.random.SeedSequence(seed).spawn(count)]


def gen_parity_series(group_sizes: Sequence[int], n: int, seed: int) -> Generated:
    """Per time step, each group is g-1 fair bits followed by their XOR."""
    if not group_sizes or any(g < 2 for g in group_sizes):
        raise ValidationError("parity groups need at least 2 members")
    cols = []
    blocks = []
    for g, rng in zip(group_sizes, _streams(seed, len(group_sizes))):
        free = rng.integers(0, 2, size=(g - 1, n))
        cols.extend(free)
        cols.append(free.sum(axis=0) % 2)
        start = sum(len(b) for b in blocks)
        blocks.append(range(start, start + g))
    return Generated(SeriesSet(np.array(cols, dtype=float)), Partition.from_blocks(blocks))


def _rotation(rng: np.random.Generator, alpha_rot: float, n: int, epsilon: float = 0.0,
              start: float | None = None) -> np.ndarray:
    """Hidden states r_1..r_n of a (possibly jittered) circle rotation."""
    r0 = rng.random() if start is None else start
    step = np.full(n, alpha_rot)
    if epsilon > 0:
        step = step + rng.uniform(-epsilon, epsilon, size=n)
    return np.mod(r0 + np.cumsum(step), 1.0)


def _check_alpha(alpha_rot: float) -> None:
    if not 0.0 < alpha_rot < 1.0:
        raise ValidationError("rotation angle must lie in (0, 1)")


def gen_translation(alpha_rot: float = GOLDEN, n: int = 1000, seed: int = 0) -> np.ndarray:
    """Thresholded circle rotation: X_i = 1{r_i > 1/2}, r_i = r_{i-1} + alpha mod 1."""
    return gen_perturbed_translation(alpha_rot, 0.0, n, seed)


def gen_perturbed_translation(alpha_rot: float = GOLDEN, epsilon: float = 0.1, n: int = 1000,
                              seed: int = 0) -> np.ndarray:
    """Rotation whose step is alpha + u_i with u_i uniform on [-epsilon, epsilon]."""
    _check_alpha(alpha_rot)
    if epsilon < 0:
        raise ValidationError("epsilon must be non-negative")
    rng = _streams(seed, 1)[0]
    return (_rotation(rng, alpha_rot, n, epsilon) > 0.5).astype(float)


def gen_translation_pair(alpha_rot: float = GOLDEN, offset_mode: str = "fixed", n: int = 1000,
                         seed: int = 0, delta: float = 0.1,
                         second_alpha: float | None = ANGLES[1]) -> Generated:
    """Two translation processes.

    ``offset_mode="fixed"``: the second hidden state trails the first by
    ``delta`` (one ergodic, dependent pair). ``offset_mode="independent"``:
    independent starting points; the second copy rotates by ``second_alpha``.
    Passing ``second_alpha=None`` reuses ``alpha_rot``, which gives a pair that
    is independent as a mixture but whose every sample path has a constant
    hidden-state gap, i.e. looks dependent.
    """
    _check_alpha(alpha_rot)
    rng_a, rng_b = _streams(seed, 2)
    if offset_mode == "fixed":
        r1 = _rotation(rng_a, alpha_rot, n)
        r2 = np.mod(r1 + delta, 1.0)
        truth = Partition((0, 0))
    elif offset_mode == "independent":
        beta = alpha_rot if second_alpha is None else second_alpha
        _check_alpha(beta)
        r1 = _rotation(rng_a, alpha_rot, n)
        r2 = _rotation(rng_b, beta, n)
        truth = Partition((0, 1))
    else:
        raise ValidationError(f"offset_mode must be 'fixed' or 'independent', got {offset_mode!r}")
    data = np.vstack([r1 > 0.5, r2 > 0.5]).astype(float)
    return Generated(SeriesSet(data), truth)


def gen_translation_clusters(cluster_sizes: Sequence[int], n: int, seed: int,
                             delta: float = 0.1, angles: Sequence[float] = ANGLES) -> Generated:
    """Independent clusters of offset-coupled translation processes.

    Cluster j rotates by ``angles[j]``; its members' hidden states are spaced
    ``delta`` apart. Distinct angles keep the clusters independent pathwise.
    """
    if len(cluster_sizes) > len(angles):
        raise ValidationError(f"at most {len(angles)} clusters supported")
    rows = []
    blocks = []
    for j, (g, rng) in enumerate(zip(cluster_sizes, _streams(seed, len(cluster_sizes)))):
        if g < 1:
            raise ValidationError("cluster sizes must be positive")
        r = _rotation(rng, angles[j], n)
        start = len(rows)
        rows.extend(np.mod(r + i * delta, 1.0) > 0.5 for i in range(g))
        blocks.append(range(start, start + g))
    return Generated(SeriesSet(np.array(rows, dtype=float)), Partition.from_blocks(blocks))


def gen_gaussian_clusters(cluster_sizes: Sequence[int], rho_within: float, n: int, seed: int) -> Generated:
    """I.i.d. draws from a block-diagonal equicorrelated Gaussian."""
    rows = []
    blocks = []
    for g, rng in zip(cluster_sizes, _streams(seed, len(cluster_sizes))):
        if g < 1:
            raise ValidationError("cluster sizes must be positive")
        if g > 1 and not -1.0 / (g - 1) < rho_within < 1.0:
            raise ValidationError(f"rho={rho_within} is not positive definite for block size {g}")
        cov = np.full((g, g), rho_within) + (1.0 - rho_within) * np.eye(g)
        chol = np.linalg.cholesky(cov)
        rows.extend(chol @ rng.standard_normal((g, n)))
        start = sum(len(b) for b in blocks)
        blocks.append(range(start, start + g))
    if rho_within == 0.0:
        truth = Partition(tuple(range(len(rows))))
    else:
        truth = Partition.from_blocks(blocks)
    return Generated(SeriesSet(np.array(rows)), truth)


def generate(spec: ProcessSpec) -> Generated:
    """Dispatch on ``spec.kind``; parameters come from ``spec.params``."""
    p = dict(spec.params)
    n, seed = spec.n, spec.seed
    if spec.kind == "parity":
        out = gen_parity_series(p.get("group_sizes", [3]), n, seed)
    elif spec.kind == "translation":
        x = gen_translation(p.get("alpha_rot", GOLDEN), n, seed)
        out = Generated(SeriesSet(x), Partition((0,)))
    elif spec.kind == "perturbed_translation":
        x = gen_perturbed_translation(p.get("alpha_rot", GOLDEN), p.get("epsilon", 0.1), n, seed)
        out = Generated(SeriesSet(x), Partition((0,)))
    elif spec.kind == "translation_pair":
        out = gen_translation_pair(p.get("alpha_rot", GOLDEN), p.get("offset_mode", "fixed"), n, seed,
                                   p.get("delta", 0.1), p.get("second_alpha", ANGLES[1]))
    elif spec.kind == "translation_clusters":
        out = gen_translation_clusters(p.get("cluster_sizes", [2, 2]), n, seed, p.get("delta", 0.1))
    else:
        out = gen_gaussian_clusters(p.get("cluster_sizes", [3, 3]), p.get("rho_within", 0.8), n, seed)
    return Generated(out.series, out.truth, spec)
