import math
from collections import Counter

import numpy as np
import pytest
from scipy import integrate

from indclust.core import RunConfig, SeriesSet, ValidationError, weight
from indclust.datagen import gen_translation_pair
from indclust.estimators import (SumInformation, block_frequencies, compression_sum_rate,
                                 empirical_entropy, level_weights, shift_independence_test,
                                 shift_surrogate_stats, sum_information, threshold,
                                 thresholded_compare, truncation)
from indclust.quantizer import cell_index, fit_normalizer


def reference_sum_information(s, parts, M, L):
    """Direct transcription: weighted sum of plug-in block multi-informations."""
    q = fit_normalizer(s)

    def h(subset, m, l):
        return empirical_entropy(block_frequencies(s, subset, m, l, q))

    total = 0.0
    for m in range(1, M + 1):
        for l in range(1, L + 1):
            term = sum(h(p, m, l) for p in parts) - h(sorted(set().union(*parts)), m, l)
            total += weight(m) / m * weight(l) / l * max(term, 0.0)
    return total


def test_block_frequencies_example():
    s = SeriesSet(np.array([[0.0, 1.0, 0.0, 1.0, 1.0]]))
    f = block_frequencies(s, [0], 1, 1)
    assert f.total == 5 and f.counts == {(0,): 2, (1,): 3}
    f2 = block_frequencies(s, [0], 2, 2)
    assert f2.total == 4
    assert f2.counts == Counter({(0, 1): 2, (1, 0): 1, (1, 1): 1})
    with pytest.raises(ValidationError):
        block_frequencies(s, [0], 6, 1)
    with pytest.raises(ValidationError):
        block_frequencies(s, [], 1, 1)


def test_block_frequencies_match_cell_index():
    rng = np.random.default_rng(2)
    s = SeriesSet(rng.random((1, 300)))
    q = fit_normalizer(s)
    v = q.normalize(s)[0]
    for m, l in [(1, 3), (2, 3), (3, 5)]:
        f = block_frequencies(s, [0], m, l, q)
        direct = Counter(cell_index(v[t:t + m], l) for t in range(s.n - m + 1))
        assert sorted(f.counts.values()) == sorted(direct.values())


def test_empirical_entropy_example():
    s = SeriesSet(np.array([[0.0, 0.0, 1.0, 1.0], [0.0, 1.0, 0.0, 0.0]]))
    f = block_frequencies(s, [0, 1], 1, 1)
    assert empirical_entropy(f) == pytest.approx(1.5)


def test_truncation():
    cfg = RunConfig()
    assert truncation(100_000, cfg) == (16, 16)
    assert truncation(2, cfg) == (1, 1)
    assert truncation(1024, RunConfig(m_max=1, l_max=4)) == (1, 4)


def test_level_weights():
    wm, wl = level_weights(3, 2)
    np.testing.assert_allclose(wm, [1 / 2, 1 / 12, 1 / 36])
    np.testing.assert_allclose(wl, [1 / 2, 1 / 12])


def test_matches_direct_transcription():
    rng = np.random.default_rng(4)
    z = rng.standard_normal((3, 400))
    z[1] += 0.8 * z[0]
    s = SeriesSet(z)
    est = SumInformation(s, RunConfig(m_max=3, l_max=4))
    for parts in ([{0}, {1}], [{0}, {1, 2}], [{0}, {1}, {2}]):
        assert est(parts) == pytest.approx(reference_sum_information(s, parts, 3, 4), abs=1e-12)


def test_examples():
    rng = np.random.default_rng(0)
    x = rng.random(4000)
    s = SeriesSet(np.vstack([x, x, rng.random(4000)]))
    est = SumInformation(s)
    assert est([{0, 1, 2}]) == 0.0
    assert est([{0}, set()]) == 0.0
    assert est([{0}, {1}]) > 10 * est([{0}, {2}])
    assert est.calls == 4


def test_invariances():
    rng = np.random.default_rng(9)
    z = rng.standard_normal((3, 2000))
    z[2] = z[2] + z[0]
    base = SumInformation(SeriesSet(z))([{0}, {1, 2}])
    assert base >= 0
    swapped = SumInformation(SeriesSet(z[[2, 0, 1]]))([{1}, {0, 2}])
    assert swapped == pytest.approx(base, abs=1e-12)
    affine = SumInformation(SeriesSet(3.0 * z + 7.0))([{0}, {1, 2}])
    assert affine == pytest.approx(base, abs=1e-12)
    part_order = SumInformation(SeriesSet(z))([{1, 2}, {0}])
    assert part_order == base


def test_truncation_monotone():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((2, 3000))
    z[1] += z[0]
    s = SeriesSet(z)
    values = [SumInformation(s, RunConfig(m_max=c, l_max=c))([{0}, {1}]) for c in range(1, 8)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_translation_pair_cell_probability():
    """Empirical P(X1=1, X2=1) for the offset pair against the analytic arc length."""
    delta = 0.1
    both = lambda r: float(r > 0.5 and (r + delta) % 1.0 > 0.5)  # noqa: E731
    p11, _ = integrate.quad(both, 0.0, 1.0, points=[0.4, 0.5, 0.9], limit=200)
    assert p11 == pytest.approx(0.4, abs=1e-9)
    g = gen_translation_pair(offset_mode="fixed", n=100_000, seed=1, delta=delta)
    x = g.series.data
    assert np.mean((x[0] == 1) & (x[1] == 1)) == pytest.approx(p11, abs=5e-3)
    mi = 2 - sum(-p * math.log2(p) for p in (0.4, 0.1, 0.1, 0.4))
    first = SumInformation(g.series).breakdown([{0}, {1}]).terms[0, 0] / (weight(1) ** 2)
    assert first == pytest.approx(mi, abs=0.01)


def test_threshold_and_compare():
    cfg = RunConfig(threshold_c=2.0)
    assert threshold(1000, cfg) == pytest.approx(0.2)
    rng = np.random.default_rng(1)
    x = rng.random(5000)
    s = SeriesSet(np.vstack([x, x, rng.random(5000)]))
    est = SumInformation(s)
    assert thresholded_compare(est, {0}, {1, 2}, 1)
    assert not thresholded_compare(est, {0}, {1, 2}, 2)
    assert not thresholded_compare(est, set(), {1, 2}, 1)
    with pytest.raises(ValidationError):
        thresholded_compare(est, {0}, {1}, 2)


def test_shift_test():
    rng = np.random.default_rng(6)
    x = rng.random(2000)
    s = SeriesSet(np.vstack([x, x + 0.01 * rng.random(2000), rng.random(2000)]))
    est = SumInformation(s, RunConfig(permutation_count=40))
    assert shift_independence_test(est, {0}, {1})
    t0, sur = shift_surrogate_stats(est, {0}, {2})
    assert len(sur) == 40 and t0 >= 0
    again = shift_surrogate_stats(SumInformation(s, RunConfig(permutation_count=40)), {0}, {2})
    np.testing.assert_array_equal(sur, again[1])
    const = SeriesSet(np.vstack([np.zeros(100), rng.random(100)]))
    assert not shift_independence_test(SumInformation(const, RunConfig(permutation_count=20)), {0}, {1})
    with pytest.raises(ValidationError):
        shift_surrogate_stats(SumInformation(SeriesSet(rng.random((2, 5)))), {0}, {1})


def test_compression_rate():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 20_000).astype(float)
    copy = SeriesSet(np.vstack([bits, bits]))
    indep = SeriesSet(np.vstack([bits, rng.integers(0, 2, 20_000).astype(float)]))
    r_copy = compression_sum_rate(copy, [{0}, {1}])
    r_indep = compression_sum_rate(indep, [{0}, {1}])
    assert r_copy > 0.5 * 20_000
    assert abs(r_indep) < 0.25 * r_copy
    assert compression_sum_rate(copy, [{0, 1}]) == 0.0
    for name in ("zlib", "bz2"):
        assert compression_sum_rate(copy, [{0}, {1}], compressor=name) > 0
    with pytest.raises(ValidationError):
        compression_sum_rate(copy, [{0}, {1}], compressor="rar")
    with pytest.raises(ValidationError):
        compression_sum_rate(copy, [{0}, {1}], level=9)


def test_functional_wrapper():
    rng = np.random.default_rng(0)
    s = SeriesSet(rng.random((2, 500)))
    b = sum_information(s, [{0}, {1}])
    assert b.value == pytest.approx(float(b.terms.sum()))
    assert b.terms.shape == (b.m_used, b.l_used)
