import itertools

import numpy as np
import pytest

from indclust.core import CapacityError, IntegrityError, Partition, ValidationError
from indclust.finite_dist import (FiniteJoint, brute_force_finest, bell, dumps, entropy,
                                  exact_oracle_compare, loads, multi_information, mutual_information,
                                  parity_distribution, product_joint, random_structured_joint,
                                  set_partitions)

COIN = np.array([0.5, 0.5])


def enumerate_parity_triple():
    """Outcome table of (X1, X2, X1 xor X2) built by listing all 8 tuples."""
    rows = []
    for x1, x2, x3 in itertools.product((0, 1), repeat=3):
        rows.append(((x1, x2, x3), 0.25 if x3 == (x1 ^ x2) else 0.0))
    return FiniteJoint.from_table([2, 2, 2], rows)


def H(*probs):
    p = np.array([q for q in probs if q > 0])
    return float(-(p * np.log2(p)).sum())


def test_entropy_examples():
    assert entropy(FiniteJoint(COIN), {0}) == pytest.approx(1.0)
    assert entropy(FiniteJoint([1.0, 0.0]), {0}) == 0.0
    two = product_joint([COIN, COIN])
    assert entropy(two, {0, 1}) == pytest.approx(2.0)
    assert entropy(two, set()) == 0.0


def test_mutual_information_examples():
    copy = FiniteJoint([[0.5, 0.0], [0.0, 0.5]])
    assert mutual_information(copy, {0}, {1}) == pytest.approx(1.0)
    assert mutual_information(product_joint([COIN, COIN]), {0}, {1}) == pytest.approx(0.0, abs=1e-12)
    d = enumerate_parity_triple()
    assert mutual_information(d, {0}, {2}) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(d, {0, 1}, {2}) == pytest.approx(1.0)
    assert mutual_information(d, {0}, set()) == 0.0
    with pytest.raises(ValidationError):
        mutual_information(d, {0, 1}, {1})


def test_multi_information_examples():
    assert multi_information(product_joint([COIN] * 3), [{0}, {1}, {2}]) == pytest.approx(0.0, abs=1e-12)
    d = enumerate_parity_triple()
    assert multi_information(d, [{0}, {1}, {2}]) == pytest.approx(1.0)
    assert multi_information(d, [{0, 1, 2}]) == 0.0
    with pytest.raises(ValidationError):
        multi_information(d, [{0}, {0, 1}])


def test_parity_distribution_matches_enumeration():
    np.testing.assert_allclose(parity_distribution([3]).pmf, enumerate_parity_triple().pmf)
    d = parity_distribution([3])
    support = [idx for idx in itertools.product((0, 1), repeat=3) if d.pmf[idx] > 0]
    assert len(support) == 4 and all(sum(s) % 2 == 0 for s in support)
    two = parity_distribution([2])
    assert two.pmf[0, 0] == two.pmf[1, 1] == 0.5
    d33 = parity_distribution([3, 3])
    for i in range(3):
        assert mutual_information(d33, {i}, {3, 4, 5}) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        parity_distribution([1])
    with pytest.raises(CapacityError):
        parity_distribution([5, 5], cap=2**9)


def test_oracle_compare():
    d = enumerate_parity_triple()
    assert exact_oracle_compare(d, {0, 1}, {2}, {0}, {2})
    assert not exact_oracle_compare(d, {0, 1}, {2}, {0, 1}, {2})
    coins = product_joint([COIN, COIN])
    assert not exact_oracle_compare(coins, {0}, {1}, {0}, set())


def test_brute_force_examples():
    assert brute_force_finest(product_joint([COIN] * 3)) == Partition((0, 1, 2))
    assert brute_force_finest(enumerate_parity_triple()) == Partition((0, 0, 0))
    assert brute_force_finest(parity_distribution([3, 3])) == Partition.from_blocks([[0, 1, 2], [3, 4, 5]])
    with pytest.raises(CapacityError):
        brute_force_finest(parity_distribution([3, 3]), max_n=5)


def test_brute_force_detects_non_uniqueness(monkeypatch):
    import indclust.finite_dist as fd
    # every two-block split reports independence, so several maxima tie
    monkeypatch.setattr(fd, "multi_information", lambda d, blocks: 0.0 if len(blocks) == 2 else 1.0)
    with pytest.raises(IntegrityError):
        brute_force_finest(parity_distribution([2, 2]))


def test_set_partitions_count_bell_numbers():
    assert [bell(n) for n in range(7)] == [1, 1, 2, 5, 15, 52, 203]
    assert len(set(set_partitions(5))) == 52


def random_joint(rng, sizes):
    return FiniteJoint(rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes))


def test_information_properties_on_random_joints():
    rng = np.random.default_rng(5)
    for _ in range(100):
        N = int(rng.integers(2, 5))
        sizes = tuple(int(a) for a in rng.integers(2, 4, size=N))
        d = random_joint(rng, sizes)
        A = {0}
        B = set(range(1, N))
        assert 0 <= entropy(d, B) <= np.log2(np.prod([sizes[i] for i in B])) + 1e-12
        assert mutual_information(d, A, B) == pytest.approx(mutual_information(d, B, A))
        assert multi_information(d, [A, B]) == pytest.approx(mutual_information(d, A, B))
        # dropping a variable from R can only lose information about C
        for x in B:
            assert mutual_information(d, A, B) >= mutual_information(d, A, B - {x}) - 1e-9
        p = product_joint([rng.dirichlet(np.ones(a)) for a in sizes])
        assert multi_information(p, [{i} for i in range(N)]) < 1e-9
        assert brute_force_finest(p) == Partition(tuple(range(N)))


def test_random_structured_joint_ground_truth():
    rng = np.random.default_rng(8)
    for _ in range(30):
        d, truth = random_structured_joint(rng, int(rng.integers(1, 6)))
        assert brute_force_finest(d) == truth


def test_text_round_trip():
    d = parity_distribution([3, 2])
    again = loads(dumps(d))
    np.testing.assert_array_equal(again.pmf, d.pmf)
    text = "# comment\nalphabet 2 2\n0 0 0.5\n1 1 0.5\n"
    assert mutual_information(loads(text), {0}, {1}) == pytest.approx(1.0)


@pytest.mark.parametrize("text", [
    "", "alphabet 2\n0 0.5\n1 0.4\n", "alphabet 2\n2 1.0\n", "alpha 2\n", "alphabet 2\n0 x\n",
    "alphabet 2 2\n0 1.0\n",
])
def test_malformed_text(text):
    with pytest.raises(ValidationError):
        loads(text)
