import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterbench.errors import IncompatiblePartitionsError, UndefinedIndexError
from clusterbench.metrics import (
    ContingencyTable,
    PairCounts,
    Partition,
    adjusted_rand,
    build_contingency,
    fowlkes_mallows,
    jaccard,
    nmi,
    pair_counts,
    score_partition,
)

from conftest import oracle_ari, oracle_fowlkes_mallows, oracle_jaccard, oracle_nmi


def table(counts):
    return ContingencyTable(np.asarray(counts, dtype=np.int64))


class TestContingency:
    def test_identical(self):
        t = build_contingency([0, 0, 1, 1], [0, 0, 1, 1])
        assert t.counts.tolist() == [[2, 0], [0, 2]]

    def test_relabeled(self):
        t = build_contingency([0, 0, 1, 1], [1, 1, 0, 0])
        assert t.counts.tolist() == [[0, 2], [2, 0]]

    def test_offset_split(self):
        t = build_contingency([0, 0, 0, 1, 1], [0, 0, 1, 1, 1])
        assert t.counts.tolist() == [[2, 1], [0, 2]]
        assert t.row_marginals.tolist() == [3, 2]
        assert t.col_marginals.tolist() == [2, 3]
        assert t.total == 5

    def test_length_mismatch(self):
        with pytest.raises(IncompatiblePartitionsError):
            build_contingency([0, 1], [0, 1, 1])

    def test_empty_clusters_allowed(self):
        p = Partition(np.array([0, 2, 2]), num_clusters=4)
        t = build_contingency(p, [0, 1, 1])
        assert t.counts.shape == (4, 2)
        assert t.row_marginals.tolist() == [1, 0, 2, 0]


class TestPairCounts:
    def test_identical_partitions(self):
        assert pair_counts(table([[2, 0], [0, 2]])) == PairCounts(2, 0, 0)

    def test_offset_split(self):
        # checked by exhaustive enumeration over the 5 objects
        u, v = [0, 0, 0, 1, 1], [0, 0, 1, 1, 1]
        t = build_contingency(u, v)
        assert pair_counts(t) == PairCounts(2, 2, 2)

    def test_crossing(self):
        u, v = [0, 0, 1, 1], [0, 1, 0, 1]
        assert pair_counts(build_contingency(u, v)) == PairCounts(0, 2, 2)


class TestJaccard:
    def test_perfect(self):
        assert jaccard(PairCounts(2, 0, 0)) == 1.0

    def test_third(self):
        assert jaccard(PairCounts(2, 2, 2)) == pytest.approx(1 / 3, abs=1e-15)

    def test_zero(self):
        assert jaccard(PairCounts(0, 2, 2)) == 0.0

    def test_all_singletons_convention(self):
        assert jaccard(PairCounts(0, 0, 0)) == 1.0


class TestFowlkesMallows:
    def test_perfect(self):
        assert fowlkes_mallows(PairCounts(2, 0, 0)) == 1.0

    def test_half(self):
        assert fowlkes_mallows(PairCounts(2, 2, 2)) == pytest.approx(0.5, abs=1e-15)

    def test_zero(self):
        assert fowlkes_mallows(PairCounts(0, 2, 2)) == 0.0

    def test_all_singletons_convention(self):
        assert fowlkes_mallows(PairCounts(0, 0, 0)) == 1.0


class TestAdjustedRand:
    def test_identical_is_one(self):
        for labels in ([0, 0, 1, 1], [0, 1, 2, 3], [0, 0, 0, 0]):
            assert adjusted_rand(build_contingency(labels, labels)) == 1.0

    def test_hand_value(self):
        # (2 - 1.6) / (4 - 1.6) = 1/6, cross-checked by the pair oracle
        t = table([[2, 1], [0, 2]])
        assert adjusted_rand(t) == pytest.approx(1 / 6, abs=1e-12)
        assert adjusted_rand(t) == pytest.approx(
            oracle_ari([0, 0, 0, 1, 1], [0, 0, 1, 1, 1]), abs=1e-12
        )

    def test_chance_level(self):
        rng = np.random.default_rng(7)
        truth = np.repeat(np.arange(4), 25)
        values = []
        for _ in range(1000):
            values.append(adjusted_rand(build_contingency(truth, rng.permutation(truth))))
        assert abs(np.mean(values)) <= 0.02

    def test_needs_two_objects(self):
        with pytest.raises(UndefinedIndexError):
            adjusted_rand(table([[1]]))


class TestNMI:
    def test_identical_is_one(self):
        assert nmi(build_contingency([0, 1, 2, 0], [0, 1, 2, 0])) == pytest.approx(1.0, abs=1e-12)

    def test_independent_is_zero(self):
        assert nmi(build_contingency([0, 0, 1, 1], [0, 1, 0, 1])) == pytest.approx(0.0, abs=1e-12)

    def test_hand_table_matches_entropy_oracle(self):
        # direct Shannon-formula oracle on the underlying label vectors
        u, v = [0, 0, 0, 1, 1], [0, 0, 1, 1, 1]
        expected = oracle_nmi(u, v)
        assert nmi(build_contingency(u, v)) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(0.4325380677663126, abs=1e-12)

    def test_single_cluster_conventions(self):
        assert nmi(build_contingency([0, 0, 0], [0, 0, 0])) == 1.0
        assert nmi(build_contingency([0, 0, 0], [0, 1, 2])) == 0.0


partition_pairs = st.integers(min_value=2, max_value=12).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
    )
)


@settings(max_examples=300, deadline=None)
@given(partition_pairs)
def test_all_indices_match_oracles(pair):
    u, v = pair
    scores = score_partition(u, v)
    assert scores["jaccard"] == pytest.approx(oracle_jaccard(u, v), abs=1e-12)
    assert scores["ari"] == pytest.approx(oracle_ari(u, v), abs=1e-12)
    assert scores["fm"] == pytest.approx(oracle_fowlkes_mallows(u, v), abs=1e-12)
    assert scores["nmi"] == pytest.approx(oracle_nmi(u, v), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(partition_pairs)
def test_symmetry_under_swap(pair):
    u, v = pair
    forward = score_partition(u, v)
    backward = score_partition(v, u)
    for name in ("jaccard", "ari", "fm", "nmi"):
        assert forward[name] == pytest.approx(backward[name], abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(partition_pairs, st.randoms(use_true_random=False))
def test_relabeling_invariance(pair, rnd):
    u, v = pair
    ids = sorted(set(v))
    shuffled = list(ids)
    rnd.shuffle(shuffled)
    mapping = dict(zip(ids, shuffled))
    v2 = [mapping[x] for x in v]
    before = score_partition(u, v)
    after = score_partition(u, v2)
    for name in ("jaccard", "ari", "fm", "nmi"):
        assert before[name] == pytest.approx(after[name], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=2, max_size=20))
def test_identical_partitions_score_unity(labels):
    scores = score_partition(labels, labels)
    for name in ("jaccard", "ari", "fm", "nmi"):
        assert scores[name] == pytest.approx(1.0, abs=1e-12)
