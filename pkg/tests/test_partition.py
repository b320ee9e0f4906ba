import pytest

from app.services.common_service import SizeMismatch
from app.services.partition_service import (
    Partition,
    block_multiplicity,
    coarsenings,
    hardy_ramanujan_estimate,
    merge_count,
    partition_count,
    partitions,
    precedes,
)


def P(*parts: int) -> Partition:
    return Partition(parts)


def test_partition_normalises_order():
    assert P(1, 3, 2).parts == (3, 2, 1)
    assert P(2, 1, 1).n == 4 and P(2, 1, 1).m == 3
    assert str(P(1, 2)) == "(2,1)"


def test_partitions_reverse_lexicographic():
    assert partitions(1) == (P(1),)
    assert [str(p) for p in partitions(4)] == ["(4)", "(3,1)", "(2,2)", "(2,1,1)", "(1,1,1,1)"]


@pytest.mark.parametrize("n, count", [(0, 1), (1, 1), (4, 5), (10, 42), (50, 204226), (100, 190569292)])
def test_partition_count(n, count):
    assert partition_count(n) == count


@pytest.mark.parametrize("n", range(1, 13))
def test_enumeration_matches_recurrence(n):
    assert len(partitions(n)) == partition_count(n)


@pytest.mark.parametrize("n, low, high", [(50, 1.0, 1.10), (100, 0.95, 1.10)])
def test_hardy_ramanujan_ratio(ctx, n, low, high):
    ratio = float(hardy_ramanujan_estimate(n, ctx)) / partition_count(n)
    assert low <= ratio <= high


def test_merge_counts():
    assert merge_count(P(1, 1), P(2)) == 1
    assert merge_count(P(2, 1, 1), P(3, 1)) == 2
    assert merge_count(P(2, 1, 1), P(2, 1, 1)) == 1
    assert merge_count(P(1, 1, 1), P(2, 1)) == 3
    assert merge_count(P(2, 2), P(3, 1)) == 0
    with pytest.raises(SizeMismatch):
        merge_count(P(2), P(1))


def test_merge_order():
    assert precedes(P(2), P(1, 1))
    assert not precedes(P(1, 1), P(2))
    assert not precedes(P(2, 1), P(2, 1))
    assert {(str(c.eta), c.count) for c in coarsenings(P(1, 1, 1))} == {("(2,1)", 3), ("(3)", 1)}


@pytest.mark.parametrize("parts, expected", [((1,), 1), ((1, 1), 3), ((2,), 1), ((1, 1, 1), 15), ((2, 1), 15)])
def test_block_multiplicity(parts, expected):
    assert block_multiplicity(Partition(parts)) == expected


def test_block_multiplicities_sum_to_set_partitions_into_even_blocks():
    # set partitions of 2n points into even-sized blocks: 4 for n = 2, 31 for n = 3
    assert sum(block_multiplicity(lam) for lam in partitions(2)) == 4
    assert sum(block_multiplicity(lam) for lam in partitions(3)) == 1 + 15 + 15


def test_partition_count_increases():
    counts = [partition_count(n) for n in range(1, 61)]
    assert all(a < b for a, b in zip(counts, counts[1:]))


def test_hardy_ramanujan_estimate_increases(ctx):
    estimates = [hardy_ramanujan_estimate(n, ctx) for n in range(1, 61)]
    assert all(a.upper < b.lower for a, b in zip(estimates, estimates[1:]))
