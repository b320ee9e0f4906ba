from fractions import Fraction

import pytest

from app.core.config import get_settings
from app.services.common_service import (
    CrossCheckFailure,
    InvalidModulus,
    PrecisionExhausted,
    binomial,
    compositions,
    fraction_payload,
    parallel_map,
    rank_ranges,
    require_odd_modulus,
)


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, threads=4) == [x * x for x in items]
    assert parallel_map(lambda x: x, [], threads=4) == []


def test_rank_ranges_cover_everything():
    ranges = rank_ranges(70, 8)
    assert ranges[0][0] == 0 and ranges[-1][1] == 70
    assert all(a[1] == b[0] for a, b in zip(ranges, ranges[1:]))
    assert rank_ranges(3, 10) == [(0, 1), (1, 2), (2, 3)]
    assert rank_ranges(0, 4) == []


def test_compositions():
    assert list(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert len(list(compositions(3, 3))) == binomial(5, 2)
    assert list(compositions(0, 0)) == [()]


def test_binomial_out_of_range():
    assert binomial(5, 7) == 0
    assert binomial(4, 2) == 6


def test_fraction_payload():
    assert fraction_payload(Fraction(-26, 45)) == {"num": "-26", "den": "45"}


def test_exit_codes():
    assert InvalidModulus().exit_code == 2
    assert PrecisionExhausted().exit_code == 3
    assert CrossCheckFailure().exit_code == 1
    assert InvalidModulus("q=4").as_payload() == {"status": "error", "message": "Invalid modulus", "detail": "q=4"}


@pytest.mark.parametrize("q", [1, 2, 8, "9"])
def test_require_odd_modulus(q):
    with pytest.raises(InvalidModulus):
        require_odd_modulus(q)


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("ERDOS_THREADS", "3")
    monkeypatch.setenv("ERDOS_ENUMERATION_MAX_Q", "not-a-number")
    settings = get_settings()
    assert settings.threads == 3
    assert settings.enumeration_max_q == 17
    assert settings.precision_bits == 128
