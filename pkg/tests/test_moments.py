import math
from fractions import Fraction

import pytest

from app.services.common_service import InvalidArgument, ParityMismatch
from app.services.moments_service import (
    MomentMethod,
    c_lambda,
    characteristic_function,
    discrepancy_report,
    empirical_cdf,
    exact_moment,
    half_range_distinct_sum,
    limiting_moment,
    moment_enumeration,
    moment_printed_formula,
    moment_partition_formula,
    monte_carlo_moments,
    printed_limiting_moment,
    rademacher_moment,
    script_s,
    script_s_exact,
    subgaussian_check,
)
from app.services.numeric_service import PiPowerRational
from app.services.partition_service import Partition, partitions


def P(*parts: int) -> Partition:
    return Partition(parts)


# ── Distinct-index sums ──────────────────────────────────────────────────────

@pytest.mark.parametrize("lam, expected", [(P(1), Fraction(2)), (P(1, 1), Fraction(2, 5)), (P(2), Fraction(18, 5))])
def test_half_range_sums_q5(ctx, lam, expected):
    assert half_range_distinct_sum(lam, 5, 1, ctx).contains(expected)


@pytest.mark.parametrize("lam, expected", [(P(1), Fraction(4)), (P(1, 1), Fraction(44, 5)), (P(2), Fraction(36, 5))])
def test_script_s_q5(ctx, lam, expected):
    assert script_s(lam, 5, 1, ctx).contains(expected)
    assert script_s_exact(lam, 5, 1) == expected


def test_half_range_direct_and_recursion_agree(ctx):
    for lam in partitions(3):
        direct = half_range_distinct_sum(lam, 11, 1, ctx, method="direct")
        recursion = half_range_distinct_sum(lam, 11, 1, ctx, method="recursion")
        assert direct.overlaps(recursion)


def test_script_s_cross_checked_at_q21(ctx):
    for lam in partitions(2):
        assert script_s(lam, 21, 1, ctx).contains(script_s_exact(lam, 21, 1))


@pytest.mark.parametrize("lam, expected", [(P(1), Fraction(1, 3)), (P(2), Fraction(1, 45)), (P(1, 1), Fraction(4, 45))])
def test_c_lambda(lam, expected):
    assert c_lambda(lam, 1) == expected


@pytest.mark.parametrize("k", [1, 2])
def test_script_s_leading_coefficient(k):
    q = 201
    for n in (1, 2):
        for lam in partitions(n):
            ratio = script_s_exact(lam, q, k) / Fraction(q) ** (2 * n * k)
            assert abs(ratio / c_lambda(lam, k) - 1) < Fraction(5, 100)


# ── Finite-q moments ─────────────────────────────────────────────────────────

def test_exact_moments_q5():
    assert exact_moment(5, 1, 2) == PiPowerRational(Fraction(2, 25), 2)
    assert exact_moment(5, 1, 4) == PiPowerRational(Fraction(24, 3125), 4)
    assert exact_moment(5, 1, 3) == PiPowerRational(0, 0)
    assert exact_moment(7, 1, 2) == PiPowerRational(Fraction(5, 49), 2)


def test_enumeration_q5(ctx):
    second = moment_enumeration(5, 1, 2, ctx).value
    assert abs(float(second) - 0.789568) < 1e-6
    assert second.overlaps(exact_moment(5, 1, 2).to_certified(ctx))
    assert abs(float(moment_enumeration(5, 1, 4, ctx).value) - 0.74810) < 1e-5
    assert moment_enumeration(5, 1, 3, ctx).value.contains(0)


@pytest.mark.parametrize("q", [5, 7, 9, 11])
@pytest.mark.parametrize("order", [2, 4, 6])
def test_partition_formula_matches_enumeration(ctx, q, order):
    partition = moment_partition_formula(q, 1, order, ctx)
    enumeration = moment_enumeration(q, 1, order, ctx)
    assert partition.value.overlaps(enumeration.value)
    assert partition.value.overlaps(partition.exact.to_certified(ctx))
    assert float(partition.value.rad) < 1e-25


def test_partition_formula_needs_odd_k(ctx):
    with pytest.raises(ParityMismatch):
        moment_partition_formula(5, 2, 2, ctx)


def test_paper_formula_is_labelled(ctx):
    report = moment_printed_formula(5, 1, 2, ctx)
    assert report.method is MomentMethod.PAPER
    assert report.label == "paper-literal"
    assert report.to_payload()["label"] == "paper-literal"
    assert moment_partition_formula(5, 1, 2, ctx).label == "corrected"


# ── Limiting moments ─────────────────────────────────────────────────────────

def test_limiting_moments():
    assert limiting_moment(0, 1) == PiPowerRational(1, 0)
    assert limiting_moment(1, 1) == PiPowerRational(Fraction(1, 6), 2)
    assert limiting_moment(2, 1) == PiPowerRational(Fraction(11, 180), 4)


@pytest.mark.parametrize("k", [1, 3])
def test_limiting_moments_match_cumulant_oracle(k):
    for n in range(1, 7):
        assert limiting_moment(n, k) == rademacher_moment(n, k)


def test_printed_limiting_constant_differs():
    assert printed_limiting_moment(1, 1) == PiPowerRational(Fraction(1, 12), 2)
    assert printed_limiting_moment(1, 1) != limiting_moment(1, 1)


@pytest.mark.parametrize("n", [1, 2])
def test_finite_moments_approach_limit(n):
    limit = limiting_moment(n, 1).coefficient
    gaps = [abs(exact_moment(q, 1, 2 * n).coefficient - limit) for q in (51, 101, 151, 201)]
    assert gaps == sorted(gaps, reverse=True)
    assert gaps[-1] < gaps[0]


def test_subgaussian_domination():
    rows = subgaussian_check(6, 1)
    assert len(rows) == 6
    assert all(row.holds for row in rows)
    assert rows[0].moment == rows[0].gaussian_bound


def test_characteristic_function(ctx):
    assert characteristic_function(Fraction(0), 1, 4, ctx).contains(1)
    value = characteristic_function(Fraction(1, 2), 1, 8, ctx)
    assert 0 < float(value) < 1
    assert float(value.rad) < 1e-6
    with pytest.raises(InvalidArgument):
        characteristic_function(Fraction(1), 1, 0, ctx)


# ── Distribution and sampling ────────────────────────────────────────────────

def test_empirical_cdf_q5(ctx):
    table = empirical_cdf(5, 1, ctx, bins=4)
    assert len(table.values) == 4
    assert table.steps[-1][1] == 1
    assert [cdf for _, cdf in table.steps] == [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
    assert sum(count for _, _, count in table.histogram) == 4
    assert table.moment(2).overlaps(exact_moment(5, 1, 2).to_certified(ctx))
    assert table.cdf_at(0) == Fraction(1, 2)


def test_monte_carlo_is_reproducible():
    first = monte_carlo_moments(101, 1, 2, samples=25_000, seed=7)
    again = monte_carlo_moments(101, 1, 2, samples=25_000, seed=7)
    threaded = monte_carlo_moments(101, 1, 2, samples=25_000, seed=7, threads=3)
    assert first.estimate == again.estimate == threaded.estimate
    assert first.to_payload() == threaded.to_payload()
    assert monte_carlo_moments(101, 1, 2, samples=25_000, seed=8).estimate != first.estimate


def test_monte_carlo_mean_is_centred():
    report = monte_carlo_moments(51, 1, 1, samples=20_000, seed=1)
    assert abs(report.estimate) < 4 * report.standard_error


def test_monte_carlo_second_moment_q101():
    report = monte_carlo_moments(101, 1, 2, samples=20_000, seed=3)
    exact = float(exact_moment(101, 1, 2).coefficient) * math.pi ** 2
    assert abs(report.estimate - exact) < 4 * report.standard_error


@pytest.mark.slow
def test_monte_carlo_second_moment_large_q():
    q = 10_001
    report = monte_carlo_moments(q, 1, 2, samples=100_000, seed=2024)
    exact = math.pi ** 2 * (q - 1) * (q - 2) / (6 * q * q)
    assert abs(report.estimate - exact) < 4 * report.standard_error


# ── Discrepancy report ───────────────────────────────────────────────────────

def test_discrepancy_report_flags_printed_constants(ctx):
    report = discrepancy_report(1, 3, ctx)
    assert len(report.rows) == 3
    first = report.rows[0]
    assert first.corrected == PiPowerRational(Fraction(1, 6), 2)
    assert first.printed == PiPowerRational(Fraction(1, 12), 2)
    assert not first.agrees
    assert report.disagreements >= 1
    assert not report.finite_enumeration.overlaps(report.finite_printed)
