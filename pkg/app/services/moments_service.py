"""
Moments service.
Distinct-index cotangent sums over partition shapes, finite-q and limiting
moments of L(k, f), the characteristic function, empirical distributions and
Monte Carlo estimates.

Corrected pipeline (primary):
    m_q(2n) = (pi^k / ((k-1)! q^k))^(2n) * sum_{lam |- n} N(lam) D_q(lam)
with D_q the half-range distinct sums. The literal closed form printed for the
limit theorem is kept as ``MomentMethod.PAPER`` for the discrepancy report only.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Callable

import numpy as np

from app.core.config import get_settings
from app.services.common_service import (
    CrossCheckFailure,
    EmptyPopulation,
    InvalidArgument,
    ParityMismatch,
    TailBoundUnavailable,
    parallel_map,
    require_odd_modulus,
)
from app.services.dedekind_service import leading_coefficient_formula, s_qk, s_qk_exact
from app.services.erdos_service import enumerate_parity, parity_for_k
from app.services.lseries_service import LMethod, closed_form_weights, evaluate_population
from app.services.numeric_service import (
    CertifiedReal,
    PiPowerRational,
    PrecisionContext,
    bernoulli,
    cot_derivative_poly,
    cot_pi_rational,
)
from app.services.partition_service import Partition, block_multiplicity, coarsenings, partitions

logger = logging.getLogger(__name__)

# Direct distinct-index sums are skipped past this many index tuples
DIRECT_SUM_LIMIT = 100_000
# Monte Carlo sign matrices are kept under this many entries per chunk
MC_MATRIX_ENTRIES = 2_000_000


class MomentMethod(str, Enum):
    ENUMERATION = "enumeration"
    PARTITION = "partition"
    PAPER = "paper"
    MONTECARLO = "montecarlo"


@dataclass(frozen=True)
class MomentReport:
    q: int | None
    k: int
    order: int
    method: MomentMethod
    exact: PiPowerRational | None = None
    value: CertifiedReal | None = None
    estimate: float | None = None
    standard_error: float | None = None
    samples: int | None = None
    seed: int | None = None

    @property
    def label(self) -> str:
        return "paper-literal" if self.method is MomentMethod.PAPER else "corrected"

    def to_payload(self) -> dict:
        payload = {
            "q": self.q,
            "k": self.k,
            "order": self.order,
            "method": self.method.value,
            "label": self.label,
            "pi_exponent": None,
            "coefficient_num": None,
            "coefficient_den": None,
            "midpoint": None,
            "radius": None,
            "decimal": None,
        }
        if self.exact is not None:
            payload.update(self.exact.to_payload())
        if self.value is not None:
            payload.update(self.value.to_payload())
        if self.estimate is not None:
            payload.update(
                midpoint=float(self.estimate).hex(),
                decimal=repr(self.estimate),
                standard_error=float(self.standard_error).hex(),
                samples=self.samples,
                seed=self.seed,
            )
        return payload


# ── Distinct-index sums ──────────────────────────────────────────────────────

def _merge_recursion(lam: Partition, base: Callable[[int], object], memo: dict):
    """prod base(lam_i) - sum_{eta < lam} <lam choose eta> value(eta)."""
    if lam in memo:
        return memo[lam]
    value = base(lam.parts[0])
    for part in lam.parts[1:]:
        value = value * base(part)
    for merge in coarsenings(lam):
        value = value - _merge_recursion(merge.eta, base, memo) * merge.count
    memo[lam] = value
    return value


@lru_cache(maxsize=512)
def _half_range_powers(q: int, k: int, ctx: PrecisionContext) -> tuple[CertifiedReal, ...]:
    """x_a^2 = P_{k-1}(cot(pi a/q))^2 for a = 1..(q-1)/2."""
    poly = cot_derivative_poly(k - 1)
    return tuple(poly.evaluate(cot_pi_rational(a, q, ctx)) ** 2 for a in range(1, (q - 1) // 2 + 1))


def _distinct_direct(squares: tuple[CertifiedReal, ...], lam: Partition, ctx: PrecisionContext) -> CertifiedReal:
    total = CertifiedReal.exact_zero(ctx)
    for idx in permutations(range(len(squares)), lam.m):
        term = CertifiedReal.from_rational(1, ctx)
        for i, part in zip(idx, lam.parts):
            term = term * squares[i] ** part
        total = total + term
    return total


def _direct_feasible(points: int, lam: Partition) -> bool:
    return lam.m <= points and math.perm(points, lam.m) <= DIRECT_SUM_LIMIT


def half_range_distinct_sum(lam: Partition, q: int, k: int, ctx: PrecisionContext, method: str = "auto") -> CertifiedReal:
    """sum over distinct a_1..a_m in [1, (q-1)/2] of prod [cot^{(k-1)}(pi a_i/q)]^(2 lam_i)."""
    require_odd_modulus(q)
    squares = _half_range_powers(q, k, ctx)
    if lam.m > len(squares):
        return CertifiedReal.exact_zero(ctx)
    if method == "direct" or (method == "auto" and lam.m <= 3 and _direct_feasible(len(squares), lam)):
        return _distinct_direct(squares, lam, ctx)

    def power_sum(u: int) -> CertifiedReal:
        total = CertifiedReal.exact_zero(ctx)
        for x in squares:
            total = total + x ** u
        return total

    return _merge_recursion(lam, lru_cache(maxsize=None)(power_sum), {})


def script_s(lam: Partition, q: int, k: int, ctx: PrecisionContext, method: str = "auto") -> CertifiedReal:
    """Full-range distinct sum (indices in [1, q-1]) by the merge recursion on S_{q,k}^{(u)}.

    ``auto`` also sums directly when that is cheap and raises CrossCheckFailure if the
    two disagree.
    """
    if q < 2:
        return CertifiedReal.exact_zero(ctx)
    base = lru_cache(maxsize=None)(lambda u: s_qk(u, q, k, ctx))
    recursive = _merge_recursion(lam, base, {})
    if method == "recursion" or (method == "auto" and not _direct_feasible(q - 1, lam)):
        return recursive
    poly = cot_derivative_poly(k - 1)
    squares = tuple(poly.evaluate(cot_pi_rational(t, q, ctx)) ** 2 for t in range(1, q))
    direct = _distinct_direct(squares, lam, ctx) if lam.m <= len(squares) else CertifiedReal.exact_zero(ctx)
    if method == "direct":
        return direct
    if not direct.overlaps(recursive):
        raise CrossCheckFailure(f"script S{lam} at q={q}: direct {direct!r} vs recursion {recursive!r}")
    return recursive


def script_s_exact(lam: Partition, q: int, k: int) -> Fraction:
    return _merge_recursion(lam, lambda u: s_qk_exact(u, q, k), {})


def half_range_distinct_exact(lam: Partition, q: int, k: int) -> Fraction:
    """D_q(lam) exactly, using H(u) = S_{q,k}^{(u)} / 2."""
    return _merge_recursion(lam, lambda u: s_qk_exact(u, q, k) / 2, {})


@lru_cache(maxsize=1024)
def c_lambda(lam: Partition, k: int) -> Fraction:
    """Leading q^(2nk) coefficient of script S: the merge recursion on the S-polynomial leading terms."""
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    return _merge_recursion(lam, lambda u: leading_coefficient_formula(u, k), {})


def _limit_distinct(lam: Partition, k: int) -> Fraction:
    return _merge_recursion(lam, lambda u: leading_coefficient_formula(u, k) / 2, {})


# ── Finite-q moments ─────────────────────────────────────────────────────────

def _require_odd_k(k: int) -> None:
    if k < 1 or k % 2 == 0:
        raise ParityMismatch("partition and limiting formulas need the odd population (k odd)")


def exact_moment(q: int, k: int, order: int) -> PiPowerRational:
    """m_q(order) exactly, from the polynomial half-range power sums."""
    require_odd_modulus(q)
    _require_odd_k(k)
    if order % 2:
        return PiPowerRational(0, 0)
    n = order // 2
    if n == 0:
        return PiPowerRational(1, 0)
    total = sum((block_multiplicity(lam) * half_range_distinct_exact(lam, q, k) for lam in partitions(n)), Fraction(0))
    return PiPowerRational(total / (factorial(k - 1) ** order * q ** (k * order)), k * order)


def moment_enumeration(q: int, k: int, order: int, ctx: PrecisionContext, threads: int | None = None) -> MomentReport:
    """Average of L(k, f)^order over the parity-matching population (closed form per f)."""
    require_odd_modulus(q)
    if order < 0:
        raise InvalidArgument("order must be non-negative")
    population = list(enumerate_parity(q, parity_for_k(k)))
    if not population:
        raise EmptyPopulation(f"no {parity_for_k(k).value} Erdos functions mod {q}")
    values = evaluate_population(population, k, LMethod.CLOSED, ctx, threads)
    total = CertifiedReal.exact_zero(ctx)
    for v in values:
        total = total + v ** order
    return MomentReport(q, k, order, MomentMethod.ENUMERATION, value=total / len(population))


def moment_partition_formula(q: int, k: int, order: int, ctx: PrecisionContext) -> MomentReport:
    """Corrected partition formula, certified from cotangent values; the exact value rides along."""
    require_odd_modulus(q)
    _require_odd_k(k)
    exact = exact_moment(q, k, order)
    if order % 2 or order == 0:
        return MomentReport(q, k, order, MomentMethod.PARTITION, exact=exact, value=exact.to_certified(ctx))
    n = order // 2
    total = CertifiedReal.exact_zero(ctx)
    for lam in partitions(n):
        total = total + half_range_distinct_sum(lam, q, k, ctx) * block_multiplicity(lam)
    scale = (CertifiedReal.pi(ctx) ** k / (factorial(k - 1) * q ** k)) ** order
    return MomentReport(q, k, order, MomentMethod.PARTITION, exact=exact, value=scale * total)


def printed_moment(q: int, k: int, order: int) -> PiPowerRational:
    """The printed finite-q display: pi^k / ((k-1)!^(2n) 2^(2n) q^(2kn)) * sum_lam script S(lam)."""
    require_odd_modulus(q)
    if order % 2:
        return PiPowerRational(0, 0)
    n = order // 2
    if n == 0:
        return PiPowerRational(1, 0)
    total = sum((script_s_exact(lam, q, k) for lam in partitions(n)), Fraction(0))
    return PiPowerRational(total / (factorial(k - 1) ** order * 2 ** order * q ** (k * order)), k)


def moment_printed_formula(q: int | None, k: int, order: int, ctx: PrecisionContext) -> MomentReport:
    if order % 2:
        exact = PiPowerRational(0, 0)
    elif q is None:
        exact = printed_limiting_moment(order // 2, k)
    else:
        exact = printed_moment(q, k, order)
    logger.warning("paper-literal moment requested (q=%s, k=%s, order=%s); comparison only", q, k, order)
    return MomentReport(q, k, order, MomentMethod.PAPER, exact=exact, value=exact.to_certified(ctx))


# ── Limiting moments ─────────────────────────────────────────────────────────

@lru_cache(maxsize=256)
def limiting_moment(n: int, k: int) -> PiPowerRational:
    """M(2n) = pi^(2nk) / ((k-1)!)^(2n) * sum_lam N(lam) d(lam), gamma_u = half the S leading coefficient."""
    _require_odd_k(k)
    if n < 0:
        raise InvalidArgument("n must be non-negative")
    if n == 0:
        return PiPowerRational(1, 0)
    total = sum((block_multiplicity(lam) * _limit_distinct(lam, k) for lam in partitions(n)), Fraction(0))
    return PiPowerRational(total / factorial(k - 1) ** (2 * n), 2 * n * k)


def printed_limiting_moment(n: int, k: int) -> PiPowerRational:
    """pi^(2nk) / (((k-1)!)^(2n) 2^(2n)) * sum_lam c(lam), as printed."""
    if n == 0:
        return PiPowerRational(1, 0)
    total = sum((c_lambda(lam, k) for lam in partitions(n)), Fraction(0))
    return PiPowerRational(total / (factorial(k - 1) ** (2 * n) * 2 ** (2 * n)), 2 * n * k)


def rademacher_moment(n: int, k: int) -> PiPowerRational:
    """E[X^(2n)] for X = sum_a c_a eps_a in the q -> infinity limit, via cumulants.

    log cosh x = sum_j 2^(2j) (2^(2j) - 1) B_2j / (2j (2j)!) x^(2j), so the 2j-th cumulant is
    (2j)! times that coefficient times the limiting power sum gamma_j / ((k-1)!)^(2j).
    Independent of the merge-count machinery.
    """
    _require_odd_k(k)
    if n == 0:
        return PiPowerRational(1, 0)
    cumulants = {}
    for j in range(1, n + 1):
        log_cosh = Fraction(2 ** (2 * j) * (2 ** (2 * j) - 1)) * bernoulli(2 * j) / (2 * j * factorial(2 * j))
        gamma = leading_coefficient_formula(j, k) / 2
        cumulants[2 * j] = factorial(2 * j) * log_cosh * gamma / factorial(k - 1) ** (2 * j)
    moments = {0: Fraction(1)}
    for m in range(1, 2 * n + 1):
        moments[m] = sum(
            (math.comb(m - 1, i - 1) * cumulants.get(i, 0) * moments[m - i] for i in range(1, m + 1)),
            Fraction(0),
        )
    return PiPowerRational(moments[2 * n], 2 * n * k)


@dataclass(frozen=True)
class DominationRow:
    n: int
    moment: PiPowerRational
    gaussian_bound: PiPowerRational
    holds: bool


def subgaussian_check(max_n: int, k: int) -> list[DominationRow]:
    """Exact M(2n) <= (2n)! / (2^n n!) M(2)^n for n = 1..max_n."""
    sigma2 = limiting_moment(1, k)
    rows = []
    for n in range(1, max_n + 1):
        moment = limiting_moment(n, k)
        bound = sigma2 ** n * Fraction(factorial(2 * n), 2 ** n * factorial(n))
        rows.append(DominationRow(n, moment, bound, moment <= bound))
    return rows


def characteristic_function(t: Fraction, k: int, truncation: int, ctx: PrecisionContext) -> CertifiedReal:
    """sum_{n<=N} (-1)^n M(2n) t^(2n) / (2n)!, radius from the sub-Gaussian tail x^(N+1)/(N+1)! e^x, x = M(2) t^2 / 2."""
    if truncation < 1:
        raise InvalidArgument("truncation must be >= 1")
    if not all(row.holds for row in subgaussian_check(truncation, k)):
        raise TailBoundUnavailable(f"moment domination fails below n={truncation}")
    t = CertifiedReal.from_rational(Fraction(t), ctx)
    t2 = t * t
    total = CertifiedReal.exact_zero(ctx)
    for n in range(truncation + 1):
        term = limiting_moment(n, k).to_certified(ctx) * t2 ** n / factorial(2 * n)
        total = total + term if n % 2 == 0 else total - term
    x = limiting_moment(1, k).to_certified(ctx) * t2 / 2
    tail = x ** (truncation + 1) / factorial(truncation + 1) * x.exp()
    return total.widen(tail.upper)


# ── Distributions ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DistributionTable:
    q: int
    k: int
    values: tuple[CertifiedReal, ...]
    steps: tuple[tuple[CertifiedReal, Fraction], ...]
    histogram: tuple[tuple[float, float, int], ...] = field(default=())

    def cdf_at(self, x) -> Fraction:
        x = float(x)
        return Fraction(sum(1 for v in self.values if float(v.mid) <= x), len(self.values))

    def moment(self, order: int) -> CertifiedReal:
        total = CertifiedReal.exact_zero(self.values[0].bits)
        for v in self.values:
            total = total + v ** order
        return total / len(self.values)


def empirical_cdf(q: int, k: int, ctx: PrecisionContext, bins: int = 10, threads: int | None = None) -> DistributionTable:
    """Step CDF of L(k, f) over the parity-matching population plus fixed-width histogram bins."""
    require_odd_modulus(q)
    population = list(enumerate_parity(q, parity_for_k(k)))
    if not population:
        raise EmptyPopulation(f"no {parity_for_k(k).value} Erdos functions mod {q}")
    values = sorted(evaluate_population(population, k, LMethod.CLOSED, ctx, threads), key=lambda v: v.mid)
    size = len(values)
    steps = []
    for i, v in enumerate(values):
        if i + 1 < size and values[i + 1].mid == v.mid:
            continue
        steps.append((v, Fraction(i + 1, size)))
    mids = np.array([float(v.mid) for v in values], dtype=np.float64)
    counts, edges = np.histogram(mids, bins=max(1, bins))
    histogram = tuple((float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts)))
    return DistributionTable(q, k, tuple(values), tuple(steps), histogram)


def _float_weights(q: int, k: int) -> np.ndarray:
    """c_a as float64 for a = 1..(q-1)/2 (sign irrelevant under symmetric signs)."""
    a = np.arange(1, (q - 1) // 2 + 1, dtype=np.float64)
    cot = 1.0 / np.tan(np.pi * a / q)
    coeffs = cot_derivative_poly(k - 1).coefficients
    values = np.polyval(np.array(coeffs[::-1], dtype=np.float64), cot)
    return values * np.pi ** k / (factorial(k - 1) * float(q) ** k)


def monte_carlo_moments(
    q: int,
    k: int,
    order: int,
    samples: int,
    seed: int,
    chunk: int | None = None,
    threads: int | None = None,
) -> MomentReport:
    """Sample moment of L(k, f) for iid uniform signs on 1..(q-1)/2.

    Chunk boundaries and per-chunk seeds (``SeedSequence(seed).spawn``) depend only on
    the inputs, and partial sums are combined in chunk order, so the result does not
    depend on the thread count.
    """
    require_odd_modulus(q)
    if k % 2 == 0:
        raise ParityMismatch("Monte Carlo sampling covers the odd population only")
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    weights = _float_weights(q, k)
    r = len(weights)
    rows = max(1, min(chunk or get_settings().mc_chunk, MC_MATRIX_ENTRIES // max(r, 1)))
    sizes = [min(rows, samples - start) for start in range(0, samples, rows)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(job: tuple[int, np.random.SeedSequence]) -> tuple[float, float]:
        size, seq = job
        rng = np.random.default_rng(seq)
        signs = rng.integers(0, 2, size=(size, r), dtype=np.int8).astype(np.float64) * 2.0 - 1.0
        powers = (signs @ weights) ** order
        return float(powers.sum()), float((powers * powers).sum())

    partials = parallel_map(run, list(zip(sizes, seeds)), threads)
    total = sum(p[0] for p in partials)
    total_sq = sum(p[1] for p in partials)
    mean = total / samples
    if samples > 1:
        variance = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
        stderr = math.sqrt(variance / samples)
    else:
        stderr = float("inf")
    logger.info("monte carlo q=%s k=%s order=%s: %s samples in %s chunks", q, k, order, samples, len(sizes))
    return MomentReport(
        q, k, order, MomentMethod.MONTECARLO, estimate=mean, standard_error=stderr, samples=samples, seed=seed
    )


# ── Discrepancy report ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class DiscrepancyRow:
    n: int
    corrected: PiPowerRational
    printed: PiPowerRational
    oracle: PiPowerRational
    agrees: bool


@dataclass(frozen=True)
class DiscrepancyReport:
    k: int
    rows: tuple[DiscrepancyRow, ...]
    finite_q: int
    finite_enumeration: CertifiedReal
    finite_printed: CertifiedReal

    @property
    def disagreements(self) -> int:
        return sum(1 for row in self.rows if not row.agrees)


def discrepancy_report(k: int, max_n: int, ctx: PrecisionContext, finite_q: int = 5) -> DiscrepancyReport:
    """Corrected vs printed limiting moments, plus m_q(2) by enumeration vs the printed finite-q display."""
    _require_odd_k(k)
    rows = []
    for n in range(1, max_n + 1):
        corrected = limiting_moment(n, k)
        printed = printed_limiting_moment(n, k)
        oracle = rademacher_moment(n, k)
        if corrected != oracle:
            raise CrossCheckFailure(f"limiting moment M({2 * n}) disagrees with the cumulant oracle")
        agrees = corrected == printed
        if not agrees:
            logger.warning("printed M(%s) = %s differs from corrected %s", 2 * n, printed, corrected)
        rows.append(DiscrepancyRow(n, corrected, printed, oracle, agrees))
    enumeration = moment_enumeration(finite_q, k, 2, ctx).value
    printed_finite = printed_moment(finite_q, k, 2).to_certified(ctx)
    return DiscrepancyReport(k, tuple(rows), finite_q, enumeration, printed_finite)
