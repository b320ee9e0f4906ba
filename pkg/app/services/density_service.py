"""
Density service.
Exhaustive certified non-vanishing scans of L(1, f), per-class zero counts,
vanishing-set bounds, central-binomial and factorial bounds and the density ratio.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Sequence

from app.core.config import get_settings
from app.services.common_service import (
    CrossCheckFailure,
    InvalidArgument,
    LengthMismatch,
    PopulationTooLarge,
    PrecisionExhausted,
    binomial,
    parallel_map,
    rank_ranges,
    require_odd_modulus,
)
from app.services.erdos_service import (
    ErdosFunction,
    EquivalenceKey,
    enumerate_erdos,
    equivalence_classes,
    equivalence_key,
    population_size,
)
from app.services.lseries_service import CertifiedNonzero, certify_nonzero, l1_digamma
from app.services.numeric_service import CertifiedReal, PrecisionContext, euler_totient

logger = logging.getLogger(__name__)


class DensityMode(str, Enum):
    EXACT = "exact"
    BOUND = "bound"


@dataclass(frozen=True)
class VerificationRecord:
    q: int
    population: int
    min_abs: CertifiedReal
    certified_zero_count: int
    undecided_count: int
    final_precision_bits: int
    escalations: int

    def to_payload(self) -> dict:
        return {
            "q": self.q,
            "population": self.population,
            "min_abs_l1": self.min_abs.to_payload(),
            "certified_zero_count": self.certified_zero_count,
            "undecided_count": self.undecided_count,
            "final_precision_bits": self.final_precision_bits,
            "escalations": self.escalations,
        }


@dataclass(frozen=True)
class ScanResult:
    rank: int
    function: ErdosFunction
    abs_value: CertifiedReal
    decided: bool
    precision_bits: int


@dataclass(frozen=True)
class ClassZeroCount:
    key: EquivalenceKey
    size: int
    zero_candidates: int


@dataclass(frozen=True)
class DensityReport:
    x: int
    mode: DensityMode
    numerator: int
    denominator: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def to_payload(self) -> dict:
        return {
            "x": self.x,
            "mode": self.mode.value,
            "numerator": str(self.numerator),
            "denominator": str(self.denominator),
            "ratio": {"num": str(self.ratio.numerator), "den": str(self.ratio.denominator)},
            "ratio_decimal": f"{float(self.ratio):.12g}",
        }


# ── Certified scans ──────────────────────────────────────────────────────────

_VERIFIED: dict[int, VerificationRecord] = {}
_VERIFIED_LOCK = threading.Lock()


def _certify_with_escalation(f: ErdosFunction, ctx: PrecisionContext, max_bits: int) -> tuple[CertifiedReal, bool, int]:
    current = ctx
    while True:
        value = l1_digamma(f, current)
        verdict = certify_nonzero(value)
        if isinstance(verdict, CertifiedNonzero):
            return (value if verdict.sign > 0 else -value), True, current.precision_bits
        if current.precision_bits * 2 > max_bits:
            logger.warning("L(1, %s) undecided at %s bits: %r", f, current.precision_bits, value)
            return value, False, current.precision_bits
        logger.info("escalating L(1, %s) from %s bits", f, current.precision_bits)
        current = current.escalated()


def _guard(q: int) -> None:
    require_odd_modulus(q)
    limit = get_settings().enumeration_max_q
    if q > limit:
        raise PopulationTooLarge(f"q={q} exceeds ERDOS_ENUMERATION_MAX_Q={limit} ({population_size(q)} functions)")


def scan_population(q: int, ctx: PrecisionContext, threads: int | None = None) -> list[ScanResult]:
    """Certify every L(1, f), f in E_q, over ranked sub-ranges; results in rank order."""
    _guard(q)
    settings = get_settings()
    workers = threads if threads is not None else settings.threads
    max_bits = max(settings.max_precision_bits, ctx.precision_bits)

    def run(bounds: tuple[int, int]) -> list[ScanResult]:
        start, stop = bounds
        out = []
        for rank, f in enumerate(enumerate_erdos(q, start, stop), start=start):
            value, decided, bits = _certify_with_escalation(f, ctx, max_bits)
            out.append(ScanResult(rank, f, value, decided, bits))
        return out

    chunks = parallel_map(run, rank_ranges(population_size(q), workers * 4), workers)
    return [result for chunk in chunks for result in chunk]


def count_vanishing(q: int, ctx: PrecisionContext, threads: int | None = None) -> VerificationRecord:
    """Certified count of zeros of L(1, f) over E_q (zeros are never certified, only non-zeros)."""
    results = scan_population(q, ctx, threads)
    undecided = [r for r in results if not r.decided]
    smallest = min(results, key=lambda r: r.abs_value.mid)
    record = VerificationRecord(
        q=q,
        population=len(results),
        min_abs=smallest.abs_value,
        certified_zero_count=0,
        undecided_count=len(undecided),
        final_precision_bits=max(r.precision_bits for r in results),
        escalations=sum(1 for r in results if r.precision_bits != ctx.precision_bits),
    )
    if undecided:
        raise PrecisionExhausted(
            f"q={q}: {len(undecided)} value(s) undecided, first {undecided[0].function}; record {record.to_payload()}"
        )
    with _VERIFIED_LOCK:
        _VERIFIED[q] = record
    return record


def class_zero_proposition_check(q: int, ctx: PrecisionContext, threads: int | None = None) -> list[ClassZeroCount]:
    """Zero candidates (values left undecided) per ~-class; at most one may sit in any class."""
    results = scan_population(q, ctx, threads)
    candidates: dict[EquivalenceKey, int] = {}
    for r in results:
        if not r.decided:
            key = equivalence_key(r.function)
            candidates[key] = candidates.get(key, 0) + 1
    rows = [ClassZeroCount(key, size, candidates.get(key, 0)) for key, size in equivalence_classes(q)]
    crowded = [row for row in rows if row.zero_candidates > 1]
    if crowded:
        raise CrossCheckFailure(f"q={q}: class {crowded[0].key.to_signs()} holds {crowded[0].zero_candidates} zero candidates")
    return rows


# ── Bounds ───────────────────────────────────────────────────────────────────

def vanishing_bound(q: int) -> int:
    """|V_q| <= 2^(q - 1 - phi(q))."""
    require_odd_modulus(q)
    return 2 ** (q - 1 - euler_totient(q))


@dataclass(frozen=True)
class BinomialBoundRecord:
    r: int
    exact: int
    bound: CertifiedReal
    holds: bool


def central_binomial_lower(r: int, ctx: PrecisionContext) -> BinomialBoundRecord:
    """C(2r, r) against 2^(2r) / (e^2 sqrt(pi r))."""
    if r < 1:
        raise InvalidArgument("r must be >= 1")
    e2 = CertifiedReal.from_rational(2, ctx).exp()
    root = (CertifiedReal.pi(ctx) * r).sqrt()
    bound = CertifiedReal.from_rational(4 ** r, ctx) / (e2 * root)
    exact = binomial(2 * r, r)
    return BinomialBoundRecord(r, exact, bound, bound.upper <= exact)


@dataclass(frozen=True)
class FactorialBoundRecord:
    n: int
    lower: CertifiedReal
    exact: int
    upper: CertifiedReal
    holds: bool


def robbins_factorial_bounds(n: int, ctx: PrecisionContext) -> FactorialBoundRecord:
    """sqrt(2 pi) n^(n+1/2) e^-n < n! < sqrt(2 pi) e n^(n+1/2) e^-n."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    stirling = (
        (CertifiedReal.pi(ctx) * 2).sqrt()
        * CertifiedReal.from_rational(n ** n, ctx)
        * CertifiedReal.from_rational(n, ctx).sqrt()
        * CertifiedReal.from_rational(-n, ctx).exp()
    )
    upper = stirling * CertifiedReal.from_rational(1, ctx).exp()
    exact = factorial(n)
    return FactorialBoundRecord(n, stirling, exact, upper, stirling.upper < exact < upper.lower)


# ── Density ratio ────────────────────────────────────────────────────────────

def _exact_vanishing(q: int, ctx: PrecisionContext, threads: int | None) -> int:
    with _VERIFIED_LOCK:
        record = _VERIFIED.get(q)
    if record is None:
        record = count_vanishing(q, ctx, threads)
    return record.certified_zero_count


def density_table(
    max_x: int,
    mode: DensityMode,
    ctx: PrecisionContext | None = None,
    threads: int | None = None,
) -> list[DensityReport]:
    """One DensityReport per odd cutoff 3 <= x <= max_x.

    ``EXACT`` uses certified |V_q| up to the enumeration guard (scanning any q not yet
    verified in this process) and the bound beyond it.
    """
    if max_x < 3:
        raise InvalidArgument("x must be >= 3")
    mode = DensityMode(mode)
    ctx = ctx or PrecisionContext.from_settings()
    guard = get_settings().enumeration_max_q
    numerator = denominator = 0
    rows = []
    for q in range(3, max_x + 1, 2):
        if mode is DensityMode.EXACT and q <= guard:
            numerator += _exact_vanishing(q, ctx, threads)
        else:
            numerator += vanishing_bound(q)
        denominator += population_size(q)
        rows.append(DensityReport(q, mode, numerator, denominator))
    return rows


def density_ratio(
    x: int,
    mode: DensityMode,
    ctx: PrecisionContext | None = None,
    threads: int | None = None,
) -> DensityReport:
    report = density_table(x, mode, ctx, threads)[-1]
    return replace(report, x=x)


# ── Partial-sum diagnostic ───────────────────────────────────────────────────

@dataclass(frozen=True)
class StolzRow:
    n: int
    term_ratio: object
    cumulative_ratio: object


def stolz_ratio_diagnostic(a: Sequence, b: Sequence, first_index: int = 1) -> list[StolzRow]:
    """Term ratios a_n/b_n next to partial-sum ratios (a_1+..+a_n)/(b_1+..+b_n)."""
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} terms against {len(b)}")
    if any(x <= 0 for x in b):
        raise InvalidArgument("b_n must be positive")
    rows, sum_a, sum_b = [], 0, 0
    for i, (x, y) in enumerate(zip(a, b)):
        sum_a += x
        sum_b += y
        rows.append(StolzRow(first_index + i, x / y, sum_a / sum_b))
    return rows


def comparison_sequences(n_max: int, ctx: PrecisionContext | None = None, start: int = 3) -> tuple[list, list]:
    """a_n = 2^(2n - 2n / log log n), b_n = 2^(2n) / sqrt(n) for start <= n <= n_max (mpmath floats)."""
    ctx = ctx or PrecisionContext.from_settings()
    mp = ctx.mp
    if start < 3:
        raise InvalidArgument("log log n needs n >= 3")
    a, b = [], []
    for n in range(start, n_max + 1):
        a.append(mp.power(2, 2 * n - 2 * n / mp.log(mp.log(n))))
        b.append(mp.power(2, 2 * n) / mp.sqrt(n))
    return a, b
