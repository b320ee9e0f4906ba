"""
Common service utilities shared across all number-theory features.
Contains the error hierarchy, the ordered worker pool and small exact-arithmetic helpers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Sequence, TypeVar

from app.core.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


# ── Errors ───────────────────────────────────────────────────────────────────

class ErdosToolkitError(Exception):
    """Base class for every domain failure; ``exit_code`` drives the CLI."""

    exit_code = 2
    message = "Invalid input"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.message)
        self.detail = detail or self.message

    def as_payload(self) -> dict:
        return {"status": "error", "message": self.message, "detail": self.detail}


class InvalidModulus(ErdosToolkitError):
    message = "Invalid modulus"


class InvalidPrecision(ErdosToolkitError):
    message = "Invalid precision"


class InvalidArgument(ErdosToolkitError):
    message = "Invalid argument"


class InvalidFunction(ErdosToolkitError):
    message = "Invalid Erdos function"


class ParityMismatch(ErdosToolkitError):
    message = "Parity mismatch"


class SizeMismatch(ErdosToolkitError):
    message = "Partition sizes differ"


class LengthMismatch(ErdosToolkitError):
    message = "Sequence lengths differ"


class SingularArgument(ErdosToolkitError):
    message = "Singular cotangent argument"


class SingularTerm(ErdosToolkitError):
    message = "Singular Dedekind term"


class NotCoprime(ErdosToolkitError):
    message = "Moduli are not pairwise coprime"


class ParityViolation(ErdosToolkitError):
    message = "Reciprocity weight M is odd"


class ReconstructionFailure(ErdosToolkitError):
    message = "Rational reconstruction failed"


class BoundVacuous(ErdosToolkitError):
    message = "Bound is vacuous"


class EmptyPopulation(ErdosToolkitError):
    message = "Empty population"


class PopulationTooLarge(ErdosToolkitError):
    message = "Population exceeds the enumeration guard"


class TailBoundUnavailable(ErdosToolkitError):
    message = "Tail bound unavailable"


class PrecisionExhausted(ErdosToolkitError):
    exit_code = 3
    message = "Precision exhausted"


class CrossCheckFailure(ErdosToolkitError):
    exit_code = 1
    message = "Cross-check failed"


# ── Worker pool ──────────────────────────────────────────────────────────────

def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Apply ``fn`` to every item on a thread pool, returning results in input order.

    ``threads`` defaults to ``ERDOS_THREADS``. A single thread runs inline.
    """
    items = list(items)
    workers = threads if threads is not None else get_settings().threads
    workers = max(1, min(workers, len(items) or 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def rank_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into at most ``parts`` contiguous ``(start, stop)`` blocks."""
    parts = max(1, min(parts, total or 1))
    step, extra = divmod(total, parts)
    ranges, start = [], 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        if stop > start:
            ranges.append((start, stop))
        start = stop
    return ranges


# ── Exact helpers ────────────────────────────────────────────────────────────

def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """Yield every tuple of ``parts`` non-negative integers summing to ``total`` (lex order)."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in compositions(total - head, parts - 1):
            yield (head,) + tail


def fraction_payload(x: Fraction | int) -> dict:
    x = Fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def require_odd_modulus(q: int) -> None:
    if not isinstance(q, int) or q < 3 or q % 2 == 0:
        raise InvalidModulus(f"q must be an odd integer >= 3, got {q!r}")


def product(values: Sequence[Fraction | int]) -> Fraction:
    out = Fraction(1)
    for v in values:
        out *= v
    return out
