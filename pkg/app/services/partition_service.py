"""
Partition service.
Integer partitions, the merge order and its labelled multiplicities, p(n) and
the Hardy-Ramanujan estimate.
"""
from __future__ import annotations

import logging
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial

from app.services.common_service import InvalidArgument, SizeMismatch
from app.services.numeric_service import CertifiedReal, PrecisionContext

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(sorted((int(p) for p in self.parts), reverse=True))
        if any(p < 1 for p in parts):
            raise InvalidArgument("partition parts must be positive")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def m(self) -> int:
        return len(self.parts)

    def multiplicities(self) -> Counter:
        return Counter(self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class MergeCount:
    lam: Partition
    eta: Partition
    count: int


# ── Enumeration and counting ─────────────────────────────────────────────────

def _descending(n: int, largest: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _descending(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=64)
def partitions(n: int) -> tuple[Partition, ...]:
    """All partitions of n, reverse-lexicographic: (4), (3,1), (2,2), (2,1,1), (1,1,1,1)."""
    if n < 0:
        raise InvalidArgument("n must be non-negative")
    return tuple(Partition(p) for p in _descending(n, n))


_P: list[int] = [1]
_P_LOCK = threading.Lock()


def partition_count(n: int) -> int:
    """p(n) by Euler's pentagonal-number recurrence."""
    if n < 0:
        return 0
    with _P_LOCK:
        while len(_P) <= n:
            m = len(_P)
            total, j = 0, 1
            while True:
                g1 = j * (3 * j - 1) // 2
                if g1 > m:
                    break
                sign = 1 if j % 2 else -1
                total += sign * _P[m - g1]
                g2 = j * (3 * j + 1) // 2
                if g2 <= m:
                    total += sign * _P[m - g2]
                j += 1
            _P.append(total)
        return _P[n]


def hardy_ramanujan_estimate(n: int, ctx: PrecisionContext) -> CertifiedReal:
    """exp(pi sqrt(2n/3)) / (4 sqrt(3) n)."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    pi = CertifiedReal.pi(ctx)
    exponent = pi * CertifiedReal.from_rational(Fraction(2 * n, 3), ctx).sqrt()
    return exponent.exp() / (CertifiedReal.from_rational(3, ctx).sqrt() * (4 * n))


# ── Merge order ──────────────────────────────────────────────────────────────

@lru_cache(maxsize=4096)
def _merge_ways(parts: tuple[int, ...], targets: tuple[int, ...]) -> int:
    """Set partitions of the labelled ``parts`` whose block sums are the multiset ``targets``.

    The block holding the first part is chosen explicitly, so each set partition is
    counted once.
    """
    if not parts:
        return 0 if targets else 1
    first, rest = parts[0], parts[1:]
    remaining = Counter(targets)
    total = 0
    for size in range(len(rest) + 1):
        for picked in combinations(range(len(rest)), size):
            block = first + sum(rest[i] for i in picked)
            if remaining[block] == 0:
                continue
            left = tuple(rest[i] for i in range(len(rest)) if i not in picked)
            after = remaining.copy()
            after[block] -= 1
            total += _merge_ways(tuple(sorted(left, reverse=True)), tuple(sorted(after.elements(), reverse=True)))
    return total


def merge_count(lam: Partition, eta: Partition) -> int:
    """<lam choose eta>: ways to merge the labelled parts of ``lam`` into ``eta``."""
    if lam.n != eta.n:
        raise SizeMismatch(f"|{lam}| = {lam.n} but |{eta}| = {eta.n}")
    if eta.m > lam.m:
        return 0
    return _merge_ways(lam.parts, eta.parts)


def precedes(eta: Partition, lam: Partition) -> bool:
    """eta < lam in the merge order (eta is a strict coarsening of lam)."""
    return eta.n == lam.n and eta != lam and merge_count(lam, eta) > 0


@lru_cache(maxsize=1024)
def coarsenings(lam: Partition) -> tuple[MergeCount, ...]:
    """Every strict coarsening of ``lam`` with its merge multiplicity."""
    return tuple(
        MergeCount(lam, eta, c)
        for eta in partitions(lam.n)
        if eta != lam and eta.m < lam.m and (c := merge_count(lam, eta)) > 0
    )


def block_multiplicity(lam: Partition) -> int:
    """N(lam) = (2n)! / (prod (2 lam_i)! * prod mult_s!)."""
    denom = 1
    for part in lam.parts:
        denom *= factorial(2 * part)
    for mult in lam.multiplicities().values():
        denom *= factorial(mult)
    return factorial(2 * lam.n) // denom

