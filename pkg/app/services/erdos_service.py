"""
Erdos function service.
Representation, lexicographic enumeration with ranking, parity classes and the
equivalence relation "agree on every residue not coprime to q".
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product
from math import gcd
from typing import Iterator

from app.services.common_service import (
    InvalidFunction,
    InvalidModulus,
    ParityMismatch,
    binomial,
    require_odd_modulus,
)
from app.services.numeric_service import euler_totient

logger = logging.getLogger(__name__)

_SIGN_CHARS = {"+": 1, "-": -1, "−": -1, "0": 0}
_CHAR_FOR = {1: "+", -1: "-", 0: "0"}


class ParityClass(str, Enum):
    ODD = "odd"
    EVEN = "even"
    NEITHER = "neither"


def parity_for_k(k: int) -> ParityClass:
    """Population whose closed form exists at order ``k``."""
    return ParityClass.ODD if k % 2 == 1 else ParityClass.EVEN


@dataclass(frozen=True)
class ErdosFunction:
    """q-periodic sign assignment; ``values[a - 1]`` is f(a) for a = 1..q."""

    q: int
    values: tuple[int, ...]

    def __post_init__(self):
        require_odd_modulus(self.q)
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.q:
            raise InvalidFunction(f"expected {self.q} values, got {len(values)}")
        if values[-1] != 0:
            raise InvalidFunction("f(q) must be 0")
        if any(v not in (1, -1) for v in values[:-1]):
            raise InvalidFunction("f(a) must be +1 or -1 for 1 <= a < q")
        if sum(values) != 0:
            raise InvalidFunction("values must sum to zero over a period")

    @property
    def r(self) -> int:
        return (self.q - 1) // 2

    def __call__(self, a: int) -> int:
        return self.values[(a - 1) % self.q]

    @property
    def plus_positions(self) -> tuple[int, ...]:
        return tuple(a for a in range(1, self.q) if self.values[a - 1] == 1)

    def to_signs(self) -> str:
        return "".join(_CHAR_FOR[v] for v in self.values)

    @classmethod
    def from_signs(cls, signs: str) -> "ErdosFunction":
        signs = signs.strip()
        try:
            values = tuple(_SIGN_CHARS[ch] for ch in signs)
        except KeyError as exc:
            raise InvalidFunction(f"unexpected sign character {exc.args[0]!r}") from None
        return cls(len(values), values)

    def __str__(self) -> str:
        return self.to_signs()


@dataclass(frozen=True)
class EquivalenceKey:
    q: int
    residues: tuple[int, ...]
    signs: tuple[int, ...]

    def to_signs(self) -> str:
        return "".join(_CHAR_FOR[s] for s in self.signs)

    def sort_key(self) -> tuple[int, ...]:
        return tuple(-s for s in self.signs)


# ── Counting ─────────────────────────────────────────────────────────────────

def population_size(q: int) -> int:
    require_odd_modulus(q)
    return binomial(q - 1, (q - 1) // 2)


def parity_population_size(q: int, parity: ParityClass) -> int:
    require_odd_modulus(q)
    r = (q - 1) // 2
    if parity is ParityClass.ODD:
        return 2 ** r
    if parity is ParityClass.EVEN:
        return binomial(r, r // 2) if r % 2 == 0 else 0
    raise ParityMismatch("parity populations are defined for odd and even only")


def non_coprime_residues(q: int) -> tuple[int, ...]:
    """N_q: residues 1 <= a < q sharing a factor with q."""
    return tuple(a for a in range(1, q) if gcd(a, q) != 1)


# ── Ranking (combinatorial number system, lexicographic) ────────────────────

def _unrank_combination(n: int, r: int, rank: int) -> list[int]:
    out, x = [], 0
    for i in range(r):
        while True:
            block = binomial(n - x - 1, r - i - 1)
            if rank < block:
                break
            rank -= block
            x += 1
        out.append(x)
        x += 1
    return out


def _rank_combination(n: int, positions: list[int]) -> int:
    r = len(positions)
    rank, previous = 0, -1
    for i, c in enumerate(positions):
        for y in range(previous + 1, c):
            rank += binomial(n - y - 1, r - i - 1)
        previous = c
    return rank


def _advance(c: list[int], n: int) -> bool:
    r = len(c)
    i = r - 1
    while i >= 0 and c[i] == n - r + i:
        i -= 1
    if i < 0:
        return False
    c[i] += 1
    for j in range(i + 1, r):
        c[j] = c[j - 1] + 1
    return True


def _from_positions(q: int, positions) -> ErdosFunction:
    values = [-1] * q
    values[-1] = 0
    for x in positions:
        values[x] = 1
    return ErdosFunction(q, tuple(values))


def unrank_erdos(q: int, rank: int) -> ErdosFunction:
    total = population_size(q)
    if not 0 <= rank < total:
        raise InvalidModulus(f"rank {rank} outside [0, {total}) for q={q}")
    return _from_positions(q, _unrank_combination(q - 1, (q - 1) // 2, rank))


def rank_of(f: ErdosFunction) -> int:
    return _rank_combination(f.q - 1, [a - 1 for a in f.plus_positions])


def enumerate_erdos(q: int, start: int = 0, stop: int | None = None) -> Iterator[ErdosFunction]:
    """Yield E_q in lexicographic order of the +1 positions, restricted to ranks [start, stop)."""
    total = population_size(q)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    n, r = q - 1, (q - 1) // 2
    current = _unrank_combination(n, r, start)
    for _ in range(stop - start):
        yield _from_positions(q, current)
        if not _advance(current, n):
            break


def enumerate_parity(q: int, parity: ParityClass) -> Iterator[ErdosFunction]:
    """Odd: free signs on 1..r in ``product((1, -1))`` order. Even: balanced halves, mirrored."""
    require_odd_modulus(q)
    r = (q - 1) // 2
    if parity is ParityClass.ODD:
        for half in product((1, -1), repeat=r):
            yield _mirror(q, half, -1)
    elif parity is ParityClass.EVEN:
        if r % 2 == 1:
            return
        for plus in combinations(range(r), r // 2):
            half = [-1] * r
            for i in plus:
                half[i] = 1
            yield _mirror(q, half, 1)
    else:
        raise ParityMismatch("parity populations are defined for odd and even only")


def _mirror(q: int, half, reflection: int) -> ErdosFunction:
    values = [0] * q
    for a, s in enumerate(half, start=1):
        values[a - 1] = s
        values[q - a - 1] = reflection * s
    return ErdosFunction(q, tuple(values))


# ── Parity and symmetry ──────────────────────────────────────────────────────

def parity_of(f: ErdosFunction) -> ParityClass:
    pairs = [(f(a), f(f.q - a)) for a in range(1, f.r + 1)]
    if all(x == -y for x, y in pairs):
        return ParityClass.ODD
    if all(x == y for x, y in pairs):
        return ParityClass.EVEN
    return ParityClass.NEITHER


def negate(f: ErdosFunction) -> ErdosFunction:
    return ErdosFunction(f.q, tuple(-v for v in f.values))


# ── Equivalence classes ──────────────────────────────────────────────────────

def equivalence_key(f: ErdosFunction) -> EquivalenceKey:
    residues = non_coprime_residues(f.q)
    return EquivalenceKey(f.q, residues, tuple(f(a) for a in residues))


def equivalence_classes(q: int, method: str = "enumeration") -> list[tuple[EquivalenceKey, int]]:
    """Partition E_q by restriction to N_q.

    ``method="enumeration"`` walks E_q; ``method="feasibility"`` counts directly: a
    pattern with ``j`` ones on N_q extends in C(phi(q), r - j) ways.

    Returns:
        (key, class size) pairs ordered with +1 sorting before -1 position by position.
    """
    require_odd_modulus(q)
    counts: dict[EquivalenceKey, int] = {}
    if method == "enumeration":
        for f in enumerate_erdos(q):
            key = equivalence_key(f)
            counts[key] = counts.get(key, 0) + 1
    elif method == "feasibility":
        residues = non_coprime_residues(q)
        r, phi = (q - 1) // 2, euler_totient(q)
        for signs in product((1, -1), repeat=len(residues)):
            needed = r - signs.count(1)
            if 0 <= needed <= phi:
                counts[EquivalenceKey(q, residues, signs)] = binomial(phi, needed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return sorted(counts.items(), key=lambda item: item[0].sort_key())


def feasible_class_count(q: int) -> int:
    require_odd_modulus(q)
    size, r, phi = len(non_coprime_residues(q)), (q - 1) // 2, euler_totient(q)
    return sum(binomial(size, j) for j in range(size + 1) if 0 <= r - j <= phi)


def printed_class_count(q: int) -> int:
    """The two-case count with n_q = (q - 1 - phi(q)) / 2, as printed; kept for comparison."""
    require_odd_modulus(q)
    n_q = (q - 1 - euler_totient(q)) // 2
    r = (q - 1) // 2
    if r >= n_q:
        return 2 ** n_q
    return sum(binomial(n_q, k) for k in range(n_q - r, n_q + 1))
