"""
L-series service.
Certified L(k, f) by direct summation, by Gauss's digamma formula and by the
same-parity cotangent closed form, plus non-vanishing certification.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Union

from app.services.common_service import (
    BoundVacuous,
    InvalidArgument,
    ParityMismatch,
    binomial,
    parallel_map,
)
from app.services.erdos_service import ErdosFunction, parity_for_k, parity_of
from app.services.numeric_service import (
    CertifiedReal,
    PrecisionContext,
    cot_derivative_poly,
    cot_pi_rational,
    digamma_rational,
    euler_maclaurin_cutoff,
    hurwitz_zeta_int,
    zeta_even,
    zeta_int,
)

logger = logging.getLogger(__name__)

# Fewest full periods summed explicitly before the tail expansion takes over
DIRECT_PERIODS = 64


class LMethod(str, Enum):
    DIRECT = "direct"
    DIGAMMA = "digamma"
    CLOSED = "closed"


@dataclass(frozen=True)
class LValue:
    q: int
    k: int
    method: LMethod
    value: CertifiedReal

    def to_payload(self) -> dict:
        return {"q": self.q, "k": self.k, "method": self.method.value, **self.value.to_payload()}


@dataclass(frozen=True)
class CertifiedNonzero:
    sign: int


@dataclass(frozen=True)
class Undecided:
    pass


Certification = Union[CertifiedNonzero, Undecided]


# ── Direct summation ─────────────────────────────────────────────────────────

@lru_cache(maxsize=256)
def _direct_tables(q: int, k: int, ctx: PrecisionContext):
    """Per-residue head sums, tail weights and the tail truncation bound.

    head[a-1] = sum over m < P of (mq + a)^-k (exact, then certified).
    weights[j-1] = (-1)^j C(k+j-1, j) q^(-k-j) zeta(k+j, P).
    P grows with the working precision so the Hurwitz tails need no extra head.
    Successive tail bounds shrink by at most k/(P-1), so the truncation radius is
    the first omitted bound times (P-1)/(P-1-k).
    """
    bits = ctx.working_bits
    periods = max(DIRECT_PERIODS, euler_maclaurin_cutoff(k + 1, bits), k + 2)
    head = tuple(
        CertifiedReal.from_rational(sum(Fraction(1, (m * q + a) ** k) for m in range(periods)), bits)
        for a in range(1, q)
    )
    threshold = Fraction(1, 2 ** (bits + 8))
    weights = []
    j = 1
    while True:
        bound = Fraction(binomial(k + j - 1, j), q ** (k - 1) * (k + j - 1) * (periods - 1) ** (k + j - 1))
        if bound < threshold:
            break
        coeff = Fraction((-1) ** j * binomial(k + j - 1, j), q ** (k + j))
        weights.append(hurwitz_zeta_int(k + j, periods, ctx) * coeff)
        j += 1
    logger.debug("direct tables q=%s k=%s: %s periods, %s tail terms", q, k, periods, len(weights))
    return head, tuple(weights), bound * Fraction(periods - 1, periods - 1 - k)


def _signed(value: CertifiedReal, sign: int) -> CertifiedReal:
    return value if sign > 0 else -value


def _direct_crude(f: ErdosFunction, k: int, ctx: PrecisionContext) -> CertifiedReal:
    """Plain partial sum over M periods with the Abel / integral tail as radius."""
    q = f.q
    target = Fraction(1, 2 ** (ctx.precision_bits // 2))
    if k == 1:
        periods = int(q / target) + 1
    else:
        periods = 1
        while Fraction(1, (k - 1) * (periods * q) ** (k - 1)) >= target:
            periods *= 2
    cap = max(1, ctx.max_terms // q)
    if periods > cap:
        logger.info("direct sum capped at %s periods (wanted %s); radius widens", cap, periods)
        periods = cap
    total = CertifiedReal.exact_zero(ctx)
    for n in range(1, periods * q + 1):
        sign = f(n)
        if sign:
            total = total + Fraction(sign, n ** k)
    tail = Fraction(q, periods) if k == 1 else Fraction(1, (k - 1) * (periods * q) ** (k - 1))
    return total.widen(tail)


def l_value_direct(f: ErdosFunction, k: int, ctx: PrecisionContext, accelerate: bool = True) -> CertifiedReal:
    """L(k, f) from the defining series.

    With ``accelerate`` the tail beyond the explicit periods is expanded in powers
    of a/(mq), which brings the radius down to the working precision; without it
    the crude tail bound is used and the radius is only about 2^(-precision/2).
    """
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    if not accelerate:
        return _direct_crude(f, k, ctx)
    head, weights, bound = _direct_tables(f.q, k, ctx)
    total = CertifiedReal.exact_zero(ctx)
    for a in range(1, f.q):
        total = total + _signed(head[a - 1], f(a))
    for j, weight in enumerate(weights, start=1):
        s_j = sum(f(a) * a ** j for a in range(1, f.q))
        if s_j:
            total = total + weight * s_j
    return total.widen(bound)


# ── Digamma routes ───────────────────────────────────────────────────────────

def l1_digamma(f: ErdosFunction, ctx: PrecisionContext) -> CertifiedReal:
    """L(1, f) = -(1/q) sum f(a) Psi(a/q)."""
    total = CertifiedReal.exact_zero(ctx)
    for a in range(1, f.q):
        total = total + _signed(digamma_rational(a, f.q, ctx), f(a))
    return -total / f.q


def l1_gauss_two_term(f: ErdosFunction, ctx: PrecisionContext) -> CertifiedReal:
    """Cotangent term plus log-sine term for L(1, f) (sum-zero f with f(q) = 0).

    The signs are those that reproduce direct summation:
    (pi / 2q) sum f(a) cot(pi a/q) - (2/q) sum_{0<j<=q/2} log sin(pi j/q) sum_a f(a) cos(2 pi a j/q).
    """
    q = f.q
    pi = CertifiedReal.pi(ctx)
    cot_sum = CertifiedReal.exact_zero(ctx)
    for a in range(1, q):
        cot_sum = cot_sum + _signed(cot_pi_rational(a, q, ctx), f(a))
    cosines = [(pi * (2 * t) / q).cos() for t in range(q)]
    log_part = CertifiedReal.exact_zero(ctx)
    for j in range(1, q // 2 + 1):
        inner = CertifiedReal.exact_zero(ctx)
        for a in range(1, q):
            inner = inner + _signed(cosines[(a * j) % q], f(a))
        log_part = log_part + (pi * j / q).sin().log() * inner
    return pi * cot_sum / (2 * q) - log_part * Fraction(2, q)


# ── Closed form ──────────────────────────────────────────────────────────────

@lru_cache(maxsize=256)
def closed_form_weights(q: int, k: int, ctx: PrecisionContext) -> tuple[CertifiedReal, ...]:
    """w_a = -(-1)^k pi^k P_{k-1}(cot(pi a/q)) / ((k-1)! q^k) for a = 1..(q-1)/2."""
    poly = cot_derivative_poly(k - 1)
    pi_k = CertifiedReal.pi(ctx) ** k
    scale = Fraction(-((-1) ** k), factorial(k - 1) * q ** k)
    return tuple(pi_k * poly.evaluate(cot_pi_rational(a, q, ctx)) * scale for a in range(1, (q - 1) // 2 + 1))


def l_closed_form(f: ErdosFunction, k: int, ctx: PrecisionContext) -> CertifiedReal:
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    if parity_of(f) is not parity_for_k(k):
        raise ParityMismatch(f"closed form needs a {parity_for_k(k).value} function for k={k}")
    total = CertifiedReal.exact_zero(ctx)
    for a, weight in enumerate(closed_form_weights(f.q, k, ctx), start=1):
        total = total + _signed(weight, f(a))
    return total


# ── Dispatch and bounds ──────────────────────────────────────────────────────

def l_value(f: ErdosFunction, k: int, method: LMethod, ctx: PrecisionContext) -> LValue:
    method = LMethod(method)
    if method is LMethod.DIRECT:
        value = l_value_direct(f, k, ctx)
    elif method is LMethod.DIGAMMA:
        if k != 1:
            raise InvalidArgument("the digamma formula only covers k = 1")
        value = l1_digamma(f, ctx)
    else:
        value = l_closed_form(f, k, ctx)
    return LValue(f.q, k, method, value)


def evaluate_population(
    functions: Iterable[ErdosFunction],
    k: int,
    method: LMethod,
    ctx: PrecisionContext,
    threads: int | None = None,
) -> list[CertifiedReal]:
    """Certified L-values for every function, in input order."""
    return parallel_map(lambda f: l_value(f, k, method, ctx).value, functions, threads)


def nonvanishing_bound(k: int, ctx: PrecisionContext | None = None) -> CertifiedReal:
    """2 - zeta(k): |L(k, f)| >= |f(1)| - sum_{n>=2} n^-k for every Erdos function."""
    if k < 2:
        raise BoundVacuous(f"2 - zeta(k) gives no bound for k={k}")
    ctx = ctx or PrecisionContext.from_settings()
    zeta = zeta_even(k // 2).to_certified(ctx) if k % 2 == 0 else zeta_int(k, ctx)
    return 2 - zeta


def certify_nonzero(v: CertifiedReal) -> Certification:
    sign = v.sign()
    if sign == 0:
        return Undecided()
    return CertifiedNonzero(sign)
