"""
Dedekind sum service.
Higher-dimensional cotangent Dedekind sums, their reciprocity law and the power
sums S_{q,k}^{(u)} as exact polynomials in q.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product as cartesian
from math import factorial, gcd

from app.services.common_service import (
    CrossCheckFailure,
    InvalidArgument,
    NotCoprime,
    ParityViolation,
    ReconstructionFailure,
    SingularTerm,
    compositions,
    product,
)
from app.services.numeric_service import (
    CertifiedReal,
    PrecisionContext,
    bernoulli,
    cot_derivative_at,
    cot_derivative_poly,
    cot_pi_rational,
    mpf_to_fraction,
)

logger = logging.getLogger(__name__)

# Smallest pairwise-coprime triple with all orders zero; used to pin the signs of the law
CALIBRATION_MODULI = (2, 3, 5)


@dataclass(frozen=True)
class DedekindSpec:
    """C(a_i; a_0..^a_i..a_d | m_i; m_0..^m_i..m_d)."""

    moduli: tuple[int, ...]
    orders: tuple[int, ...]
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(a) for a in self.moduli))
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        if len(self.moduli) != len(self.orders) or len(self.moduli) < 2:
            raise InvalidArgument("need matching moduli and orders with d >= 1")
        if any(a < 1 for a in self.moduli) or any(m < 0 for m in self.orders):
            raise InvalidArgument("moduli must be positive and orders non-negative")
        if not 0 <= self.index < len(self.moduli):
            raise InvalidArgument(f"index {self.index} out of range")

    @property
    def d(self) -> int:
        return len(self.moduli) - 1

    @property
    def weight(self) -> int:
        """M = d + sum of orders."""
        return self.d + sum(self.orders)


@dataclass(frozen=True)
class SignConvention:
    """LHS = global_sign * R + correction_sign * (-1)^(d/2) [all orders zero]."""

    global_sign: int
    correction_sign: int

    @property
    def tag(self) -> str:
        return f"global{self.global_sign:+d}/correction{self.correction_sign:+d}"


# Value calibrate_sign_convention selects; used by the exact paths that cannot run numerics
DEFAULT_CONVENTION = SignConvention(global_sign=-1, correction_sign=1)


@dataclass(frozen=True)
class PolynomialInQ:
    """sum_j coefficients[j] q^j with exact rational coefficients."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = [Fraction(c) for c in self.coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coefficients[-1]

    def evaluate(self, q) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * q + c
        return acc

    def to_payload(self) -> list[dict]:
        return [{"power": j, "num": str(c.numerator), "den": str(c.denominator)} for j, c in enumerate(self.coefficients)]

    def __str__(self) -> str:
        terms = [f"({c})*q^{j}" for j, c in enumerate(self.coefficients) if c]
        return " + ".join(reversed(terms)) or "0"


# ── Sums ─────────────────────────────────────────────────────────────────────

def dedekind_sum_numeric(spec: DedekindSpec, ctx: PrecisionContext) -> CertifiedReal:
    i = spec.index
    a_i, m_i = spec.moduli[i], spec.orders[i]
    if a_i == 1:
        return CertifiedReal.exact_zero(ctx)
    others = [(a, m) for j, (a, m) in enumerate(zip(spec.moduli, spec.orders)) if j != i]
    for a, _ in others:
        if gcd(a, a_i) != 1:
            raise SingularTerm(f"gcd({a}, {a_i}) != 1 puts a pole inside the sum")
    total = CertifiedReal.exact_zero(ctx)
    for t in range(1, a_i):
        term = CertifiedReal.from_rational(1, ctx)
        for a, m in others:
            term = term * cot_derivative_at(m, t * a, a_i, ctx)
        total = total + term
    return total / a_i ** (m_i + 1)


def s_qk(u: int, q: int, k: int, ctx: PrecisionContext) -> CertifiedReal:
    """S_{q,k}^{(u)} = sum_{t=1}^{q-1} [cot^{(k-1)}(pi t/q)]^{2u}."""
    if u < 1 or k < 1 or q < 1:
        raise InvalidArgument("u, q, k must be positive")
    poly = cot_derivative_poly(k - 1)
    total = CertifiedReal.exact_zero(ctx)
    for t in range(1, q):
        total = total + poly.evaluate(cot_pi_rational(t, q, ctx)) ** (2 * u)
    return total


# ── Reciprocity ──────────────────────────────────────────────────────────────

def a_coefficient(j: int, m: int) -> Fraction:
    """A_{i,j} for order m: B_2j / ((2j-1-m)! 2j) when 2j >= m+1, (-1)^m m! at j=0, else 0."""
    if j == 0:
        return Fraction((-1) ** m * factorial(m))
    if 2 * j >= m + 1:
        return bernoulli(2 * j) / (factorial(2 * j - 1 - m) * 2 * j)
    return Fraction(0)


def _validate_reciprocity(moduli: tuple[int, ...], orders: tuple[int, ...]) -> int:
    for x, y in combinations(moduli, 2):
        if gcd(x, y) != 1:
            raise NotCoprime(f"gcd({x}, {y}) != 1")
    weight = len(moduli) - 1 + sum(orders)
    if weight % 2:
        raise ParityViolation(f"M = {weight} is odd")
    return weight


def reciprocity_r(moduli: tuple[int, ...], orders: tuple[int, ...]) -> Fraction:
    """R = (-1)^(M/2) 2^M / prod a_i^(m_i+1) * sum over j_0+..+j_d = M/2 of prod a_i^(2 j_i) A_{i,j_i}."""
    weight = _validate_reciprocity(moduli, orders)
    half = weight // 2
    total = Fraction(0)
    for js in compositions(half, len(moduli)):
        total += product(a ** (2 * j) * a_coefficient(j, m) for a, j, m in zip(moduli, js, orders))
    scale = Fraction((-1) ** half * 2 ** weight, product(a ** (m + 1) for a, m in zip(moduli, orders)))
    return scale * total


def reciprocity_rhs(
    moduli: tuple[int, ...],
    orders: tuple[int, ...],
    convention: SignConvention | None = None,
) -> Fraction:
    convention = convention or DEFAULT_CONVENTION
    r = reciprocity_r(moduli, orders)
    d = len(moduli) - 1
    value = convention.global_sign * r
    if all(m == 0 for m in orders):
        value += convention.correction_sign * (-1) ** (d // 2)
    return value


def reciprocity_lhs(moduli: tuple[int, ...], orders: tuple[int, ...], ctx: PrecisionContext) -> CertifiedReal:
    """sum_i (-1)^m_i m_i! sum_l prod_{j!=i} a_j^l_j / l_j! * C(a_i; ... | m_i; m_j + l_j)."""
    _validate_reciprocity(moduli, orders)
    total = CertifiedReal.exact_zero(ctx)
    for i, (a_i, m_i) in enumerate(zip(moduli, orders)):
        if a_i == 1:
            continue
        outer = (-1) ** m_i * factorial(m_i)
        rest = [j for j in range(len(moduli)) if j != i]
        for ls in compositions(m_i, len(rest)):
            weight = Fraction(outer)
            shifted = list(orders)
            for j, l in zip(rest, ls):
                weight *= Fraction(moduli[j] ** l, factorial(l))
                shifted[j] = orders[j] + l
            spec = DedekindSpec(tuple(moduli), tuple(shifted), i)
            total = total + dedekind_sum_numeric(spec, ctx) * weight
    return total


@lru_cache(maxsize=8)
def calibrate_sign_convention(ctx: PrecisionContext) -> SignConvention:
    """Pick the (global, correction) signs that make the law hold on (2,3,5) with zero orders."""
    orders = (0,) * len(CALIBRATION_MODULI)
    lhs = reciprocity_lhs(CALIBRATION_MODULI, orders, ctx)
    matches = [
        SignConvention(g, c)
        for g, c in cartesian((1, -1), (1, -1))
        if lhs.contains(reciprocity_rhs(CALIBRATION_MODULI, orders, SignConvention(g, c)))
    ]
    if len(matches) != 1:
        raise CrossCheckFailure(f"sign calibration found {len(matches)} matching conventions for {lhs!r}")
    logger.info("reciprocity sign convention: %s", matches[0].tag)
    return matches[0]


def reciprocity_check(moduli: tuple[int, ...], orders: tuple[int, ...], ctx: PrecisionContext) -> CertifiedReal:
    """Residual LHS - RHS under the calibrated convention; encloses 0 when the law holds."""
    convention = calibrate_sign_convention(ctx)
    rhs = reciprocity_rhs(tuple(moduli), tuple(orders), convention)
    return reciprocity_lhs(tuple(moduli), tuple(orders), ctx) - rhs


# ── S_{q,k}^{(u)} as a polynomial in q ───────────────────────────────────────

def leading_coefficient_formula(u: int, k: int) -> Fraction:
    """2^(2uk) ((k-1)!)^(2u) (-1)^(uk+1) B_2uk / (2uk)!."""
    n = u * k
    return Fraction(2 ** (2 * n) * factorial(k - 1) ** (2 * u) * (-1) ** (n + 1)) * bernoulli(2 * n) / factorial(2 * n)


def _poly_mul(x: list[Fraction], y: list[Fraction], limit: int) -> list[Fraction]:
    out = [Fraction(0)] * min(len(x) + len(y) - 1, limit + 1)
    for i, a in enumerate(x):
        if not a:
            continue
        for j, b in enumerate(y):
            if i + j > limit:
                break
            out[i + j] += a * b
    return out


def _reciprocity_polynomial(u: int, k: int, convention: SignConvention) -> PolynomialInQ:
    """Specialize the law to moduli (q, 1, .., 1) and orders (0, k-1, .., k-1).

    Only the q-term survives on the left, so S = q (g R + [k=1] c (-1)^u) with
    (g, c) the convention signs, and q R is an even polynomial in q.
    """
    n = u * k
    unit = [a_coefficient(j, k - 1) for j in range(n + 1)]
    power = [Fraction(1)]
    for _ in range(2 * u):
        power = _poly_mul(power, unit, n)
    power += [Fraction(0)] * (n + 1 - len(power))
    coefficients = [Fraction(0)] * (2 * n + 1)
    sign = (-1) ** n * 2 ** (2 * n)
    for j0 in range(n + 1):
        coefficients[2 * j0] += convention.global_sign * sign * a_coefficient(j0, 0) * power[n - j0]
    if k == 1:
        coefficients[1] += convention.correction_sign * (-1) ** u
    return PolynomialInQ(tuple(coefficients))


def rational_reconstruction(x: CertifiedReal, max_den: int) -> Fraction:
    """The unique fraction with denominator <= max_den inside ``x``."""
    if 2 * mpf_to_fraction(x.rad) * max_den * max_den >= 1:
        raise ReconstructionFailure(f"radius too wide to pin a denominator <= {max_den}")
    candidate = mpf_to_fraction(x.mid).limit_denominator(max_den)
    if not x.contains(candidate):
        raise ReconstructionFailure(f"no fraction with denominator <= {max_den} inside {x!r}")
    return candidate


def _interpolated_polynomial(u: int, k: int, ctx: PrecisionContext) -> PolynomialInQ:
    degree = 2 * u * k
    max_den = 2 ** (ctx.precision_bits // 4)
    points = [(q, rational_reconstruction(s_qk(u, q, k, ctx), max_den)) for q in range(1, degree + 2)]
    coefficients = [Fraction(0)] * (degree + 1)
    for i, (qi, yi) in enumerate(points):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (qj, _) in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for p in range(len(basis) - 1):
                basis[p] -= qj * basis[p + 1]
            denom *= qi - qj
        for p, c in enumerate(basis):
            coefficients[p] += yi * c / denom
    poly = PolynomialInQ(tuple(coefficients))
    if poly.leading_coefficient != leading_coefficient_formula(u, k) or poly.degree != degree:
        raise ReconstructionFailure(f"interpolated leading term {poly.leading_coefficient} does not match")
    check_q = degree + 2
    if not s_qk(u, check_q, k, ctx).contains(poly.evaluate(check_q)):
        raise ReconstructionFailure(f"interpolated polynomial misses S at q={check_q}")
    return poly


@lru_cache(maxsize=64)
def _cached_polynomial(
    u: int, k: int, method: str, ctx: PrecisionContext | None, convention: SignConvention | None
) -> PolynomialInQ:
    if method == "reciprocity":
        poly = _reciprocity_polynomial(u, k, convention)
        if poly.leading_coefficient != leading_coefficient_formula(u, k):
            raise ReconstructionFailure("reciprocity polynomial has the wrong leading coefficient")
        return poly
    return _interpolated_polynomial(u, k, ctx or PrecisionContext.from_settings())


def s_qk_polynomial(
    u: int,
    k: int,
    method: str = "reciprocity",
    ctx: PrecisionContext | None = None,
    convention: SignConvention | None = None,
) -> PolynomialInQ:
    """Exact S_{q,k}^{(u)} as a polynomial of degree 2uk.

    ``method="reciprocity"`` assembles it from the reciprocity law under ``convention``
    (``DEFAULT_CONVENTION`` when none is given; pass the result of
    ``calibrate_sign_convention`` to use a calibrated one). ``"interpolation"``
    reconstructs rational values at q = 1..2uk+1 and interpolates.
    """
    if u < 1 or k < 1:
        raise InvalidArgument("u and k must be positive")
    if method not in ("reciprocity", "interpolation"):
        raise InvalidArgument(f"unknown method {method!r}")
    if method == "interpolation":
        return _cached_polynomial(u, k, method, ctx, None)
    return _cached_polynomial(u, k, method, None, convention or DEFAULT_CONVENTION)


def s_qk_exact(u: int, q: int, k: int) -> Fraction:
    return s_qk_polynomial(u, k).evaluate(q)
