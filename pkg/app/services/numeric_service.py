"""
Numeric core service.
Exact Bernoulli numbers, cotangent-derivative polynomials, even zeta values and
midpoint-radius certified reals backed by mpmath.

Every CertifiedReal carries a radius that rigorously bounds the distance between
its midpoint and the true value, assuming mpmath's elementary functions are
accurate to a few ulps at working precision (``GUARD_BITS`` extra bits are used
for that).
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd
from typing import Union

from mpmath.ctx_mp import MPContext

from app.core.config import DEFAULT_PRECISION_BITS, GUARD_BITS, MIN_PRECISION_BITS, get_settings
from app.services.common_service import InvalidPrecision, PrecisionExhausted, SingularArgument, binomial

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]

_local = threading.local()


def _mp(bits: int) -> MPContext:
    """Return this thread's mpmath context fixed at ``bits`` of precision."""
    contexts = getattr(_local, "contexts", None)
    if contexts is None:
        contexts = _local.contexts = {}
    ctx = contexts.get(bits)
    if ctx is None:
        ctx = MPContext()
        ctx.prec = bits
        contexts[bits] = ctx
    return ctx


def mpf_to_fraction(x) -> Fraction:
    """Exact value of a finite mpmath float."""
    sign, man, exp, _bc = x._mpf_
    man = int(man)
    if man == 0:
        if exp != 0:
            raise ValueError("non-finite value has no exact rational form")
        return Fraction(0)
    value = Fraction(man) * (Fraction(2) ** exp)
    return -value if sign else value


def mpf_to_hex(x) -> str:
    """Exact hexadecimal literal (``[-]0x<mantissa>p<exp>``), parseable by ``float.fromhex``."""
    sign, man, exp, _bc = x._mpf_
    man = int(man)
    if man == 0:
        return "0x0p+0"
    return f"{'-' if sign else ''}0x{man:x}p{exp:+d}"


# ── Precision context ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PrecisionContext:
    precision_bits: int = DEFAULT_PRECISION_BITS
    max_terms: int = 1_000_000

    def __post_init__(self):
        if self.precision_bits < MIN_PRECISION_BITS:
            raise InvalidPrecision(f"precision_bits must be >= {MIN_PRECISION_BITS}, got {self.precision_bits}")
        if self.max_terms < 1:
            raise InvalidPrecision("max_terms must be positive")

    @property
    def working_bits(self) -> int:
        return self.precision_bits + GUARD_BITS

    @property
    def mp(self) -> MPContext:
        return _mp(self.working_bits)

    def escalated(self) -> "PrecisionContext":
        return replace(self, precision_bits=self.precision_bits * 2)

    def target_radius(self) -> Fraction:
        """Radius that counts as 'fully resolved' at this precision."""
        return Fraction(1, 2 ** self.precision_bits)

    @classmethod
    def from_settings(cls) -> "PrecisionContext":
        return cls(precision_bits=get_settings().precision_bits)


# ── Certified reals ──────────────────────────────────────────────────────────

def _rounding_error(ctx: MPContext, v, shift: int = 1):
    """Upper bound |v| * 2^(shift - prec) for the error of a nearest-rounded result."""
    return ctx.fmul(abs(v), ctx.ldexp(ctx.one, shift - ctx.prec), rounding="u")


def _sum_up(ctx: MPContext, *terms):
    total = ctx.zero
    for t in terms:
        total = ctx.fadd(total, t, rounding="u")
    return total


class CertifiedReal:
    """A real number known to lie in ``[mid - rad, mid + rad]``."""

    __slots__ = ("mid", "rad", "bits")

    def __init__(self, mid, rad, bits: int):
        ctx = _mp(bits)
        self.mid = ctx.mpf(mid)
        self.rad = ctx.mpf(rad)
        self.bits = bits
        if self.rad < 0:
            raise ValueError("radius must be non-negative")

    # construction
    @classmethod
    def from_rational(cls, x: Number, ctx: PrecisionContext | int) -> "CertifiedReal":
        bits = ctx if isinstance(ctx, int) else ctx.working_bits
        mp = _mp(bits)
        x = Fraction(x)
        dyadic = x.denominator & (x.denominator - 1) == 0
        if dyadic and abs(x.numerator).bit_length() <= bits:
            return cls(mp.ldexp(mp.mpf(x.numerator), 1 - x.denominator.bit_length()), mp.zero, bits)
        mid = mp.fdiv(x.numerator, x.denominator)
        return cls(mid, _rounding_error(mp, mid, 3), bits)

    @classmethod
    def exact_zero(cls, ctx: PrecisionContext | int) -> "CertifiedReal":
        return cls.from_rational(0, ctx)

    @classmethod
    def pi(cls, ctx: PrecisionContext | int) -> "CertifiedReal":
        bits = ctx if isinstance(ctx, int) else ctx.working_bits
        mp = _mp(bits)
        mid = +mp.pi
        return cls(mid, _rounding_error(mp, mid, 2), bits)

    @classmethod
    def euler_gamma(cls, ctx: PrecisionContext | int) -> "CertifiedReal":
        bits = ctx if isinstance(ctx, int) else ctx.working_bits
        mp = _mp(bits)
        mid = +mp.euler
        return cls(mid, _rounding_error(mp, mid, 2), bits)

    # helpers
    @property
    def _ctx(self) -> MPContext:
        return _mp(self.bits)

    def _coerce(self, other) -> "CertifiedReal":
        if isinstance(other, CertifiedReal):
            return other
        if isinstance(other, (int, Fraction)):
            return CertifiedReal.from_rational(other, self.bits)
        return NotImplemented

    def widen(self, extra) -> "CertifiedReal":
        """Add ``extra`` (Fraction, int or mpf) to the radius."""
        ctx = self._ctx
        if isinstance(extra, (int, Fraction)):
            extra = Fraction(extra)
            extra = ctx.fdiv(extra.numerator, extra.denominator, rounding="u")
        return CertifiedReal(self.mid, _sum_up(ctx, self.rad, abs(extra)), self.bits)

    @property
    def lower(self):
        return self._ctx.fsub(self.mid, self.rad, rounding="d")

    @property
    def upper(self):
        return self._ctx.fadd(self.mid, self.rad, rounding="u")

    # arithmetic
    def __neg__(self) -> "CertifiedReal":
        return CertifiedReal(-self.mid, self.rad, self.bits)

    def __add__(self, other) -> "CertifiedReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        bits = max(self.bits, other.bits)
        ctx = _mp(bits)
        mid = ctx.fadd(self.mid, other.mid)
        return CertifiedReal(mid, _sum_up(ctx, self.rad, other.rad, _rounding_error(ctx, mid)), bits)

    __radd__ = __add__

    def __sub__(self, other) -> "CertifiedReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "CertifiedReal":
        return (-self) + other

    def __mul__(self, other) -> "CertifiedReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        bits = max(self.bits, other.bits)
        ctx = _mp(bits)
        mid = ctx.fmul(self.mid, other.mid)
        rad = _sum_up(
            ctx,
            ctx.fmul(abs(self.mid), other.rad, rounding="u"),
            ctx.fmul(abs(other.mid), self.rad, rounding="u"),
            ctx.fmul(self.rad, other.rad, rounding="u"),
            _rounding_error(ctx, mid),
        )
        return CertifiedReal(mid, rad, bits)

    __rmul__ = __mul__

    def reciprocal(self) -> "CertifiedReal":
        ctx = self._ctx
        m = abs(self.mid)
        low = ctx.fsub(m, self.rad, rounding="d")
        if low <= 0:
            raise ZeroDivisionError("interval contains zero")
        mid = ctx.fdiv(ctx.one, self.mid)
        denom = ctx.fmul(m, low, rounding="d")
        rad = _sum_up(ctx, ctx.fdiv(self.rad, denom, rounding="u"), _rounding_error(ctx, mid))
        return CertifiedReal(mid, rad, self.bits)

    def __truediv__(self, other) -> "CertifiedReal":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.rad == 0 and other.mid != 0:
            bits = max(self.bits, other.bits)
            ctx = _mp(bits)
            mid = ctx.fdiv(self.mid, other.mid)
            rad = _sum_up(ctx, ctx.fdiv(self.rad, abs(other.mid), rounding="u"), _rounding_error(ctx, mid))
            return CertifiedReal(mid, rad, bits)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "CertifiedReal":
        return self.reciprocal() * other

    def __pow__(self, n: int) -> "CertifiedReal":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = CertifiedReal.from_rational(1, self.bits)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # elementary functions
    def sqrt(self) -> "CertifiedReal":
        ctx = self._ctx
        if self.rad == 0 and self.mid == 0:
            return self
        if self.mid <= 0:
            raise ValueError("sqrt of a non-positive interval")
        mid = ctx.sqrt(self.mid)
        rad = _sum_up(ctx, ctx.fdiv(self.rad, mid, rounding="u"), _rounding_error(ctx, mid, 3))
        return CertifiedReal(mid, rad, self.bits)

    def exp(self) -> "CertifiedReal":
        ctx = self._ctx
        mid = ctx.exp(self.mid)
        spread = ctx.fmul(ctx.fmul(mid, ctx.expm1(self.rad), rounding="u"), 1 + ctx.ldexp(ctx.one, 4 - ctx.prec), rounding="u")
        return CertifiedReal(mid, _sum_up(ctx, spread, _rounding_error(ctx, mid, 3)), self.bits)

    def log(self) -> "CertifiedReal":
        ctx = self._ctx
        low = self.lower
        if low <= 0:
            raise ValueError("log of an interval reaching zero")
        mid = ctx.log(self.mid)
        rad = _sum_up(ctx, ctx.fdiv(self.rad, low, rounding="u"), _rounding_error(ctx, mid, 3))
        return CertifiedReal(mid, rad, self.bits)

    def sin(self) -> "CertifiedReal":
        ctx = self._ctx
        mid = ctx.sin(self.mid)
        return CertifiedReal(mid, _sum_up(ctx, self.rad, _rounding_error(ctx, mid, 3)), self.bits)

    def cos(self) -> "CertifiedReal":
        ctx = self._ctx
        mid = ctx.cos(self.mid)
        return CertifiedReal(mid, _sum_up(ctx, self.rad, _rounding_error(ctx, mid, 3)), self.bits)

    def cot(self) -> "CertifiedReal":
        try:
            return self.cos() / self.sin()
        except ZeroDivisionError as exc:
            raise SingularArgument("cotangent argument too close to a multiple of pi") from exc

    # queries
    def contains(self, x) -> bool:
        if isinstance(x, CertifiedReal):
            return self.lower <= x.lower and x.upper <= self.upper
        value = Fraction(x)
        return mpf_to_fraction(self.lower) <= value <= mpf_to_fraction(self.upper)

    def overlaps(self, other: "CertifiedReal") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def sign(self) -> int:
        """+1 / -1 when the sign is certified, 0 when the interval touches zero."""
        if self.lower > 0:
            return 1
        if self.upper < 0:
            return -1
        return 0

    def abs_upper(self):
        return max(abs(self.lower), abs(self.upper))

    def __float__(self) -> float:
        return float(self.mid)

    def decimal(self, digits: int = 25) -> str:
        return self._ctx.nstr(self.mid, digits)

    def to_payload(self) -> dict:
        return {
            "midpoint": mpf_to_hex(self.mid),
            "radius": mpf_to_hex(self.rad),
            "decimal": self.decimal(),
        }

    def __repr__(self) -> str:
        ctx = self._ctx
        return f"CertifiedReal({ctx.nstr(self.mid, 20)} ± {ctx.nstr(self.rad, 3)})"


# ── Exact objects ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PiPowerRational:
    """``coefficient * pi**pi_exponent``, kept exact."""

    coefficient: Fraction
    pi_exponent: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        if self.pi_exponent < 0:
            raise ValueError("pi_exponent must be non-negative")

    def __mul__(self, other) -> "PiPowerRational":
        if isinstance(other, PiPowerRational):
            return PiPowerRational(self.coefficient * other.coefficient, self.pi_exponent + other.pi_exponent)
        return PiPowerRational(self.coefficient * Fraction(other), self.pi_exponent)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "PiPowerRational":
        return PiPowerRational(self.coefficient / Fraction(other), self.pi_exponent)

    def __neg__(self) -> "PiPowerRational":
        return PiPowerRational(-self.coefficient, self.pi_exponent)

    def __add__(self, other: "PiPowerRational") -> "PiPowerRational":
        if self.coefficient == 0:
            return other
        if other.coefficient == 0:
            return self
        if self.pi_exponent != other.pi_exponent:
            raise ValueError("cannot add different powers of pi exactly")
        return PiPowerRational(self.coefficient + other.coefficient, self.pi_exponent)

    def __pow__(self, n: int) -> "PiPowerRational":
        return PiPowerRational(self.coefficient ** n, self.pi_exponent * n)

    def _same_power(self, other: "PiPowerRational") -> None:
        if self.pi_exponent != other.pi_exponent:
            raise ValueError("exact comparison needs equal powers of pi")

    def __lt__(self, other: "PiPowerRational") -> bool:
        self._same_power(other)
        return self.coefficient < other.coefficient

    def __le__(self, other: "PiPowerRational") -> bool:
        self._same_power(other)
        return self.coefficient <= other.coefficient

    def to_certified(self, ctx: PrecisionContext | int) -> CertifiedReal:
        return CertifiedReal.pi(ctx) ** self.pi_exponent * self.coefficient

    def to_payload(self) -> dict:
        return {
            "pi_exponent": self.pi_exponent,
            "coefficient_num": str(self.coefficient.numerator),
            "coefficient_den": str(self.coefficient.denominator),
        }

    def __str__(self) -> str:
        if self.pi_exponent == 0:
            return str(self.coefficient)
        return f"({self.coefficient})*pi^{self.pi_exponent}"


# ── Bernoulli numbers ────────────────────────────────────────────────────────

_BERNOULLI: list[Fraction] = [Fraction(1)]
_BERNOULLI_LOCK = threading.Lock()


def bernoulli(m: int) -> Fraction:
    """B_m from z/(e^z - 1) (so B_1 = -1/2), memoized behind a lock."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m >= 3 and m % 2 == 1:
        return Fraction(0)
    with _BERNOULLI_LOCK:
        while len(_BERNOULLI) <= m:
            n = len(_BERNOULLI)
            if n >= 3 and n % 2 == 1:
                _BERNOULLI.append(Fraction(0))
                continue
            acc = sum(binomial(n + 1, j) * _BERNOULLI[j] for j in range(n))
            _BERNOULLI.append(-acc / (n + 1))
        return _BERNOULLI[m]


def euler_totient(q: int) -> int:
    if q < 1:
        raise ValueError("q must be positive")
    result, n, p = q, q, 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1
    if n > 1:
        result -= result // n
    return result


def zeta_even(m: int) -> PiPowerRational:
    """zeta(2m) = (-1)^(m+1) B_2m 2^2m / (2 (2m)!) * pi^2m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    coeff = (-1) ** (m + 1) * bernoulli(2 * m) * 2 ** (2 * m) / (2 * factorial(2 * m))
    return PiPowerRational(coeff, 2 * m)


def _rising(s: int, n: int) -> int:
    out = 1
    for i in range(n):
        out *= s + i
    return out


def euler_maclaurin_cutoff(s: int, bits: int) -> int:
    """A start N from which the Euler-Maclaurin tail reaches 2^-(bits+8).

    The series is asymptotic with terms bottoming out near e^(-2 pi N), so N must
    exceed (bits + 8) ln 2 / (2 pi); half of ``bits`` clears that with room to spare
    and keeps the number of Bernoulli terms small.
    """
    return (bits + 8) // 2 + s


@lru_cache(maxsize=512)
def _hurwitz_cached(s: int, M: int, bits: int) -> CertifiedReal:
    threshold = Fraction(1, 2 ** (bits + 8))
    N = max(M, euler_maclaurin_cutoff(s, bits))
    main = Fraction(1, (s - 1) * N ** (s - 1)) + Fraction(1, 2 * N ** s)
    previous = None
    for i in range(1, 4 * N):
        term = bernoulli(2 * i) / factorial(2 * i) * _rising(s, 2 * i - 1) / Fraction(N) ** (s + 2 * i - 1)
        if abs(term) < threshold:
            value = CertifiedReal.from_rational(main, bits).widen(2 * abs(term))
            for m in range(M, N):
                value = value + Fraction(1, m ** s)
            return value
        if previous is not None and abs(term) > abs(previous):
            break
        main += term
        previous = term
    raise PrecisionExhausted(f"Euler-Maclaurin did not converge for s={s}, M={M} at {bits} bits")


def hurwitz_zeta_int(s: int, M: int, ctx: PrecisionContext) -> CertifiedReal:
    """Tail sum of m^(-s) over m >= M.

    Terms below ``euler_maclaurin_cutoff`` are added explicitly; the rest comes from
    Euler-Maclaurin with the remainder bounded by twice the first omitted term.
    """
    if s < 2 or M < 1:
        raise ValueError("need s >= 2 and M >= 1")
    return _hurwitz_cached(s, M, ctx.working_bits)


def zeta_int(s: int, ctx: PrecisionContext) -> CertifiedReal:
    return hurwitz_zeta_int(s, 1, ctx)


# ── Cotangent derivatives ────────────────────────────────────────────────────

@dataclass(frozen=True)
class CotDerivPolynomial:
    """d^m/dz^m cot z written as a polynomial in c = cot z; ``coefficients[i]`` multiplies c^i."""

    m: int
    coefficients: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_odd(self) -> bool:
        return all(c == 0 for i, c in enumerate(self.coefficients) if i % 2 == 0)

    def is_even(self) -> bool:
        return all(c == 0 for i, c in enumerate(self.coefficients) if i % 2 == 1)

    def evaluate(self, c: CertifiedReal) -> CertifiedReal:
        acc = CertifiedReal.from_rational(self.coefficients[-1], c.bits)
        for coeff in reversed(self.coefficients[:-1]):
            acc = acc * c + coeff
        return acc

    def evaluate_exact(self, c: Number) -> Fraction:
        acc = Fraction(0)
        for coeff in reversed(self.coefficients):
            acc = acc * c + coeff
        return acc


@lru_cache(maxsize=None)
def cot_derivative_poly(m: int) -> CotDerivPolynomial:
    """P_0 = c, P_{m+1} = -(1 + c^2) P_m'(c)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        return CotDerivPolynomial(0, (0, 1))
    prev = cot_derivative_poly(m - 1).coefficients
    deriv = [(i + 1) * prev[i + 1] for i in range(len(prev) - 1)]
    out = [0] * (len(deriv) + 2)
    for i, d in enumerate(deriv):
        out[i] -= d
        out[i + 2] -= d
    return CotDerivPolynomial(m, tuple(out))


@lru_cache(maxsize=256)
def _cot_table(q: int, bits: int) -> tuple:
    """cot(pi a / q) for a = 0..q-1 (None at a = 0)."""
    pi = CertifiedReal.pi(bits)
    table: list = [None] * q
    for a in range(1, q // 2 + 1):
        table[a] = (pi * a / q).cot()
        if a != q - a:
            table[q - a] = -table[a]
    return tuple(table)


def cot_pi_rational(a: int, q: int, ctx: PrecisionContext) -> CertifiedReal:
    if q < 1 or a % q == 0:
        raise SingularArgument(f"cot(pi*{a}/{q}) is singular")
    return _cot_table(q, ctx.working_bits)[a % q]


def cot_derivative_at(m: int, a: int, q: int, ctx: PrecisionContext) -> CertifiedReal:
    """Certified P_m(cot(pi a / q)), i.e. the m-th derivative of cot at pi a / q."""
    return cot_derivative_poly(m).evaluate(cot_pi_rational(a, q, ctx))


# ── Digamma at rationals ─────────────────────────────────────────────────────

@lru_cache(maxsize=128)
def _digamma_table(q: int, bits: int) -> tuple:
    gamma = CertifiedReal.euler_gamma(bits)
    pi = CertifiedReal.pi(bits)
    base = -gamma - CertifiedReal.from_rational(2 * q, bits).log()
    half_pi = pi / 2
    top = (q + 1) // 2 - 1
    log_sin = [None] + [(pi * j / q).sin().log() for j in range(1, top + 1)]
    cos_table = [(pi * (2 * t) / q).cos() for t in range(q)]
    values = [None] * (q + 1)
    for a in range(1, q):
        acc = base - half_pi * _cot_table(q, bits)[a]
        for j in range(1, top + 1):
            acc = acc + 2 * cos_table[(j * a) % q] * log_sin[j]
        values[a] = acc
    values[q] = -gamma
    return tuple(values)


def digamma_rational(a: int, q: int, ctx: PrecisionContext) -> CertifiedReal:
    """Psi(a/q) by Gauss's digamma theorem; Psi(1) = -gamma."""
    if q < 1 or not 1 <= a <= q:
        raise ValueError(f"need 1 <= a <= q, got a={a}, q={q}")
    return _digamma_table(q, ctx.working_bits)[a]


def reflection_residual(a: int, q: int, ctx: PrecisionContext) -> CertifiedReal:
    """Psi(a/q) - Psi(1 - a/q) + pi cot(pi a/q); encloses zero."""
    pi = CertifiedReal.pi(ctx)
    return digamma_rational(a, q, ctx) - digamma_rational(q - a, q, ctx) + pi * cot_pi_rational(a, q, ctx)


def coprime(a: int, b: int) -> bool:
    return gcd(a, b) == 1
