import mpmath
import pytest

from app.services.common_service import BoundVacuous, InvalidArgument, ParityMismatch
from app.services.erdos_service import ErdosFunction, enumerate_erdos, negate, parity_for_k, parity_of
from app.services.lseries_service import (
    CertifiedNonzero,
    LMethod,
    Undecided,
    certify_nonzero,
    evaluate_population,
    l1_digamma,
    l1_gauss_two_term,
    l_closed_form,
    l_value,
    l_value_direct,
    nonvanishing_bound,
)
from app.services.numeric_service import CertifiedReal, PrecisionContext
from tests.conftest import enclosure

ODD3 = ErdosFunction.from_signs("+-0")
EVEN5 = ErdosFunction.from_signs("+--+0")
ODD5 = ErdosFunction.from_signs("++--0")


def test_direct_sum_q3(ctx, oracle):
    value = l_value_direct(ODD3, 1, ctx)
    assert value.overlaps(enclosure(oracle.pi / (3 * oracle.sqrt(3))))
    assert float(value.rad) < 1e-25


def test_direct_sum_even_k2(ctx, oracle):
    value = l_value_direct(EVEN5, 2, ctx)
    assert value.overlaps(enclosure(4 * oracle.pi ** 2 / (25 * oracle.sqrt(5))))


def test_negation_is_exact(ctx):
    for g in enumerate_erdos(7):
        assert l_value_direct(negate(g), 3, ctx).mid == -l_value_direct(g, 3, ctx).mid


def test_crude_tail_is_sound_but_wide():
    ctx = PrecisionContext(precision_bits=128, max_terms=30_000)
    crude = l_value_direct(EVEN5, 2, ctx, accelerate=False)
    fine = l_value_direct(EVEN5, 2, ctx)
    assert crude.overlaps(fine)
    assert crude.rad > fine.rad


def _l1_reference(oracle, f):
    return -sum(f(a) * oracle.digamma(oracle.mpf(a) / f.q) for a in range(1, f.q)) / f.q


def test_digamma_values(ctx, oracle):
    assert l1_digamma(ODD3, ctx).overlaps(enclosure(oracle.pi / (3 * oracle.sqrt(3))))
    assert l1_digamma(ODD5, ctx).overlaps(enclosure(_l1_reference(oracle, ODD5)))


def test_digamma_sum_over_population_vanishes(ctx):
    total = CertifiedReal.exact_zero(ctx)
    for g in enumerate_erdos(5):
        total = total + l1_digamma(g, ctx)
    assert total.contains(0)


def test_closed_form(ctx, oracle):
    assert l_closed_form(ODD3, 1, ctx).overlaps(enclosure(oracle.pi / (3 * oracle.sqrt(3))))
    assert l_closed_form(EVEN5, 2, ctx).overlaps(enclosure(4 * oracle.pi ** 2 / (25 * oracle.sqrt(5))))
    assert l_closed_form(ODD5, 1, ctx).overlaps(enclosure(_l1_reference(oracle, ODD5)))


def test_closed_form_parity_mismatch(ctx):
    with pytest.raises(ParityMismatch):
        l_closed_form(EVEN5, 1, ctx)
    with pytest.raises(ParityMismatch):
        l_closed_form(ErdosFunction.from_signs("+-++--0"), 1, ctx)


def test_digamma_method_only_for_k1(ctx):
    with pytest.raises(InvalidArgument):
        l_value(ODD3, 2, LMethod.DIGAMMA, ctx)


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11])
def test_three_methods_agree(ctx, q):
    for g in enumerate_erdos(q):
        direct = l_value_direct(g, 1, ctx)
        digamma = l1_digamma(g, ctx)
        assert direct.overlaps(digamma)
        assert float(direct.rad) <= 1e-25 and float(digamma.rad) <= 1e-25
        if parity_of(g) is parity_for_k(1):
            assert l_closed_form(g, 1, ctx).overlaps(direct)


@pytest.mark.parametrize("q", [9, 11])
@pytest.mark.parametrize("k", [2, 3])
def test_direct_and_closed_form_agree_k(ctx, q, k):
    for g in enumerate_erdos(q):
        if parity_of(g) is parity_for_k(k):
            assert l_value_direct(g, k, ctx).overlaps(l_closed_form(g, k, ctx))


def test_two_term_gauss_expression(ctx):
    for g in enumerate_erdos(7):
        assert l1_gauss_two_term(g, ctx).overlaps(l1_digamma(g, ctx))


def test_population_order_is_thread_independent(ctx):
    population = list(enumerate_erdos(7))
    one = evaluate_population(population, 1, LMethod.DIGAMMA, ctx, threads=1)
    four = evaluate_population(population, 1, LMethod.DIGAMMA, ctx, threads=4)
    assert [v.mid for v in one] == [v.mid for v in four]


def test_nonvanishing_bound(ctx, oracle):
    assert abs(float(nonvanishing_bound(2, ctx)) - 0.3550659) < 1e-6
    assert nonvanishing_bound(3, ctx).overlaps(enclosure(2 - oracle.zeta(3)))
    assert abs(float(nonvanishing_bound(30, ctx)) - 1) < 1e-8
    with pytest.raises(BoundVacuous):
        nonvanishing_bound(1, ctx)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_values_respect_nonvanishing_bound(ctx, k):
    bound = nonvanishing_bound(k, ctx)
    for q in (3, 5, 7, 9):
        smallest = min(abs(float(l_value_direct(g, k, ctx))) for g in enumerate_erdos(q))
        assert smallest >= float(bound.lower)


def test_certify_nonzero(ctx):
    bits = ctx.working_bits
    assert certify_nonzero(CertifiedReal(mpmath.mpf("0.5"), mpmath.mpf("0.1"), bits)) == CertifiedNonzero(1)
    assert certify_nonzero(CertifiedReal(0, mpmath.mpf("0.1"), bits)) == Undecided()
    assert certify_nonzero(CertifiedReal(mpmath.mpf("-3e-40"), mpmath.mpf("1e-45"), bits)) == CertifiedNonzero(-1)


def _l_reference(f, k: int):
    if k == 1:
        return -sum(f(a) * mpmath.digamma(mpmath.mpf(a) / f.q) for a in range(1, f.q)) / f.q
    return sum(f(a) * mpmath.zeta(k, mpmath.mpf(a) / f.q) for a in range(1, f.q)) / mpmath.mpf(f.q) ** k


@pytest.mark.parametrize("f, k", [(ODD3, 1), (EVEN5, 2), (ODD5, 3)])
def test_direct_sum_at_high_precision(f, k):
    bits = 1024
    value = l_value_direct(f, k, PrecisionContext(precision_bits=bits))
    with mpmath.workprec(bits + 64):
        reference = CertifiedReal(_l_reference(f, k), mpmath.mpf(2) ** (-bits - 16), bits + 64)
    assert value.overlaps(reference)
    assert value.rad < mpmath.mpf(2) ** (-bits)


def test_nonvanishing_bound_at_high_precision():
    bits = 1024
    bound = nonvanishing_bound(3, PrecisionContext(precision_bits=bits))
    with mpmath.workprec(bits + 64):
        reference = CertifiedReal(2 - mpmath.zeta(3), mpmath.mpf(2) ** (-bits - 16), bits + 64)
    assert bound.overlaps(reference)
