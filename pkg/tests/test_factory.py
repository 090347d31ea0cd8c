from fractions import Fraction
from math import lcm

import pytest

from dampwall.algebra.modular import prime_sequence, rational_mod
from dampwall.algebra.poly import P, Poly, poly_prod
from dampwall.factory import (
    N_PRINTED,
    ClosedForm,
    appendix_L2,
    appendix_Q0,
    appendix_Q1,
    appendix_Q2,
    closed_form_R,
    closed_form_S,
    compose_monic_right,
    first_order_annihilator,
    normalized_numerator,
    removal_series,
    sextic,
    verify_factorization,
)
from dampwall.guess import guess_ode_mod
from dampwall.operators import annihilates, compose, conjugate_by_power

from helpers import factorization, order4, removal


def test_closed_form_S_r3_display():
    S = closed_form_S(3)
    assert S.radicand == Poly([1, 0, -18, 36, -18]) and S.radicand_scale == 2
    polys = {f: e for f, e in S.factors}
    assert polys[Poly([2, 9, -9])] == 1 and polys[Poly([1, -2])] == 1
    assert polys[Poly([2, -3])] == -3 and polys[Poly([1, -3])] == -2 and polys[P] == -2


def test_closed_form_S_r5_numerator():
    assert Poly([4, 25, -25]) in {f for f, _ in closed_form_S(5).factors}


@pytest.mark.parametrize("r", [Fraction(1, 2), Fraction(3, 2), 3, 4, 5])
def test_S_vanishes_at_half(r):
    assert closed_form_S(r).evaluate(Fraction(1, 2)) == 0


def test_S_series_real_rational_for_r_below_two():
    s = closed_form_S(Fraction(3, 2)).series(40)
    assert all(isinstance(c, Fraction) for c in s.coeffs)
    # radicand sign(r-1) P4 has constant term r - 1 > 0 scaled to 1
    assert closed_form_S(Fraction(3, 2)).radicand[0] == 1
    assert closed_form_S(Fraction(1, 2)).radicand[0] == 1


@pytest.mark.parametrize("r", [3, 4, 5])
def test_closed_form_series_denominators_are_powers_of_r_minus_one(r):
    for cf in (closed_form_S(r), closed_form_R(r, normalized_numerator(r)[0])):
        den = lcm(*(c.denominator for c in cf.series(50).coeffs))
        assert (r - 1) ** 52 % den == 0


def test_rational_numerator_matches_printed():
    for r, printed in N_PRINTED.items():
        num, content = normalized_numerator(r)
        assert num == Poly(printed)
    assert normalized_numerator(3)[1] == 2 and normalized_numerator(4)[1] == 8
    assert closed_form_R(3).factors[0][0][0] == -20


def test_closed_form_rejects_degenerate_r():
    for r in (0, 1):
        with pytest.raises(ValueError):
            closed_form_S(r)
        with pytest.raises(ValueError):
            closed_form_R(r)


def test_first_order_annihilators():
    S = closed_form_S(3)
    LS = first_order_annihilator(S)
    assert LS.order == 1
    assert annihilates(conjugate_by_power(LS, -2), S.series(100))[0]
    R = closed_form_R(3)
    LR = first_order_annihilator(R)
    bound = poly_prod([P, Poly([1, -2]), Poly([1, -3]), Poly([2, -3]), Poly(N_PRINTED[3])])
    assert LR.head.divides(bound)
    const = ClosedForm("RATIONAL", Fraction(3), ())
    assert first_order_annihilator(const).coeffs == (Poly(), Poly([1]))


def test_compose_order_additivity():
    LS = first_order_annihilator(closed_form_S(3))
    L2 = appendix_L2(3)
    assert compose(L2, LS).order == 3
    assert compose_monic_right(L2, LS).order == 3


def test_sextic_instances():
    assert sextic(3).primitive() == Poly([1, -2, 11, -90, 225, -216, 72])
    assert sextic(4) == Poly([3, -6, 38, -320, 800, -768, 256])
    for r in range(3, 15):
        assert sextic(r)[0] == r - 1


def test_Q2_r3_factors():
    q2 = appendix_Q2(3)
    assert (Poly([2, 9, -9]) ** 2).divides(q2)
    assert Poly([1, -2, 11, -90, 225, -216, 72]).divides(q2)


@pytest.mark.parametrize("r", range(3, 15))
def test_appendix_operator_is_fuchsian_at_zero_and_infinity(r):
    # deg Q_j <= deg Q_2 - (2 - j), and Q_2 ~ p^2, Q_1 ~ p at the origin
    q2, q1, q0 = appendix_Q2(r), appendix_Q1(r), appendix_Q0(r)
    assert q2.degree == 21
    assert q1.degree <= 20 and q0.degree <= 19
    assert q2.valuation() == 2 and q1.valuation() >= 1
    assert appendix_Q1(r, corrected=True).degree == q1.degree


@pytest.mark.parametrize("r,c,tab", [(3, Fraction(-1, 4), 2), (4, Fraction(-1), 8), (5, Fraction(-1, 2), 4)])
def test_cr_search(r, c, tab):
    res = removal(r)
    assert res.c_r == c and res.tabulated == tab
    assert res.ratio == Fraction(-1, 8)
    assert res.order == 3 and len(res.primes) == 2
    assert all(v == [rational_mod(c, q)] for q, v in res.candidates.items())


def test_wrong_removal_coefficient_stays_order_four():
    res = removal(3)
    q = prime_sequence(1)[0]
    ((a, b),) = removal_series((1, 1), 3, 120, [q])
    good = a - b.scale(rational_mod(res.c_r, q))
    bad = a - b.scale(rational_mod(res.c_r + 1, q))
    assert guess_ode_mod(good, 3, res.degree) is not None
    assert guess_ode_mod(bad, 3, res.degree) is None


@pytest.mark.parametrize("r", [3, 4, 5])
def test_verify_factorization(r):
    rows = factorization(r)
    by = {row["check"].split(" (")[0]: row for row in rows[:6]}
    assert all(row["pass"] for row in by.values())
    assert all(by[k]["verified_order"] >= 100 for k in by if k.startswith("L4"))
    printed, corrected = rows[6], rows[7]
    assert not printed["pass"]
    assert corrected["pass"] and corrected["verified_order"] >= 60


def test_verify_factorization_preconditions():
    op, _ = order4(3)
    with pytest.raises(ValueError):
        verify_factorization(2, 100, op)
    with pytest.raises(ValueError):
        verify_factorization(3, 40, op)
