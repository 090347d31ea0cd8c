from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampwall.algebra.poly import P, Poly
from dampwall.algebra.series import RatSeries
from dampwall.operators import (
    DiffOperator,
    PRecurrence,
    annihilates,
    apply_operator,
    compose,
    conjugate_by_power,
    homogenize,
    ode_to_recurrence,
    recurrence_to_ode,
    theta_form,
    theta_to_operator,
    verified_length,
)
from dampwall.percolation import closed_form

D = DiffOperator([0, 1])
DRY = DiffOperator([-1, Poly([1, -1]) * Poly([1, -2])])


def test_zero_operator_rejected():
    with pytest.raises(ValueError):
        DiffOperator([0, 0])


def test_dry_operator_annihilates_dry_series():
    s = closed_form("dry", 1, 1, order=30)
    ok, v = annihilates(DRY, s)
    assert ok and v == 30 - 1 - 2
    assert verified_length(DRY, 30) == 28


def test_residual_detects_perturbation():
    s = closed_form("dry", 1, 1, order=20)
    bad = RatSeries(list(s.coeffs[:10]) + [s.coeffs[10] + 1] + list(s.coeffs[11:]))
    assert not annihilates(DRY, bad)[0]


def test_compose_examples():
    assert compose(D, D).coeffs == (Poly(), Poly(), Poly([1]))
    pD = DiffOperator([0, P])
    assert compose(D, pD).coeffs == (Poly(), Poly([1]), P)


def test_normalized_sign_and_content():
    op = DiffOperator([Poly([Fraction(2, 3)]), Poly([Fraction(-4, 3), 2])]).normalized()
    assert op.coeffs == (Poly([-1]), Poly([2, -3]))


polys = st.lists(st.integers(-4, 4), min_size=1, max_size=3).map(Poly)
ops = st.lists(polys, min_size=1, max_size=3).filter(lambda cs: any(not c.is_zero() for c in cs)).map(DiffOperator)


@settings(max_examples=40, deadline=None)
@given(ops, ops, polys)
def test_compose_matches_sequential_application(a, b, f):
    assert compose(a, b)(f) == a(b(f))


@settings(max_examples=30, deadline=None)
@given(ops, ops, ops, polys)
def test_compose_associative(a, b, c, f):
    assert compose(compose(a, b), c)(f) == compose(a, compose(b, c))(f)


@settings(max_examples=30, deadline=None)
@given(ops, st.integers(-3, 3), polys)
def test_conjugation(op, k, f):
    m = conjugate_by_power(op, k)
    g = f * P**3  # keeps p^k f polynomial for k >= -3
    lhs = m(g)
    rhs = op(g.mul_x(k))
    s = max(0, op.order - k) if k < 0 else 0
    assert lhs == rhs.mul_x(s)


@settings(max_examples=30, deadline=None)
@given(st.lists(polys, min_size=1, max_size=4).filter(lambda cs: not cs[-1].is_zero()))
def test_theta_roundtrip(theta):
    op = theta_to_operator(theta)
    s, back, _ = theta_form(op)
    # both describe the same action up to a power of p
    f = Poly([1, 2, 3, 4, 5])
    direct = Poly()
    g = f
    for r in theta:
        direct = direct + r * g
        g = P * g.derivative()
    via = Poly()
    g = f
    for r in back:
        via = via + r * g
        g = P * g.derivative()
    v = direct.valuation() - via.valuation() if not direct.is_zero() else 0
    assert (direct.is_zero() and via.is_zero()) or direct == via.mul_x(v)


def test_recurrence_to_ode_geometric():
    rec = PRecurrence([1, -2])
    # sum_n (a_n - 2 a_(n-1)) p^n = (1 - 2p) S = a_0
    op = recurrence_to_ode(rec, [1])
    assert op.coeffs == (Poly([1, -2]),) and op.rhs == Poly([1])
    assert homogenize(op).normalized().coeffs == (Poly([-2]), Poly([1, -2]))
    s = RatSeries([2**n for n in range(20)])
    assert annihilates(homogenize(op), s)[0]


def test_recurrence_with_initial_terms_gives_inhomogeneous_ode():
    n = P
    rec = PRecurrence([n + 1, -(4 * n - 2)])
    cat = RatSeries([1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786])
    op = recurrence_to_ode(rec, cat.coeffs[:1])
    assert op.rhs is not None
    assert annihilates(op, cat)[0]
    assert annihilates(homogenize(op), cat)[0]


def test_ode_to_recurrence_roundtrip():
    rec = ode_to_recurrence(DRY)
    s = closed_form("dry", 1, 1, order=25)
    assert not any(rec.residuals(s.coeffs))


def test_degenerate_recurrence_rejected():
    with pytest.raises(ValueError):
        PRecurrence([1])
    with pytest.raises(ValueError):
        PRecurrence([0, 1])


def test_apply_operator_rejects_short_series():
    with pytest.raises(ValueError):
        apply_operator(DiffOperator([0, 0, P**5]), RatSeries([1, 2, 3]))
