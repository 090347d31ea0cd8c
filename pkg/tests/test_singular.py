from fractions import Fraction

import mpmath
import pytest

from dampwall.algebra.poly import P, Poly, poly_prod
from dampwall.algebra.series import RatSeries
from dampwall.operators import DiffOperator, theta_form
from dampwall.percolation import closed_form
from dampwall.repro import ODE_R2, table2
from dampwall.singular import (
    IrregularSingularity,
    NoEstimate,
    critical_exponent_estimate,
    head_polynomial,
    indicial_exponents,
    nearest_to_origin,
    pade_scan,
    quartic,
    quartic_crossover,
    singular_points,
    structural_factors,
)

from helpers import exact_series, order4

DRY = DiffOperator([-1, Poly([1, -1]) * Poly([1, -2])])


def test_head_polynomial_examples():
    assert head_polynomial(DRY) == Poly([1, -3, 2])
    expected = poly_prod([P**2, Poly([1, -1]), Poly([1, -2]) ** 3, Poly([1, 4, -4])])
    head = head_polynomial(ODE_R2)
    assert head == expected * Fraction(head.lc, expected.lc)


@pytest.mark.parametrize("r", [3, 4, 5])
def test_structural_factors_generic(r):
    op, _ = order4(r)
    sf = structural_factors(op.head, r)
    assert sf.complete and not sf.coalesced
    assert len(sf.matched) == 6
    assert sf.product() == op.head
    # theta-degree 33 minus the degree-13 structural part
    assert sf.cofactor.degree == 20 and sf.origin_power == 3


def test_structural_factors_r4_display():
    op, _ = order4(4)
    sf = structural_factors(op.head, 4)
    found = {f: m for _, f, m in sf.matched}
    assert found[Poly([1, -4])] == 1 and found[Poly([3, -4])] == 1
    assert found[Poly([3, 0, -64, 128, -64])] == 1
    assert found[Poly([1, -2])] == 4


def test_structural_factors_r5_divisible():
    op, _ = order4(5)
    q4 = poly_prod([Poly([1, -2]) ** 4, Poly([1, -1]), Poly([1, 4, -4]), Poly([1, -5]), Poly([4, -5]),
                    quartic(5).primitive()])
    assert q4.divides(op.head)


def test_structural_factors_report_coalescence_at_r2():
    head = poly_prod([Poly([1, -2]) ** 6, Poly([1, -1]), Poly([1, 4, -4]), quartic(2), Poly([3, 1])])
    sf = structural_factors(head, 2)
    assert ("(1-2p)", "(1-rp)", "(r-1-rp)") in sf.coalesced
    assert sf.complete and sf.cofactor == Poly([3, 1])
    assert sf.product() == head


def test_structural_factors_report_missing():
    sf = structural_factors(Poly([1, -2]) ** 4 * Poly([1, -1]), 3)
    assert not sf.complete
    assert ("(1-rp)", 1) in sf.missing
    with pytest.raises(ValueError):
        structural_factors(Poly([1, -2]), 1)


def test_singular_points_r3():
    pts = singular_points(3)
    rational = {pt.value for pt in pts if pt.is_rational}
    assert {Fraction(1, 3), Fraction(2, 3), Fraction(1, 2), Fraction(1)} <= rational
    algebraic = [pt for pt in pts if not pt.is_rational]
    assert len(algebraic) == 6
    with mpmath.workdps(50):
        for pt in algebraic:
            z = complex(pt.approx)
            assert abs(complex(mpmath.polyval(pt.minpoly.coeffs[::-1], z))) <= 1e-12 * max(1, abs(z)) ** pt.minpoly.degree
    with pytest.raises(ValueError):
        singular_points(1)


def test_nearest_positive_real_below_one():
    for r in (Fraction(1, 2), Fraction(1, 4), Fraction(9, 10)):
        near = nearest_to_origin(singular_points(r))
        assert near["positive_real"].value == Fraction(1, 2)


def test_quartic_crossover():
    rc = quartic_crossover()
    assert abs(rc - 1.186659) < 1e-6
    above = nearest_to_origin(singular_points(Fraction(119, 100)))["overall"]
    below = nearest_to_origin(singular_points(Fraction(118, 100)))["overall"]
    assert above.label == "P4" and complex(above.approx).real < 0
    assert below.label == "1-1/r"


def test_indicial_first_and_second_order():
    assert indicial_exponents(DRY, Fraction(1, 2)).exponents == [-1]
    homog = DiffOperator(ODE_R2.coeffs)
    assert sorted(indicial_exponents(homog, Fraction(1, 2)).exponents) == [-2, 2]


def test_irregular_point_reported():
    with pytest.raises(IrregularSingularity):
        indicial_exponents(DiffOperator([-1, 1]), "infinity")


@pytest.mark.parametrize("r", [3, 4, 5, 6])
def test_tabulated_exponents_integer_r(r):
    op, _ = order4(r)
    rows = table2(r, op)
    assert all(row["pass"] for row in rows), [row for row in rows if not row["pass"]]


def test_exponents_at_r_one_half():
    # every row matches except infinity: the operator drops two theta-degrees
    # at r = 1/2 and the exponent sum at infinity rises by two
    op, _ = order4(Fraction(1, 2))
    rows = {row["label"]: row for row in table2(Fraction(1, 2), op)}
    assert [label for label, row in rows.items() if not row["pass"]] == ["infinity"]
    assert rows["infinity"]["found"] == ["2", "2", "3", "4"]
    assert max(t.degree for t in theta_form(op)[1]) == 31
    for nearby in (Fraction(49, 100), Fraction(51, 100)):
        near, _ = order4(nearby)
        assert indicial_exponents(near, "infinity").exponents == [1, 2, 2, 4]


def test_exponents_at_r_three_halves():
    # 1/r = 2/3 collides with three roots of the apparent cofactor
    op, _ = order4(Fraction(3, 2))
    rows = {row["label"]: row for row in table2(Fraction(3, 2), op)}
    assert [label for label, row in rows.items() if not row["pass"]] == ["1/r"]
    assert rows["1/r"]["found"] == ["-2", "1", "2", "3"]
    sf = structural_factors(op.head, Fraction(3, 2))
    assert sf.cofactor(Fraction(2, 3)) == 0
    for nearby in (Fraction(149, 100), Fraction(151, 100)):
        near, _ = order4(nearby)
        assert indicial_exponents(near, 1 / nearby).exponents == [-2, 0, 1, 2]


def test_pade_scan_dry_pole():
    s = closed_form("dry", 1, 1, order=20)
    scan = pade_scan(s, degree=10)
    assert any(abs(z - 0.5) < 1e-6 for z in scan.all_real_poles)


def test_pade_scan_constant_has_no_poles():
    scan = pade_scan(RatSeries([1] + [0] * 20), degree=10)
    assert scan.all_real_poles == [] and scan.real_poles == []
    assert scan.to_csv().startswith("p,value\n")


def test_pade_scan_recovers_known_poles():
    s = RatSeries.from_rational(Poly([1, 3]), Poly([1, -3]) * Poly([1, -5, 4]), 40)
    scan = pade_scan(s, degree=12, window=(0.0, 0.9))
    for pole in (0.25, 1 / 3):
        assert any(abs(z - pole) < 1e-6 for z in scan.real_poles)
    with pytest.raises(ValueError):
        pade_scan(s, degree=30)


@pytest.mark.parametrize("r", [Fraction(4, 3), Fraction(3, 2), Fraction(5, 3)])
def test_no_physical_pole_at_one_minus_inverse_r(r):
    scan = pade_scan(exact_series(r, 100), window=(0.0, 0.45), degree=50)
    assert not scan.poles_near(float(1 - 1 / r), 1e-3)
    assert any(abs(z - 0.5) < 0.01 for z in scan.all_real_poles)


@pytest.mark.parametrize("r,gamma", [(0, 1), (2, 2), (Fraction(1, 2), 1)])
def test_gamma_estimates(r, gamma):
    est = critical_exponent_estimate(exact_series(r, 100))
    assert abs(est.gamma - gamma) < 0.05
    assert abs(est.p_c - 0.5) < 0.005
    assert len(est.samples) >= 2


def test_no_estimate_without_pole():
    s = RatSeries.from_rational(Poly([1]), Poly([1, -1]), 60)
    with pytest.raises(NoEstimate):
        critical_exponent_estimate(s)
    with pytest.raises(ValueError):
        critical_exponent_estimate(s.truncate(20))
