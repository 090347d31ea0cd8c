"""Explicit solutions, the second-order factor and the factorisation checks.

All closed forms here have a double pole at p = 0, so they are expanded as
p^2 * form; operators written for the forms themselves act on those series
after conjugation by p^-2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra.modular import crt_combine, prime_sequence, rational_reconstruct, rref_mod
from .algebra.poly import P, Poly, poly_prod
from .algebra.polymod import roots_mod
from .algebra.series import ModSeries, RatSeries
from .guess import ode_matrix
from .operators import DiffOperator, annihilates, compose, conjugate_by_power

log = logging.getLogger(__name__)


def _check_r(r) -> Fraction:
    r = Fraction(r)
    if r in (0, 1):
        raise ValueError(f"r = {r} is degenerate (dry-like wall)")
    return r


def _rpoly(cs: Sequence[int], r: Fraction) -> Fraction:
    return sum((Fraction(c) * r**i for i, c in enumerate(cs)), Fraction(0))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """c * prod f_i(p)^(e_i), with at most one half-integer exponent.

    A radicand is stored with constant term 1 so its Taylor series stays
    rational; the constant pulled out of it is kept in ``radicand_scale``
    (the form equals sqrt(radicand_scale) times the stored product).
    """

    kind: str
    r: Fraction
    factors: tuple[tuple[Poly, Fraction], ...]
    radicand: Poly | None = None
    radicand_scale: Fraction = Fraction(1)

    def pole_order(self) -> int:
        return -sum(int(e) for f, e in self.factors if f == P)

    def series(self, order: int) -> RatSeries:
        """Taylor series of p^2 * form through p^order (form scaled as stored)."""
        out = RatSeries([1] + [0] * order)
        shift = 2
        for f, e in self.factors:
            if f == P:
                shift += int(e)
                continue
            base = RatSeries.from_poly(f, order)
            if e.denominator == 2:
                term = base.sqrt()
                k = int(e - Fraction(1, 2))
                for _ in range(abs(k)):
                    term = term * (base if k > 0 else base.reciprocal())
            elif e >= 0:
                term = RatSeries.from_poly(f ** int(e), order)
            else:
                term = RatSeries.from_poly(f ** int(-e), order).reciprocal()
            out = out * term
        if shift < 0:
            raise ArithmeticError("form has a pole of order above 2 at the origin")
        return out.shift(shift)

    def vanishes_at(self, x) -> bool:
        x = Fraction(x)
        return any(e > 0 and f(x) == 0 for f, e in self.factors)

    def evaluate(self, x):
        """Exact zero where a numerator factor vanishes, otherwise a float."""
        x = Fraction(x)
        if self.vanishes_at(x):
            return Fraction(0)
        val = math.sqrt(float(self.radicand_scale)) if self.radicand is not None else 1.0
        for f, e in self.factors:
            v = float(f(x))
            val *= math.copysign(abs(v) ** float(e), v) if e.denominator == 1 else abs(v) ** float(e)
        return val

    def log_derivative(self) -> tuple[Poly, Poly]:
        """(numerator, denominator) of form'/form as polynomials."""
        den = poly_prod([f for f, _ in self.factors])
        num = Poly()
        for i, (f, e) in enumerate(self.factors):
            others = poly_prod([g for j, (g, _) in enumerate(self.factors) if j != i])
            num = num + f.derivative() * others * e
        return num, den


def quartic(r) -> Poly:
    r = Fraction(r)
    return Poly([r - 1, 0, -4 * r * r, 8 * r * r, -4 * r * r])


def closed_form_S(r) -> ClosedForm:
    """Square-root solution; the radicand is sign(r-1) P_4 scaled to constant term 1."""
    r = _check_r(r)
    p4 = quartic(r)
    radicand = p4 * (1 / (r - 1))
    A = Poly([r - 1, r * r, -r * r])
    B = Poly([r - 1, -r])
    C = Poly([1, -r])
    factors = (
        (radicand, Fraction(1, 2)),
        (Poly([1, -2]), Fraction(1)),
        (A, Fraction(1)),
        (P, Fraction(-2)),
        (B, Fraction(-3)),
        (C, Fraction(-2)),
    )
    return ClosedForm("ALGEBRAIC", r, factors, radicand, abs(r - 1))


# a_i(r), coefficients ascending in r, i = 0..7
A_COEFFS: tuple[tuple[int, ...], ...] = (
    (4, -11, 10, -3),
    (-16, 52, -60, 27, -3),
    (24, -96, 148, -91, 15),
    (-8, 64, -176, 156, -44, 8),
    (0, -16, 128, -168, 96, -40),
    (0, 0, -48, 96, -112, 72),
    (0, 0, 0, -16, 56, -56),
    (0, 0, 0, 0, -8, 16),
)

# Numerators printed for integer r
N_PRINTED: dict[int, tuple[int, ...]] = {
    3: (-10, 43, -87, 596, -2688, 5292, -4752, 1620),
    4: (-9, 24, 3, 543, -3144, 6304, -5504, 1792),
    5: (-44, 61, 311, 3228, -20720, 41450, -35500, 11250),
}


def rational_numerator(r) -> Poly:
    """sum_i a_i(r) p^i."""
    r = Fraction(r)
    return Poly([_rpoly(cs, r) for cs in A_COEFFS])


def normalized_numerator(r) -> tuple[Poly, Fraction]:
    """(N, c) with a(r) = c N, N integral and content-free, c > 0."""
    a = rational_numerator(r)
    c = a.content()
    return Poly([Fraction(x) / c for x in a.coeffs]), c


def closed_form_R(r, numerator: Poly | None = None) -> ClosedForm:
    """Rational solution sum a_i(r) p^i / [p^2 (1-2p)(1-rp)^2 (r-1-rp)^3]."""
    r = _check_r(r)
    num = rational_numerator(r) if numerator is None else numerator
    factors = (
        (num, Fraction(1)),
        (P, Fraction(-2)),
        (Poly([1, -2]), Fraction(-1)),
        (Poly([1, -r]), Fraction(-2)),
        (Poly([r - 1, -r]), Fraction(-3)),
    )
    return ClosedForm("RATIONAL", r, factors)


def first_order_annihilator(cf: ClosedForm) -> DiffOperator:
    """den * D - num with num/den = form'/form, content-normalised."""
    num, den = cf.log_derivative()
    return DiffOperator([-num, den]).normalized()


# ---------------------------------------------------------------------------
# appendix data: Q1 = p (r-1+r^2p-r^2p^2) sum b_n p^n, Q0 = sum c_n p^n
# each entry: (constant, power of (r-1), power of r, inner factors in r)
# ---------------------------------------------------------------------------

B_TABLE = (
    (6, 4, 0, [[1]]),
    (1, 3, 0, [[-2, 1], [6, -7]]),
    (-1, 2, 0, [[28, -42, -39, 62]]),
    (1, 2, 0, [[112, -280, 104, 125, -34]]),
    (2, 1, 0, [[70, -316, 685, -689, 221, 48]]),
    (-2, 1, 0, [[40, -266, 1808, -3351, 2266, -480, 36]]),
    (-2, 0, 0, [[8, -128, 3836, -12328, 16107, -10619, 3568, -488]]),
    (-2, 0, 1, [[24, -5336, 19108, -25748, 18075, -7763, 2180]]),
    (-4, 0, 2, [[2372, -9376, 8729, 261, -2058, -872]]),
    (4, 0, 2, [[1168, -5500, -7460, 33837, -31571, 10118]]),
    (-8, 0, 2, [[120, -856, -11826, 38080, -42551, 23886]]),
    (-8, 0, 3, [[104, 12720, -45638, 64846, -55321]]),
    (16, 0, 4, [[3728, -16832, 31869, -40228]]),
    (-16, 0, 4, [[1184, -7664, 20668, -39027]]),
    (64, 0, 4, [[40, -496, 2147, -6343]]),
    (64, 0, 5, [[56, -520, 2665]]),
    (512, 0, 6, [[7, -82]]),
    (4608, 0, 7, [[1]]),
)

C_TABLE = (
    (6, 5, 0, [[1]]),
    (1, 4, 0, [[16, -28, 15]]),
    (4, 3, 0, [[4, -15, 42, -38, 2]]),
    (1, 2, 0, [[20, -48, 356, -843, 711, -211]]),
    (-2, 2, 0, [[16, -2, -220, 198, 400, -537, 44]]),
    (-1, 1, 0, [[16, 44, -4488, 14058, -16044, 6591, 163, -462]]),
    (-8, 1, 1, [[8, -1482, 5311, -8213, 6705, -2631, 257, -16]]),
    (4, 0, 1, [[4, -4152, 21289, -51652, 74765, -64156, 30124, -6658, 486]]),
    (4, 0, 2, [[3312, -20040, 61048, -112851, 121460, -75705, 25080, -2980]]),
    (-2, 0, 2, [[2848, -22768, 90080, -206662, 258498, -196969, 86149, -17868]]),
    (16, 0, 2, [[64, -904, 4652, -11542, 11019, -4029, 1336, -2180]]),
    (4, 0, 3, [[496, -2240, -9776, 82392, -186525, 139737, -31298]]),
    (-16, 0, 4, [[304, -6836, 36692, -94962, 84274, -36391]]),
    (8, 0, 4, [[192, -8520, 58712, -204132, 217558, -151819]]),
    (32, 0, 5, [[640, -6752, 34336, -44638, 49757]]),
    (-16, 0, 5, [[160, -3456, 29052, -47800, 87825]]),
    (-64, 0, 6, [[96, -1776, 4036, -13105]]),
    (-64, 0, 7, [[192, -776, 5095]]),
    (-1024, 0, 8, [[4, -73]]),
    (-7680, 0, 9, [[1]]),
)


def _table_value(entry, r: Fraction) -> Fraction:
    const, e1, e2, inner = entry
    val = Fraction(const) * (r - 1) ** e1 * r**e2
    for cs in inner:
        val *= _rpoly(cs, r)
    return val


def sextic(r) -> Poly:
    r = Fraction(r)
    return Poly([r - 1, -2 * (r - 1), -2 * (1 - r - r * r), -20 * r * r, 50 * r * r, -48 * r * r, 16 * r * r])


def appendix_Q2(r) -> Poly:
    r = Fraction(r)
    return poly_prod([
        P * P,
        Poly([1, -2]),
        Poly([1, -1]),
        Poly([1, 4, -4]),
        Poly([r - 1, -r]),
        Poly([r - 1, r * r, -r * r]) ** 2,
        quartic(r),
        sextic(r),
    ])


# Entries whose printed overall sign is inconsistent with the reconstructed
# operators: b_1 and c_6 (see appendix_L2).
SIGN_CORRECTIONS = {"b": (1,), "c": (6,)}


def _table(table, r: Fraction, flips: Sequence[int]) -> Poly:
    return Poly([-_table_value(e, r) if n in flips else _table_value(e, r) for n, e in enumerate(table)])


def appendix_Q1(r, corrected: bool = False) -> Poly:
    r = Fraction(r)
    inner = _table(B_TABLE, r, SIGN_CORRECTIONS["b"] if corrected else ())
    return P * Poly([r - 1, r * r, -r * r]) * inner


def appendix_Q0(r, corrected: bool = False) -> Poly:
    r = Fraction(r)
    return _table(C_TABLE, r, SIGN_CORRECTIONS["c"] if corrected else ())


def appendix_L2(r, corrected: bool = False) -> DiffOperator:
    """Q2 D^2 + Q1 D + Q0 from the tabulated data.

    With ``corrected`` the overall signs of b_1 and c_6 are flipped; only
    then does L2 composed with the monic first-order factor annihilate the
    order-3 part of the physical solution.
    """
    r = _check_r(r)
    return DiffOperator([appendix_Q0(r, corrected), appendix_Q1(r, corrected), appendix_Q2(r)])


def compose_monic_right(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    """den^(k+1) * a ∘ (b / den), den = head of the first-order operator b.

    This is a composed with the monic form D - (num/den) of b, with the
    left factor cleared to polynomial coefficients.
    """
    if b.order != 1:
        raise ValueError("right factor must be first order")
    den = b.head
    k = a.order
    # den^(k+1) * a ∘ den^-1: D^j (y/den) = sum_l C(j,l) (1/den)^(j-l) y^(l),
    # with (1/den)^(m) = u_m / den^(m+1)
    u = [Poly([1])]
    for m in range(1, k + 1):
        prev = u[-1]
        u.append(prev.derivative() * den - prev * den.derivative() * m)
    coeffs = [Poly() for _ in range(k + 1)]
    for j, q in enumerate(a.coeffs):
        for l in range(j + 1):
            m = j - l
            coeffs[l] = coeffs[l] + q * u[m] * den ** (k - m) * math.comb(j, l)
    cleared = DiffOperator(coeffs)
    return compose(cleared, b)


# ---------------------------------------------------------------------------
# c_r search
# ---------------------------------------------------------------------------


@dataclass
class CrResult:
    """Outcome of the removal search; c_r refers to R built on the content-free numerator."""

    r: Fraction
    c_r: Fraction | None
    primes: list[int]
    residues: list[int]
    order: int
    degree: int | None
    candidates: dict[int, list[int]] = field(default_factory=dict)

    @property
    def tabulated(self) -> Fraction:
        """Content of sum a_i(r) p^i, the multiplier implied by the tabulated a_i."""
        return normalized_numerator(self.r)[1]

    @property
    def ratio(self) -> Fraction | None:
        return None if self.c_r is None else self.c_r / self.tabulated


def _det_mod(m: np.ndarray, q: int) -> int:
    a = m.astype(np.int64) % q
    n = a.shape[0]
    det = 1
    for c in range(n):
        nz = np.flatnonzero(a[c:, c])
        if nz.size == 0:
            return 0
        piv = c + int(nz[0])
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            det = -det
        pv = int(a[c, c])
        det = det * pv % q
        inv = pow(pv, -1, q)
        f = a[c + 1:, c] * inv % q
        a[c + 1:] = (a[c + 1:] - (f[:, None] * a[c]) % q) % q
    return det % q


def _interpolate_mod(xs: Sequence[int], ys: Sequence[int], q: int) -> list[int]:
    """Coefficients (low to high) of the interpolating polynomial over GF(q)."""
    n = len(xs)
    coeffs = [0] * n
    for i in range(n):
        basis = [1]
        denom = 1
        for j in range(n):
            if j == i:
                continue
            basis = [(a - xs[j] * b) % q for a, b in zip([0] + basis, basis + [0])]
            denom = denom * (xs[i] - xs[j]) % q
        scale = ys[i] * pow(denom, -1, q) % q
        for t in range(n):
            coeffs[t] = (coeffs[t] + scale * basis[t]) % q
    return coeffs


def removal_candidates(a: ModSeries, b: ModSeries, order: int, degree: int,
                       holdout: int = 10) -> list[int]:
    """Residues c for which a - c b satisfies a theta-form ODE of this shape.

    The fit matrix is linear in the series, M(c) = M_a - c M_b; the values
    of c where a square block loses rank are the roots of det(M_a - c M_b),
    found by interpolation and root finding over GF(q), then each candidate
    is confirmed on the full system including held-out rows.
    """
    q = a.prime
    ma = ode_matrix(a.coeffs, q, order, degree)
    mb = ode_matrix(b.coeffs, q, order, degree)
    n = ma.shape[1]
    if ma.shape[0] < n + holdout:
        raise ValueError(f"need {n + holdout} terms for order {order}, degree {degree}")
    sa, sb = ma[:n], mb[:n]
    xs = list(range(1, n + 2))
    ys = [_det_mod((sa - c * sb) % q, q) for c in xs]
    poly = _interpolate_mod(xs, ys, q)
    if not any(poly):
        return []
    out = []
    for c in roots_mod(poly, q):
        full = (ma - c * mb) % q
        _, piv = rref_mod(full, q)
        if n - len(piv) >= 1:
            out.append(int(c))
    return sorted(out)


def removal_series(seed, r, order: int, primes: Sequence[int]) -> list[tuple[ModSeries, ModSeries]]:
    """(p^2 S, p^2 R_N) modulo each prime, R_N built on the content-free numerator."""
    from .percolation import specialize_mod_many

    r = _check_r(r)
    num, _ = normalized_numerator(r)
    R = closed_form_R(r, num)
    rs = R.series(order)
    phys = specialize_mod_many(seed, r, order, primes)
    out = []
    for s, q in zip(phys, primes):
        out.append((s.shift(2), rs.to_mod(q)))
    return out


def cr_search(r, *, seed=(1, 1), order: int = 3, degrees: Sequence[int] = tuple(range(4, 41)),
              nprimes: int = 2, holdout: int = 10) -> CrResult:
    """Find c_r making p^2 S - c_r p^2 R a solution of an order-3 ODE."""
    r = _check_r(r)
    primes = prime_sequence(nprimes)
    max_terms = (order + 1) * (max(degrees) + 1) + holdout + 2
    series = removal_series(seed, r, max_terms, primes)
    for d in degrees:
        need = (order + 1) * (d + 1) + holdout
        cands = {}
        for (a, b), q in zip(series, primes):
            cands[q] = removal_candidates(a.truncate(need - 1), b.truncate(need - 1), order, d, holdout)
        if not any(cands.values()):
            continue
        result = CrResult(r, None, list(primes), [], order, d, cands)
        if any(len(v) != 1 for v in cands.values()):
            log.warning("c_r not unique at degree %d: %s", d, cands)
            return result
        result.residues = [cands[q][0] for q in primes]
        value, modulus = crt_combine(zip(result.residues, primes))
        single = rational_reconstruct(result.residues[0], primes[0])
        combined = rational_reconstruct(value, modulus)
        result.c_r = combined if combined is not None else single
        return result
    return CrResult(r, None, list(primes), [], order, None)


# ---------------------------------------------------------------------------
# factorisation checks
# ---------------------------------------------------------------------------


def _shifted_check(op: DiffOperator, series: RatSeries) -> tuple[bool, int]:
    """op annihilates f where series = p^2 f."""
    return annihilates(conjugate_by_power(op, -2), series)


def verify_factorization(r, order: int, L4: DiffOperator, *, seed=(1, 1),
                         c_r: Fraction | None = None, physical: RatSeries | None = None) -> list[dict]:
    """Behavioural checks of L4 = L2 LS (+) LR, each with its verified order.

    L2 is composed with the monic form of LS. Without ``c_r`` the removal
    coefficient is found with cr_search. The G_r check is reported twice,
    for the tabulated L2 and for the sign-corrected one.
    """
    r = _check_r(r)
    if r == 2:
        raise ValueError("r = 2 is special: the operator is third order")
    if order < 60:
        raise ValueError("order must be at least 60")
    from .percolation import specialize_series

    S = closed_form_S(r)
    num, _ = normalized_numerator(r)
    R = closed_form_R(r, num)
    LS = first_order_annihilator(S)
    LR = first_order_annihilator(R)
    L3 = compose_monic_right(appendix_L2(r), LS)
    L3c = compose_monic_right(appendix_L2(r, corrected=True), LS)
    s_ser = S.series(order)
    r_ser = R.series(order)
    phys = specialize_series(seed, r, order) if physical is None else physical
    if c_r is None:
        c_r = cr_search(r, seed=seed).c_r
        if c_r is None:
            raise ArithmeticError(f"no removal coefficient found for r = {r}")
    g_ser = phys.shift(2) - r_ser.scale(c_r)
    report = []

    def add(name, res):
        ok, v = res
        report.append({"check": name, "verified_order": v, "pass": bool(ok)})

    add("LR annihilates R", _shifted_check(LR, r_ser))
    add("LS annihilates S", _shifted_check(LS, s_ser))
    add("L2.LS annihilates S", _shifted_check(L3, s_ser))
    add("L4 annihilates S", _shifted_check(L4, s_ser))
    add("L4 annihilates R", _shifted_check(L4, r_ser))
    add("L4 annihilates physical series", annihilates(L4, phys))
    add(f"L2.LS annihilates G_r (c_r = {c_r})", _shifted_check(L3, g_ser))
    add(f"L2.LS annihilates G_r (c_r = {c_r}, b_1 and c_6 sign-corrected)", _shifted_check(L3c, g_ser))
    return report
