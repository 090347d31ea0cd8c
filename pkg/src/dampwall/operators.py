"""Linear differential operators and P-recurrences with polynomial coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .algebra.poly import Poly
from .algebra.series import ModSeries, RatSeries


def _as_poly(c) -> Poly:
    if isinstance(c, Poly):
        return c
    if isinstance(c, (int, Fraction)):
        return Poly([c])
    return Poly(c)


def _stirling2(n: int, k: int) -> int:
    return sum((-1) ** (k - j) * math.comb(k, j) * j**n for j in range(k + 1)) // math.factorial(k)


def _falling(x: Poly, j: int) -> Poly:
    out = Poly([1])
    for i in range(j):
        out = out * (x - i)
    return out


@dataclass(frozen=True)
class DiffOperator:
    """sum_j Q_j(p) d^j/dp^j, optionally with a polynomial right-hand side."""

    coeffs: tuple[Poly, ...]
    rhs: Poly | None = None

    def __init__(self, coeffs: Sequence, rhs=None):
        cs = [_as_poly(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        if not cs:
            raise ValueError("the zero operator is not allowed")
        object.__setattr__(self, "coeffs", tuple(cs))
        if rhs is not None:
            rhs = _as_poly(rhs)
        object.__setattr__(self, "rhs", rhs if rhs is not None and not rhs.is_zero() else None)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def head(self) -> Poly:
        return self.coeffs[-1]

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.coeffs)

    @property
    def is_homogeneous(self) -> bool:
        return self.rhs is None

    def homogeneous_part(self) -> "DiffOperator":
        return DiffOperator(self.coeffs)

    def normalized(self) -> "DiffOperator":
        """Integer, content-free form whose head has a positive lowest coefficient."""
        polys = list(self.coeffs) + ([self.rhs] if self.rhs is not None else [])
        fr = [Fraction(c) for poly in polys for c in poly.coeffs]
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
        num = reduce(math.gcd, (f.numerator * (den // f.denominator) for f in fr), 0)
        scale = Fraction(den, num)
        head = self.head
        if head[head.valuation()] * scale < 0:
            scale = -scale
        cs = [c * scale for c in self.coeffs]
        rhs = self.rhs * scale if self.rhs is not None else None
        return DiffOperator(cs, rhs)

    def scale(self, c) -> "DiffOperator":
        return DiffOperator([q * c for q in self.coeffs], None if self.rhs is None else self.rhs * c)

    def __call__(self, f: Poly) -> Poly:
        """Apply to a polynomial exactly (rhs ignored)."""
        out = Poly()
        d = f
        for q in self.coeffs:
            out = out + q * d
            d = d.derivative()
        return out

    def __str__(self) -> str:
        terms = []
        for j, q in enumerate(self.coeffs):
            if q.is_zero():
                continue
            dpart = "" if j == 0 else ("D" if j == 1 else f"D^{j}")
            terms.append(f"({q}){dpart}")
        s = " + ".join(terms)
        return s + (f" = {self.rhs}" if self.rhs is not None else "")


def _derivative_table(a: Sequence[int], k: int, n: int, prime: int | None = None):
    """[j][i] = coefficient of p^i in the j-th derivative, for i < n."""
    out = []
    for j in range(k + 1):
        row = []
        for i in range(n):
            c = a[i + j] * math.perm(i + j, j)
            row.append(c % prime if prime else c)
        out.append(row)
    return out


def verified_length(op: DiffOperator, series_order: int) -> int:
    """Number of residual coefficients the apply step guarantees."""
    return series_order - op.order - op.degree + 1


def apply_operator(op: DiffOperator, series):
    """Residual sum_j Q_j s^(j) - rhs, truncated to series order - op order - max degree.

    A residual of zeros means the series is annihilated through that order.
    """
    mod = isinstance(series, ModSeries)
    q = series.prime if mod else None
    n = verified_length(op, series.order)
    if n <= 0:
        raise ValueError(f"series of order {series.order} too short for an operator "
                         f"of order {op.order} and degree {op.degree}")
    a = series.coeffs
    table = _derivative_table(a, op.order, n, q)
    out = [0] * n
    for j, poly in enumerate(op.coeffs):
        row = table[j]
        for i, c in enumerate(poly.coeffs):
            if not c:
                continue
            if mod:
                c = _to_mod(c, q)
            for t in range(i, n):
                out[t] += c * row[t - i]
    if op.rhs is not None:
        for i, c in enumerate(op.rhs.coeffs):
            if i < n:
                out[i] -= _to_mod(c, q) if mod else c
    if mod:
        return ModSeries([x % q for x in out], q)
    return RatSeries(out)


def _to_mod(c, q: int) -> int:
    c = Fraction(c)
    return c.numerator * pow(c.denominator, -1, q) % q


def annihilates(op: DiffOperator, series) -> tuple[bool, int]:
    """(all residual coefficients vanish, verified order)."""
    res = apply_operator(op, series)
    return all(c == 0 for c in res.coeffs), res.order


def compose(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    """Operator product a∘b (apply b first), by the Leibniz rule."""
    if not (a.is_homogeneous and b.is_homogeneous):
        raise ValueError("compose expects homogeneous operators")
    out = [Poly() for _ in range(a.order + b.order + 1)]
    for i, ai in enumerate(a.coeffs):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b.coeffs):
            for l in range(i + 1):
                term = bj.derivative(i - l)
                if term.is_zero():
                    continue
                out[j + l] = out[j + l] + ai * term * math.comb(i, l)
    return DiffOperator(out)


def conjugate_by_power(op: DiffOperator, k: int) -> DiffOperator:
    """Operator M with M(F) = p^s * op(p^k F), s the smallest shift keeping M polynomial.

    Used to act on p^2 * f power series when f has a double pole at p = 0.
    """
    K = op.order
    s = max(0, K - k) if k < 0 else 0
    out = [Poly() for _ in range(K + 1)]
    for j, q in enumerate(op.coeffs):
        for l in range(j + 1):
            m = j - l
            c = math.comb(j, l) * math.prod(k - i for i in range(m))
            if c == 0:
                continue
            e = k - m + s
            if e < 0:
                raise ArithmeticError("negative power survived the shift")
            out[l] = out[l] + q.mul_x(e) * c
    rhs = None if op.rhs is None else op.rhs.mul_x(s)
    return DiffOperator(out, rhs)


def homogenize(op: DiffOperator) -> DiffOperator:
    """(f D - f') ∘ L, annihilating every solution of L y = f."""
    if op.rhs is None:
        return op
    f = op.rhs
    left = DiffOperator([-f.derivative(), f])
    return compose(left, op.homogeneous_part())


def theta_to_operator(theta: Sequence[Poly], rhs: Poly | None = None) -> DiffOperator:
    """D-form of sum_j R_j(p) theta^j (= rhs), theta = p d/dp.

    Uses theta^j = sum_l S2(j, l) p^l D^l, then removes the largest power of p
    dividing every coefficient and the right-hand side.
    """
    out = [Poly() for _ in range(len(theta))]
    for j, r in enumerate(theta):
        for l in range(j + 1):
            s2 = _stirling2(j, l)
            if s2:
                out[l] = out[l] + r.mul_x(l) * s2
    polys = [c for c in out if not c.is_zero()] + ([rhs] if rhs is not None and not rhs.is_zero() else [])
    v = min(c.valuation() for c in polys)
    if v:
        out = [c.mul_x(-v) if not c.is_zero() else c for c in out]
        rhs = rhs.mul_x(-v) if rhs is not None and not rhs.is_zero() else rhs
    return DiffOperator(out, rhs)


def theta_form(op: DiffOperator) -> tuple[int, list[Poly], Poly | None]:
    """(s, R) with p^s * op = sum_j R_j theta^j, s the least shift making it polynomial."""
    K = op.order
    s = max(0, max(j - c.valuation() for j, c in enumerate(op.coeffs) if not c.is_zero()))
    # p^s Q_l D^l = p^(s-l) Q_l (p^l D^l); p^l D^l = theta(theta-1)...(theta-l+1)
    theta = [Poly() for _ in range(K + 1)]
    x = Poly.x()
    for l, q in enumerate(op.coeffs):
        if q.is_zero():
            continue
        lead = q.mul_x(s - l)
        fall = _falling(x, l)
        for j, c in enumerate(fall.coeffs):
            if c:
                theta[j] = theta[j] + lead * c
    rhs = None if op.rhs is None else op.rhs.mul_x(s)
    return s, theta, rhs


# ---------------------------------------------------------------------------
# recurrences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PRecurrence:
    """sum_{j=0}^{s} c_j(n) a_{n-j} = 0 for n >= start."""

    coeffs: tuple[Poly, ...]
    start: int = 0

    def __init__(self, coeffs: Sequence, start: int | None = None):
        cs = [_as_poly(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        if not cs or cs[0].is_zero():
            raise ValueError("degenerate recurrence: the leading polynomial c_0 vanishes")
        if len(cs) == 1:
            raise ValueError("degenerate recurrence: no shifted terms")
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "start", len(cs) - 1 if start is None else start)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.coeffs)

    def normalized(self) -> "PRecurrence":
        fr = [Fraction(c) for poly in self.coeffs for c in poly.coeffs]
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
        num = reduce(math.gcd, (f.numerator * (den // f.denominator) for f in fr), 0)
        scale = Fraction(den, num)
        lead = self.coeffs[0]
        if lead.lc * scale < 0:
            scale = -scale
        return PRecurrence([c * scale for c in self.coeffs], self.start)

    def residuals(self, a: Sequence, start: int | None = None) -> list:
        lo = self.start if start is None else start
        return [sum(c(n) * a[n - j] for j, c in enumerate(self.coeffs)) for n in range(lo, len(a))]

    def __str__(self) -> str:
        parts = []
        for j, c in enumerate(self.coeffs):
            idx = "a_n" if j == 0 else f"a_(n-{j})"
            parts.append(f"({str(c).replace('p', 'n')})*{idx}")
        return " + ".join(parts) + " = 0"


def recurrence_to_ode(rec: PRecurrence, initial: Sequence | None = None) -> DiffOperator:
    """Operator L = sum_j p^j c_j(theta + j) with L S = (polynomial from initial terms).

    ``initial`` supplies a_0..a_{start-1} (ValueError if fewer are given);
    without it the right-hand side is unknown and the bare L is returned.
    """
    n = Poly.x()
    ops = []
    for j, c in enumerate(rec.coeffs):
        shifted = c.compose(n + j)  # polynomial in theta
        # theta^i = sum_l S2(i, l) p^l D^l
        dcoeffs = [Poly() for _ in range(shifted.degree + 1)]
        for i, ci in enumerate(shifted.coeffs):
            for l in range(i + 1):
                s2 = _stirling2(i, l)
                if s2:
                    dcoeffs[l] = dcoeffs[l] + Poly.monomial(l + j, ci * s2)
        ops.append(dcoeffs)
    width = max(len(d) for d in ops)
    total = [Poly() for _ in range(width)]
    for d in ops:
        for l, poly in enumerate(d):
            total[l] = total[l] + poly
    op = DiffOperator(total)
    if initial is None:
        return op
    a = list(initial)
    if len(a) < rec.start:
        raise ValueError(f"need at least {rec.start} initial terms")
    # coefficients of L S below `start` come only from the initial terms
    res = apply_operator(op, RatSeries(a + [0] * (op.order + op.degree)))
    return DiffOperator(total, Poly(res.coeffs[: rec.start]))


def ode_to_recurrence(op: DiffOperator) -> PRecurrence:
    """Recurrence for the Taylor coefficients of solutions of a homogeneous operator.

    [p^n] Q_j S^(j) = sum_i q_{j,i} (n-i+1)...(n-i+j) a_{n-i+j}; terms are
    grouped by the shift i-j and re-indexed so the smallest shift is 0.
    """
    if op.rhs is not None:
        raise ValueError("ode_to_recurrence needs a homogeneous operator")
    n = Poly.x()
    by_shift: dict[int, Poly] = {}
    for j, q in enumerate(op.coeffs):
        for i, c in enumerate(q.coeffs):
            if not c:
                continue
            rising = Poly([1])
            for t in range(1, j + 1):
                rising = rising * (n - i + t)
            s = i - j
            by_shift[s] = by_shift.get(s, Poly()) + rising * c
    smin, smax = min(by_shift), max(by_shift)
    coeffs = [by_shift.get(s, Poly()).compose(n + smin) for s in range(smin, smax + 1)]
    # valid once every shifted index n - t is non-negative and n + smin >= 0
    return PRecurrence(coeffs, start=max(smax - smin, -smin))
