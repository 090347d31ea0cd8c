"""Dense univariate polynomials with exact integer/rational coefficients.

Coefficients are stored lowest degree first. Rational coefficients whose
denominator is 1 are kept as plain ints so integer polynomials stay cheap.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


def _norm(c) -> Number:
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    raise TypeError(f"non-exact coefficient {c!r}")


class Poly:
    """Immutable dense polynomial in one variable (printed as ``p``)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_norm(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Number, ...] = tuple(cs)

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @classmethod
    def monomial(cls, degree: int, c=1) -> "Poly":
        return cls([0] * degree + [c])

    # -- basic properties ---------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> Number:
        return self.coeffs[-1] if self.coeffs else 0

    def valuation(self) -> int:
        """Lowest degree with a nonzero coefficient (-1 for the zero polynomial)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return -1

    def __getitem__(self, i: int) -> Number:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction)):
                other = Poly([other])
            else:
                return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs)

    # -- arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly([c * other for c in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = Poly([1]), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = [Fraction(c) for c in self.coeffs]
        dq = other.degree
        lead = Fraction(other.lc)
        quo = [Fraction(0)] * max(0, len(rem) - dq)
        for k in range(len(rem) - dq - 1, -1, -1):
            c = rem[k + dq] / lead
            quo[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return Poly(quo), Poly(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError("polynomial does not divide exactly")
        return q

    def divides(self, other: "Poly") -> bool:
        """True if self divides other."""
        return not (other % self)

    # -- calculus / evaluation ----------------------------------------------
    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self, k: int = 1) -> "Poly":
        cs = list(self.coeffs)
        for _ in range(k):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return Poly(cs)

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def shift(self, a) -> "Poly":
        """p(x + a)."""
        return self.compose(Poly([a, 1]))

    def reverse(self, degree: int | None = None) -> "Poly":
        """x^degree * p(1/x)."""
        d = self.degree if degree is None else degree
        cs = list(self.coeffs) + [0] * (d + 1 - len(self.coeffs))
        return Poly(cs[: d + 1][::-1])

    def mul_x(self, k: int) -> "Poly":
        """Multiply by x^k (k may be negative when the low coefficients vanish)."""
        if k >= 0:
            return Poly([0] * k + list(self.coeffs))
        if any(self.coeffs[:-k]):
            raise ArithmeticError("division by x^k is not exact")
        return Poly(self.coeffs[-k:])

    # -- normalisation ------------------------------------------------------
    def content(self) -> Fraction:
        """Positive rational c with self/c primitive in Z[x] (0 for zero)."""
        if not self.coeffs:
            return Fraction(0)
        fr = [Fraction(c) for c in self.coeffs]
        num = reduce(math.gcd, (f.numerator for f in fr))
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr))
        return Fraction(num, den)

    def primitive(self) -> "Poly":
        """Integer polynomial with content 1 and positive leading coefficient."""
        if not self.coeffs:
            return self
        c = self.content()
        if self.lc < 0:
            c = -c
        return Poly(Fraction(x) / c for x in self.coeffs)

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        lead = Fraction(self.lc)
        return Poly(Fraction(c) / lead for c in self.coeffs)

    # -- display ------------------------------------------------------------
    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if i == 0:
                body = str(mag)
            else:
                mono = "p" if i == 1 else f"p^{i}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "Poly":
        return cls(Fraction(s) for s in items)


P = Poly.x()


def linear(a, b) -> Poly:
    """a + b*p."""
    return Poly([a, b])


def poly_prod(factors: Iterable[Poly]) -> Poly:
    return reduce(lambda a, b: a * b, factors, Poly([1]))


def _prem_primitive(a: Poly, b: Poly) -> Poly:
    """Primitive part of the pseudo-remainder of integer polynomials."""
    a = Poly(a.coeffs)
    if a.degree < b.degree:
        return a
    lb = b.lc
    rem = list(a.coeffs)
    db = b.degree
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k]
        rem = [x * lb for x in rem]
        if c:
            for j, y in enumerate(b.coeffs):
                rem[k - db + j] -= c * y
        rem.pop()
    r = Poly(rem)
    return r.primitive() if r else r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over the rationals (zero if both inputs are zero)."""
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    a, b = a.primitive(), b.primitive()
    if a.degree < b.degree:
        a, b = b, a
    while b:
        a, b = b, _prem_primitive(a, b)
    return a.monic()


def squarefree_decomposition(f: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: primitive squarefree factors with multiplicities.

    The product of ``g**k`` over the result equals ``f.primitive()`` up to
    its sign; the sign is absorbed into the first factor.
    """
    if f.is_zero():
        raise ValueError("zero polynomial has no squarefree decomposition")
    f = f.primitive()
    if f.degree == 0:
        return []
    out = []
    fp = f.derivative()
    a0 = poly_gcd(f, fp)
    b = f // a0
    c = fp // a0
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        if a.degree > 0:
            out.append((a.primitive(), k))
        b = b // a
        c = d // a
        d = c - b.derivative()
        k += 1
    return _fix_sign(f, out)


def _fix_sign(f: Poly, factors: list[tuple[Poly, int]]) -> list[tuple[Poly, int]]:
    rebuilt = poly_prod(g**k for g, k in factors)
    ratio = f.lc / Fraction(rebuilt.lc)
    if ratio != 1 and factors:
        g, k = factors[0]
        if ratio == -1 and k % 2 == 1:
            factors[0] = (-g, k)
        elif ratio != 1:
            raise ArithmeticError("squarefree decomposition lost a scalar")
    return factors


def squarefree_part(f: Poly) -> Poly:
    return poly_prod(g for g, _ in squarefree_decomposition(f))


def multiplicity(factor: Poly, f: Poly) -> int:
    """Largest k such that factor**k divides f (f nonzero)."""
    if f.is_zero():
        raise ValueError("multiplicity in the zero polynomial is unbounded")
    if factor.degree < 1:
        raise ValueError("factor must have positive degree")
    k = 0
    q, r = divmod(f, factor)
    while not r:
        k += 1
        f = q
        q, r = divmod(f, factor)
    return k


def rational_roots(f: Poly) -> list[tuple[Fraction, int]]:
    """Exact rational roots of f with multiplicities, sorted ascending."""
    from .polymod import integer_rational_roots

    if f.is_zero():
        raise ValueError("the zero polynomial has every number as a root")
    out = []
    for g, k in squarefree_decomposition(f):
        for root in integer_rational_roots(g):
            out.append((root, k))
    return sorted(out)
