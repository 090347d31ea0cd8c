"""Padé approximants by the extended Euclidean algorithm."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .poly import Poly
from .series import RatSeries


class DegeneratePade(ArithmeticError):
    """Raised when the Euclidean denominator vanishes at the origin."""


@dataclass(frozen=True)
class PadeApprox:
    numerator: Poly
    denominator: Poly
    L: int
    M: int

    def __call__(self, x):
        return self.numerator(x) / self.denominator(x)

    def expand(self, order: int) -> RatSeries:
        return RatSeries.from_rational(self.numerator, self.denominator, order)


def pade(series: RatSeries, L: int, M: int) -> PadeApprox:
    """[L/M] approximant matching ``series`` through order L+M."""
    if L < 0 or M < 0:
        raise ValueError("degrees must be non-negative")
    n = L + M
    if series.order < n:
        raise ValueError(f"series order {series.order} < L+M = {n}")
    r0 = Poly.monomial(n + 1)
    r1 = Poly(series.coeffs[: n + 1])
    t0, t1 = Poly(), Poly([1])
    while r1.degree > L:
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        t0, t1 = t1, t0 - q * t1
    if t1.degree > M:
        raise DegeneratePade(f"[{L}/{M}] denominator degree {t1.degree} exceeds {M}")
    c0 = t1[0]
    if c0 == 0:
        raise DegeneratePade(f"[{L}/{M}] denominator vanishes at p = 0")
    c0 = Fraction(c0)
    return PadeApprox(Poly(c / c0 for c in r1.coeffs), Poly(c / c0 for c in t1.coeffs), L, M)
