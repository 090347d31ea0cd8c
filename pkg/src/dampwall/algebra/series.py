"""Truncated power series in p with exact-rational or prime-field coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .modular import inv_mod, rational_mod
from .poly import Poly


@dataclass(frozen=True)
class RatSeries:
    """Coefficients c_0..c_N of a power series known through p^N."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Sequence):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def truncate(self, order: int) -> "RatSeries":
        return RatSeries(self.coeffs[: order + 1])

    def __add__(self, other: "RatSeries") -> "RatSeries":
        n = min(len(self), len(other))
        return RatSeries(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))

    def __sub__(self, other: "RatSeries") -> "RatSeries":
        n = min(len(self), len(other))
        return RatSeries(a - b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))

    def scale(self, c) -> "RatSeries":
        c = Fraction(c)
        return RatSeries(c * a for a in self.coeffs)

    def __mul__(self, other) -> "RatSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Poly):
            other = RatSeries(list(other.coeffs[: len(self)]) + [0] * max(0, len(self) - len(other)))
        n = min(len(self), len(other))
        a, b = self.coeffs, other.coeffs
        return RatSeries(sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n))

    __rmul__ = __mul__

    def derivative(self) -> "RatSeries":
        return RatSeries(i * c for i, c in enumerate(self.coeffs) if i)

    def reciprocal(self) -> "RatSeries":
        a = self.coeffs
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, len(a)):
            out.append(-inv0 * sum(a[i] * out[k - i] for i in range(1, k + 1)))
        return RatSeries(out)

    def __truediv__(self, other: "RatSeries") -> "RatSeries":
        return self * other.reciprocal()

    def log_derivative(self) -> "RatSeries":
        """Series of s'/s, valid through order N-1."""
        return self.derivative() * self.truncate(self.order - 1).reciprocal()

    def sqrt(self) -> "RatSeries":
        """Square root normalised to constant term 1 (requires c_0 == 1)."""
        a = self.coeffs
        if a[0] != 1:
            raise ValueError("sqrt needs constant term 1 to stay rational")
        out = [Fraction(1)]
        for k in range(1, len(a)):
            s = sum(out[i] * out[k - i] for i in range(1, k))
            out.append((a[k] - s) / 2)
        return RatSeries(out)

    def shift(self, k: int) -> "RatSeries":
        """Multiply by p^k (k >= 0), keeping the same truncation order."""
        return RatSeries(([Fraction(0)] * k + list(self.coeffs))[: len(self)])

    def floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def to_mod(self, prime: int) -> "ModSeries":
        return ModSeries([rational_mod(c, prime) for c in self.coeffs], prime)

    @classmethod
    def from_poly(cls, poly: Poly, order: int) -> "RatSeries":
        return cls([poly[i] for i in range(order + 1)])

    @classmethod
    def from_rational(cls, num: Poly, den: Poly, order: int) -> "RatSeries":
        """Taylor expansion of num/den at p = 0 through p^order."""
        return cls.from_poly(num, order) * cls.from_poly(den, order).reciprocal()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)


@dataclass(frozen=True)
class ModSeries:
    """Series coefficients reduced modulo an odd prime."""

    coeffs: tuple[int, ...]
    prime: int

    def __init__(self, coeffs: Sequence[int], prime: int):
        object.__setattr__(self, "coeffs", tuple(int(c) % prime for c in coeffs))
        object.__setattr__(self, "prime", int(prime))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def truncate(self, order: int) -> "ModSeries":
        return ModSeries(self.coeffs[: order + 1], self.prime)

    def __sub__(self, other: "ModSeries") -> "ModSeries":
        if other.prime != self.prime:
            raise ValueError("different primes")
        n = min(len(self), len(other))
        return ModSeries([a - b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], self.prime)

    def scale(self, c: int) -> "ModSeries":
        return ModSeries([c * a for a in self.coeffs], self.prime)

    def shift(self, k: int) -> "ModSeries":
        return ModSeries(([0] * k + list(self.coeffs))[: len(self)], self.prime)

    def reciprocal(self) -> "ModSeries":
        q = self.prime
        a = self.coeffs
        inv0 = inv_mod(a[0], q)
        out = [inv0]
        for k in range(1, len(a)):
            out.append(-inv0 * sum(a[i] * out[k - i] for i in range(1, k + 1)) % q)
        return ModSeries(out, q)
