"""Prime-field helpers: primality, prime sequences, kernels, CRT and rational reconstruction."""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

#: Default start of the prime sequence (the sequence walks downward from here).
DEFAULT_PRIME_START = 2**31 - 1

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NotPrimeError(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_below(start: int, count: int) -> list[int]:
    """The ``count`` largest odd primes that are <= ``start``."""
    out = []
    n = start if start % 2 else start - 1
    while len(out) < count and n > 2:
        if is_prime(n):
            out.append(n)
        n -= 2
    if len(out) < count:
        raise ValueError(f"only {len(out)} odd primes below {start}")
    return out


def prime_sequence(count: int, skip: int = 0) -> list[int]:
    """Word-size primes used by the guessing pipeline.

    The start of the sequence can be moved with the ``DCP_PRIME_SEED``
    environment variable; it must stay below 2**31 so that products of two
    residues fit in a signed 64-bit integer.
    """
    start = int(os.environ.get("DCP_PRIME_SEED", DEFAULT_PRIME_START))
    if start >= 2**31:
        raise ValueError("DCP_PRIME_SEED must be below 2**31")
    return primes_below(start, count + skip)[skip:]


def inv_mod(a: int, m: int) -> int:
    return pow(a % m, -1, m)


def rational_mod(x: Fraction | int, q: int) -> int:
    """Image of an exact rational in Z/qZ; raises ZeroDivisionError if the denominator vanishes."""
    x = Fraction(x)
    if x.denominator % q == 0:
        raise ZeroDivisionError(f"denominator {x.denominator} not invertible mod {q}")
    return x.numerator * inv_mod(x.denominator, q) % q


def _check_prime(q: int) -> None:
    if not is_prime(q):
        raise NotPrimeError(f"{q} is not prime")


def rref_mod(matrix, prime: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(prime).

    Returns the reduced matrix (rank rows kept) and the pivot columns.
    Requires prime < 2**31 so that row updates stay inside int64.
    """
    _check_prime(prime)
    if prime >= 2**31:
        raise ValueError("prime must be below 2**31")
    a = np.array(matrix, dtype=np.int64) % prime
    if a.ndim != 2 or 0 in a.shape:
        raise ValueError("matrix must be two-dimensional and non-empty")
    nrows, ncols = a.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nz = np.flatnonzero(a[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            a[[row, piv]] = a[[piv, row]]
        a[row] = a[row] * inv_mod(int(a[row, col]), prime) % prime
        factors = a[:, col].copy()
        factors[row] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            a[hit] = (a[hit] - (factors[hit, None] * a[row]) % prime) % prime
        pivots.append(col)
        row += 1
    return a[:row], pivots


def nullspace_mod(matrix, prime: int) -> list[list[int]]:
    """Kernel basis of ``matrix`` over GF(prime).

    One vector per free column, with that free entry equal to 1 and the
    other free entries 0, so the basis is in reduced echelon form with
    respect to the free columns. Empty iff the matrix has full column rank.
    """
    reduced, pivots = rref_mod(matrix, prime)
    ncols = reduced.shape[1]
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [0] * ncols
        v[free] = 1
        for i, pc in enumerate(pivots):
            v[pc] = int(-reduced[i, free] % prime)
        basis.append(v)
    return basis


def crt_combine(residues: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Combine ``(value, prime)`` pairs into ``(value, product)``."""
    value, modulus = 0, 1
    seen = set()
    for v, q in residues:
        if q in seen:
            raise ValueError(f"duplicate modulus {q}")
        seen.add(q)
        v %= q
        # Garner step: value + modulus * t with t solving the new congruence
        t = (v - value) * inv_mod(modulus, q) % q
        value += modulus * t
        modulus *= q
    return value % modulus, modulus


def crt_vector(images: Sequence[Sequence[int]], primes: Sequence[int]) -> tuple[list[int], int]:
    """Componentwise CRT of equally long residue vectors."""
    if len(images) != len(primes):
        raise ValueError("one image per prime required")
    if len(set(primes)) != len(primes):
        raise ValueError("duplicate primes")
    n = len(images[0])
    modulus = math.prod(primes)
    out = [crt_combine((img[i], q) for img, q in zip(images, primes))[0] for i in range(n)]
    return out, modulus


def rational_reconstruct(residue: int, modulus: int, bound: int | None = None) -> Fraction | None:
    """Wang's rational reconstruction.

    Finds n/d with |n| <= bound, 0 < d <= bound, d*residue = n (mod modulus)
    and gcd(n, d) = 1, where bound defaults to floor(sqrt(modulus/2)).
    Returns None when no such fraction exists.
    """
    if not 0 <= residue < modulus:
        raise ValueError("residue must lie in [0, modulus)")
    if bound is None:
        bound = math.isqrt(modulus // 2)
    r0, r1 = modulus, residue
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if math.gcd(r1, abs(s1)) != 1:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return Fraction(r1, s1)


def symmetric_residue(value: int, modulus: int) -> int:
    value %= modulus
    return value - modulus if value > modulus // 2 else value
