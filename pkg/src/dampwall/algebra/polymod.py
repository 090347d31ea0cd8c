"""Polynomials over GF(q) as plain int lists (lowest degree first), root finding and lifting."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .modular import inv_mod, is_prime, primes_below, rational_reconstruct

_RNG_SEED = 20131


def trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def padd(a, b, q):
    n = max(len(a), len(b))
    return trim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % q for i in range(n)])


def psub(a, b, q):
    n = max(len(a), len(b))
    return trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % q for i in range(n)])


def pmul(a, b, q):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim([c % q for c in out])


def pdivmod(a, b, q):
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    a = list(a)
    db = len(b) - 1
    inv = inv_mod(b[-1], q)
    if len(a) - 1 < db:
        return [], trim(a)
    quo = [0] * (len(a) - db)
    for k in range(len(a) - db - 1, -1, -1):
        c = a[k + db] * inv % q
        quo[k] = c
        if c:
            for j, y in enumerate(b):
                a[k + j] = (a[k + j] - c * y) % q
    return trim(quo), trim(a[:db])


def pmod(a, b, q):
    return pdivmod(a, b, q)[1]


def pmonic(a, q):
    if not a:
        return a
    inv = inv_mod(a[-1], q)
    return [c * inv % q for c in a]


def pgcd(a, b, q):
    a, b = trim(list(a)), trim(list(b))
    while b:
        a, b = b, pmod(a, b, q)
    return pmonic(a, q)


def ppowmod(base, e, modulus, q):
    result = [1]
    base = pmod(base, modulus, q)
    while e:
        if e & 1:
            result = pmod(pmul(result, base, q), modulus, q)
        base = pmod(pmul(base, base, q), modulus, q)
        e >>= 1
    return result


def peval(a, x, q):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % q
    return acc


def pderiv(a, q):
    return trim([i * c % q for i, c in enumerate(a)][1:])


def roots_mod(f: Sequence[int], q: int, rng: random.Random | None = None) -> list[int]:
    """Distinct roots of f in GF(q), sorted (q odd prime, f nonzero)."""
    f = pmonic(trim([c % q for c in f]), q)
    if not f:
        raise ValueError("zero polynomial")
    if len(f) == 1:
        return []
    rng = rng or random.Random(_RNG_SEED)
    xq = ppowmod([0, 1], q, f, q)
    g = pgcd(f, psub(xq, [0, 1], q), q)
    out: list[int] = []
    _split_linear(g, q, rng, out)
    return sorted(out)


def _split_linear(g, q, rng, out):
    deg = len(g) - 1
    if deg <= 0:
        return
    if deg == 1:
        out.append((-g[0]) * inv_mod(g[1], q) % q)
        return
    if g[0] == 0:
        out.append(0)
        _split_linear(pdivmod(g, [0, 1], q)[0], q, rng, out)
        return
    while True:
        a = rng.randrange(q)
        h = ppowmod([a, 1], (q - 1) // 2, g, q)
        d = pgcd(g, psub(h, [1], q), q)
        if 0 < len(d) - 1 < deg:
            _split_linear(d, q, rng, out)
            _split_linear(pdivmod(g, d, q)[0], q, rng, out)
            return


def integer_rational_roots(f) -> list[Fraction]:
    """Rational roots of a squarefree polynomial with exact coefficients.

    Roots are found modulo a prime where f stays squarefree, lifted by
    Newton iteration and recovered by rational reconstruction; every
    candidate is verified by exact evaluation.
    """
    from .poly import Poly

    f = Poly(f.coeffs).primitive()
    out: list[Fraction] = []
    if f.degree < 1:
        return out
    v = f.valuation()
    if v > 0:
        out.append(Fraction(0))
        f = f.mul_x(-v)
    if f.degree < 1:
        return out
    coeffs = [int(c) for c in f.coeffs]
    bound = max(abs(coeffs[0]), abs(coeffs[-1]))
    need = 2 * bound * bound + 1
    for q in primes_below(2**31 - 1, 64):
        if coeffs[-1] % q == 0:
            continue
        fq = [c % q for c in coeffs]
        if len(pgcd(fq, pderiv(fq, q), q)) > 1:
            continue
        break
    else:  # pragma: no cover - would need 64 unlucky primes
        raise ArithmeticError("no suitable prime for root lifting")
    for r in roots_mod(fq, q):
        root, modulus = r, q
        fprime = f.derivative()
        while modulus < need:
            modulus = modulus * modulus
            num = f(root) % modulus
            den = int(fprime(root)) % modulus
            root = (root - num * pow(den, -1, modulus)) % modulus
        cand = rational_reconstruct(root, modulus)
        if cand is not None and f(cand) == 0:
            out.append(cand)
    return sorted(set(out))


def odd_prime_check(q: int) -> None:
    if q < 3 or not is_prime(q):
        raise ValueError(f"{q} is not an odd prime")
