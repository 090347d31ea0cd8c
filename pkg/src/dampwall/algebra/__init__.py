"""Exact arithmetic substrate: polynomials, series, prime fields, Padé."""

from .modular import (
    crt_combine,
    crt_vector,
    inv_mod,
    is_prime,
    nullspace_mod,
    prime_sequence,
    rational_mod,
    rational_reconstruct,
    rref_mod,
)
from .pade import DegeneratePade, PadeApprox, pade
from .poly import Poly, multiplicity, poly_gcd, poly_prod, rational_roots, squarefree_decomposition
from .series import ModSeries, RatSeries

__all__ = [
    "DegeneratePade",
    "ModSeries",
    "PadeApprox",
    "Poly",
    "RatSeries",
    "crt_combine",
    "crt_vector",
    "inv_mod",
    "is_prime",
    "multiplicity",
    "nullspace_mod",
    "pade",
    "poly_gcd",
    "poly_prod",
    "prime_sequence",
    "rational_mod",
    "rational_reconstruct",
    "rational_roots",
    "rref_mod",
    "squarefree_decomposition",
]
