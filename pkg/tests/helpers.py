"""Session-wide caches for the expensive searches shared by several test files."""

from functools import lru_cache
from fractions import Fraction

from dampwall.factory import cr_search
from dampwall.guess import find_ode, physical_source
from dampwall.percolation import specialize_series


@lru_cache(maxsize=None)
def order4(r):
    """(operator, report) of the minimal ODE for S_{1,1}(p, r p)."""
    return find_ode(physical_source((1, 1), Fraction(r)))


@lru_cache(maxsize=None)
def exact_series(r, order):
    return specialize_series((1, 1), Fraction(r), order)


@lru_cache(maxsize=None)
def removal(r):
    return cr_search(Fraction(r))


@lru_cache(maxsize=None)
def factorization(r, order=160):
    """verify_factorization report for the reconstructed L4, as {check prefix: row}."""
    from dampwall.factory import verify_factorization

    op, _ = order4(r)
    rows = verify_factorization(r, order, op, c_r=removal(r).c_r, physical=exact_series(r, order))
    return rows
