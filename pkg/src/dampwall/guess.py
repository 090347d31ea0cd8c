"""Guessing recurrences and differential equations from series coefficients.

All linear algebra happens over prime fields; exact operators are recovered
by Chinese remaindering and rational reconstruction, then checked on data
that took no part in the fit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra.modular import (
    crt_vector,
    prime_sequence,
    rational_reconstruct,
    rref_mod,
)
from .algebra.poly import Poly
from .algebra.series import ModSeries, RatSeries
from .operators import DiffOperator, PRecurrence, apply_operator, theta_to_operator

log = logging.getLogger(__name__)

DEFAULT_HOLDOUT = 10
DEFAULT_DEGREES = tuple(range(4, 41, 4))


class InsufficientTermsError(ValueError):
    """Raised when a fit would be under-determined."""

    def __init__(self, required: int, available: int, what: str = "series"):
        super().__init__(f"{what} needs at least {required} terms, only {available} available")
        self.required = required
        self.available = available


# ---------------------------------------------------------------------------
# linear systems
# ---------------------------------------------------------------------------


def _kernel(rows: np.ndarray, prime: int) -> list[list[int]]:
    reduced, pivots = rref_mod(rows, prime)
    ncols = rows.shape[1]
    basis = []
    pivot_set = set(pivots)
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [0] * ncols
        v[free] = 1
        for i, pc in enumerate(pivots):
            v[pc] = int(-reduced[i, free] % prime)
        basis.append(v)
    return basis


def ode_unknowns(order: int, degree: int, rhs_degree: int | None = None) -> int:
    return (order + 1) * (degree + 1) + (0 if rhs_degree is None else rhs_degree + 1)


def ode_terms_required(order: int, degree: int, rhs_degree: int | None = None,
                       holdout: int = DEFAULT_HOLDOUT) -> int:
    """Series length for a square fit plus the held-out equations."""
    return ode_unknowns(order, degree, rhs_degree) + holdout


def recurrence_terms_required(order: int, degree: int, holdout: int = DEFAULT_HOLDOUT) -> int:
    return (order + 1) * (degree + 1) + order + holdout


def ode_matrix(a: Sequence[int], prime: int, order: int, degree: int,
               rhs_degree: int | None = None) -> np.ndarray:
    """Rows n = 0..len(a)-1 of [p^n](sum_j R_j(p) theta^j S - f) in the unknowns.

    theta = p d/dp. Columns: r_{j,i} (coefficient of p^i theta^j) in j-major
    order, then f_0..f_e. The row at p^n only involves a_0..a_n.
    """
    L = len(a)
    ncols = ode_unknowns(order, degree, rhs_degree)
    out = np.zeros((L, ncols), dtype=np.int64)
    base = np.array([x % prime for x in a], dtype=np.int64)
    nn = np.arange(L, dtype=np.int64)
    col = base.copy()  # m^j a_m
    for j in range(order + 1):
        for i in range(min(degree + 1, L)):
            out[i:, j * (degree + 1) + i] = col[: L - i]
        col = col * nn % prime
    if rhs_degree is not None:
        off = (order + 1) * (degree + 1)
        for t in range(min(rhs_degree + 1, L)):
            out[t, off + t] = prime - 1
    return out


def recurrence_matrix(a: Sequence[int], prime: int, order: int, degree: int) -> np.ndarray:
    """Rows n = order..len(a)-1 of sum_{j,i} c_{j,i} n^i a_{n-j}."""
    L = len(a)
    ns = range(order, L)
    out = np.zeros((L - order, (order + 1) * (degree + 1)), dtype=np.int64)
    for r, n in enumerate(ns):
        for j in range(order + 1):
            base = a[n - j] % prime
            pw = 1
            for i in range(degree + 1):
                out[r, j * (degree + 1) + i] = base * pw % prime
                pw = pw * n % prime
    return out


def _normalize(vec: list[int], head: range, prime: int) -> list[int] | None:
    """Scale so the first nonzero entry inside ``head`` is 1."""
    for idx in head:
        if vec[idx] % prime:
            inv = pow(vec[idx], -1, prime)
            return [v * inv % prime for v in vec]
    return None


# ---------------------------------------------------------------------------
# single-prime fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModFit:
    """A normalised kernel vector for a fixed (order, degree) over one prime."""

    prime: int
    order: int
    degree: int
    rhs_degree: int | None
    vector: tuple[int, ...]

    @property
    def support(self) -> tuple[bool, ...]:
        return tuple(bool(v) for v in self.vector)


def _ode_kernel(series: ModSeries, order: int, degree: int, rhs_degree: int | None,
                holdout: int) -> tuple[int, list[int] | None]:
    """(kernel dimension, normalised vector if the dimension is 1 and holdout passes)."""
    q = series.prime
    need = ode_terms_required(order, degree, rhs_degree, holdout)
    if len(series) < need:
        raise InsufficientTermsError(need, len(series))
    m = ode_matrix(series.coeffs, q, order, degree, rhs_degree)
    fit, hold = m[: len(m) - holdout], m[len(m) - holdout:]
    basis = _kernel(fit, q)
    if len(basis) != 1:
        return len(basis), None
    head = range(order * (degree + 1), (order + 1) * (degree + 1))
    v = _normalize(basis[0], head, q)
    if v is None:
        return 1, None
    if np.any(hold.astype(object).dot(np.array(v, dtype=object)) % q):
        log.info("holdout failed at order %d degree %d mod %d", order, degree, q)
        return 0, None
    return 1, v


def guess_ode_mod(series: ModSeries, order: int, degree: int, rhs_degree: int | None = None,
                  holdout: int = DEFAULT_HOLDOUT) -> ModFit | None:
    """Operator of exactly this shape annihilating the series mod its prime.

    None if the kernel is empty, has dimension above one, or the held-out
    equations are violated.
    """
    dim, v = _ode_kernel(series, order, degree, rhs_degree, holdout)
    if v is None:
        return None
    return ModFit(series.prime, order, degree, rhs_degree, tuple(v))


def _ode_kernel_dim(series: ModSeries, order: int, degree: int, rhs_degree: int | None,
                    holdout: int) -> int:
    q = series.prime
    m = ode_matrix(series.coeffs, q, order, degree, rhs_degree)
    need = ode_terms_required(order, degree, rhs_degree, holdout)
    if len(series) < need:
        raise InsufficientTermsError(need, len(series))
    _, pivots = rref_mod(m[: len(m) - holdout], q)
    return m.shape[1] - len(pivots)


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------


def _reconstruct_vector(images: Sequence[Sequence[int]], primes: Sequence[int]) -> list[Fraction] | None:
    values, modulus = crt_vector(images, primes)
    out = []
    den = 1
    for v in values:
        f = rational_reconstruct(v * den % modulus, modulus)
        if f is None:
            return None
        out.append(f / den)
        den *= f.denominator
    return out


def _majority(fits: Sequence[ModFit]) -> tuple[list[ModFit], list[int]]:
    counts: dict = {}
    for f in fits:
        counts.setdefault(f.support, []).append(f)
    best = max(counts.values(), key=len)
    bad = [f.prime for f in fits if f.support != best[0].support]
    return best, bad


def _operator_from_vector(vec: Sequence, order: int, degree: int,
                          rhs_degree: int | None) -> DiffOperator:
    w = degree + 1
    theta = [Poly(vec[j * w:(j + 1) * w]) for j in range(order + 1)]
    rhs = Poly(vec[(order + 1) * w:]) if rhs_degree is not None else None
    return theta_to_operator(theta, rhs)


def reconstruct_ode(fits: Sequence[ModFit]) -> tuple[DiffOperator | None, list[int]]:
    """Exact operator from per-prime fits, plus the primes rejected as unlucky."""
    if not fits:
        raise ValueError("no fits to reconstruct from")
    shape = {(f.order, f.degree, f.rhs_degree) for f in fits}
    if len(shape) != 1:
        raise ValueError("fits of different shapes")
    good, bad = _majority(fits)
    vec = _reconstruct_vector([f.vector for f in good], [f.prime for f in good])
    if vec is None:
        return None, bad
    f0 = good[0]
    op = _operator_from_vector(vec, f0.order, f0.degree, f0.rhs_degree)
    return op.normalized(), bad


def _vanishes_mod(op: DiffOperator, series: ModSeries) -> bool:
    try:
        res = apply_operator(op, series)
    except ZeroDivisionError:
        return False
    return not any(res.coeffs)


# ---------------------------------------------------------------------------
# searches
# ---------------------------------------------------------------------------


SeriesSource = Callable[[Sequence[int], int], list[ModSeries]]


def physical_source(seed, r) -> SeriesSource:
    """Cached S_{m,y}(p, r p) mod primes, regenerated with headroom when too short."""
    from .percolation import specialize_mod_many

    cache: dict[int, ModSeries] = {}

    def get(primes: Sequence[int], length: int) -> list[ModSeries]:
        missing = [q for q in primes if q not in cache or len(cache[q]) < length]
        if missing:
            order = max(length, max((len(cache[q]) for q in missing if q in cache), default=0) * 5 // 4)
            log.info("generating %d terms mod %d prime(s)", order, len(missing))
            for q, s in zip(missing, specialize_mod_many(seed, r, order - 1, missing)):
                cache[q] = s
        return [cache[q].truncate(length - 1) for q in primes]

    return get


def fixed_source(series: Sequence[ModSeries]) -> SeriesSource:
    by_prime = {s.prime: s for s in series}

    def get(primes: Sequence[int], length: int) -> list[ModSeries]:
        out = []
        for q in primes:
            s = by_prime.get(q)
            if s is None:
                raise KeyError(f"no series modulo {q}")
            if len(s) < length:
                raise InsufficientTermsError(length, len(s))
            out.append(s.truncate(length - 1))
        return out

    return get


@dataclass
class GuessReport:
    status: str
    order: int | None = None
    degree: int | None = None
    rhs_degree: int | None = None
    terms_used: int = 0
    holdout: int = DEFAULT_HOLDOUT
    primes: list[int] = field(default_factory=list)
    unlucky: list[int] = field(default_factory=list)
    grid: list[tuple[int, int, int]] = field(default_factory=list)
    verified_order: int | None = None
    search_terms: int = 0

    @property
    def unknowns(self) -> int | None:
        if self.order is None:
            return None
        return ode_unknowns(self.order, self.degree, self.rhs_degree)


def _dims(source: SeriesSource, primes: list[int], order: int, degree: int,
          rhs_degree: int | None, holdout: int, report: GuessReport,
          spare: Iterable[int]) -> int:
    """Kernel dimension agreed by all primes; disagreeing primes are swapped out."""
    need = ode_terms_required(order, degree, rhs_degree, holdout)
    while True:
        series = source(primes, need)
        dims = [_ode_kernel_dim(s, order, degree, rhs_degree, holdout) for s in series]
        report.search_terms = max(report.search_terms, need)
        if len(set(dims)) == 1:
            report.grid.append((order, degree, dims[0]))
            return dims[0]
        # an unlucky prime has a larger kernel than the others
        low = min(dims)
        for i, (q, d) in enumerate(zip(primes, dims)):
            if d != low:
                report.unlucky.append(q)
                primes[i] = next(spare)


def minimal_ode_search(source: SeriesSource, *, max_order: int = 6,
                       degrees: Sequence[int] = DEFAULT_DEGREES, rhs_degree: int | None = None,
                       nprimes: int = 2, holdout: int = DEFAULT_HOLDOUT,
                       primes: Sequence[int] | None = None) -> GuessReport:
    """Smallest order, then smallest degree, admitting a unique operator.

    Scans the coarse degree list for each order and refines downward once a
    kernel appears.
    """
    pool = iter(prime_sequence(200) if primes is None else primes)
    active = [next(pool) for _ in range(nprimes)]
    report = GuessReport(status="NONE", rhs_degree=rhs_degree, holdout=holdout)
    for k in range(1, max_order + 1):
        prev = -1
        for d in degrees:
            dim = _dims(source, active, k, d, rhs_degree, holdout, report, pool)
            if dim == 0:
                prev = d
                continue
            lo = d
            for dd in range(d - 1, prev, -1):
                if _dims(source, active, k, dd, rhs_degree, holdout, report, pool) == 0:
                    break
                lo = dd
            report.order, report.degree = k, lo
            report.primes = list(active)
            report.terms_used = ode_terms_required(k, lo, rhs_degree, holdout)
            final = report.grid[-1][2] if report.grid[-1][:2] == (k, lo) else None
            for kk, ddd, dm in report.grid:
                if (kk, ddd) == (k, lo):
                    final = dm
            report.status = "FOUND" if final == 1 else "AMBIGUOUS"
            return report
    return report


def fit_ode(source: SeriesSource, order: int, degree: int, rhs_degree: int | None = None, *,
            max_primes: int = 12, holdout: int = DEFAULT_HOLDOUT,
            primes: Sequence[int] | None = None) -> tuple[DiffOperator | None, GuessReport]:
    """Reconstruct the exact operator of a known shape.

    Primes are added one at a time; a candidate is accepted when a further
    prime, not used for the reconstruction, reproduces it.
    """
    pool = list(prime_sequence(max_primes + 40) if primes is None else primes)
    need = ode_terms_required(order, degree, rhs_degree, holdout)
    report = GuessReport(status="NONE", order=order, degree=degree, rhs_degree=rhs_degree,
                         holdout=holdout, terms_used=need)
    fits: list[ModFit] = []
    candidate = None
    for q in pool:
        if len(fits) >= max_primes:
            break
        (s,) = source([q], need)
        fit = guess_ode_mod(s, order, degree, rhs_degree, holdout)
        if fit is None:
            report.unlucky.append(q)
            continue
        if candidate is not None:
            if _vanishes_mod(candidate, s):
                report.status = "FOUND"
                report.primes = [f.prime for f in fits]
                report.verified_order = s.order
                return candidate, report
        fits.append(fit)
        candidate, bad = reconstruct_ode(fits)
        if bad:
            report.unlucky.extend(bad)
            fits = [f for f in fits if f.prime not in bad]
    report.primes = [f.prime for f in fits]
    return None, report


def find_ode(source: SeriesSource, **kwargs) -> tuple[DiffOperator | None, GuessReport]:
    """Minimal search followed by reconstruction at the minimal shape."""
    search_keys = {"max_order", "degrees", "rhs_degree", "nprimes", "holdout"}
    report = minimal_ode_search(source, **{k: v for k, v in kwargs.items() if k in search_keys})
    if report.status != "FOUND":
        return None, report
    op, fit_report = fit_ode(source, report.order, report.degree, report.rhs_degree,
                             holdout=report.holdout,
                             max_primes=kwargs.get("max_primes", 12))
    fit_report.grid = report.grid
    fit_report.unlucky = report.unlucky + fit_report.unlucky
    fit_report.search_terms = report.search_terms
    return op, fit_report


# ---------------------------------------------------------------------------
# exact data
# ---------------------------------------------------------------------------


def _to_mod_series(series: RatSeries, count: int, skip_unlucky: bool = True) -> list[ModSeries]:
    out = []
    for q in prime_sequence(count + 20):
        try:
            out.append(series.to_mod(q))
        except ZeroDivisionError:
            continue
        if len(out) == count:
            break
    return out


def guess_ode_exact(series: RatSeries, order: int, degree: int, rhs_degree: int | None = None,
                    holdout: int = DEFAULT_HOLDOUT, max_primes: int = 12) -> DiffOperator | None:
    """Exact operator of the given shape for rational data, checked on every term."""
    mods = _to_mod_series(series, max_primes + 10)
    op, _ = fit_ode(fixed_source(mods), order, degree, rhs_degree, holdout=holdout,
                    max_primes=max_primes, primes=[s.prime for s in mods])
    if op is None:
        return None
    res = apply_operator(op, series)
    return op if all(c == 0 for c in res.coeffs) else None


@dataclass(frozen=True)
class ModRecurrence:
    """Recurrence coefficients over GF(prime), c_0's lowest coefficient scaled to 1."""

    prime: int
    order: int
    degree: int
    vector: tuple[int, ...]

    def coeffs(self) -> list[list[int]]:
        w = self.degree + 1
        return [list(self.vector[j * w:(j + 1) * w]) for j in range(self.order + 1)]


def _rec_fit(series: ModSeries, s: int, d: int, holdout: int) -> list[int] | None:
    q = series.prime
    m = recurrence_matrix(series.coeffs, q, s, d)
    basis = _kernel(m[: len(m) - holdout], q)
    if len(basis) != 1:
        return None
    v = _normalize(basis[0], range(d + 1), q)
    if v is None:
        return None
    if np.any(m[len(m) - holdout:].astype(object).dot(np.array(v, dtype=object)) % q):
        return None
    return v


def guess_precurrence_mod(series: ModSeries, max_order: int = 8, max_degree: int = 4,
                          holdout: int = DEFAULT_HOLDOUT) -> ModRecurrence | None:
    """Minimal (order, then degree) recurrence over the series' prime field."""
    need = (max_order + 1) * (max_degree + 2) + holdout
    if len(series) < need:
        raise InsufficientTermsError(need, len(series), "recurrence search")
    for s in range(1, max_order + 1):
        for d in range(max_degree + 1):
            v = _rec_fit(series, s, d, holdout)
            if v is not None:
                return ModRecurrence(series.prime, s, d, tuple(v))
    return None


def reconstruct_recurrence(fits: Sequence[ModRecurrence]) -> PRecurrence | None:
    if len({(f.order, f.degree) for f in fits}) != 1:
        raise ValueError("fits of different shapes")
    vec = _reconstruct_vector([f.vector for f in fits], [f.prime for f in fits])
    if vec is None:
        return None
    s, d = fits[0].order, fits[0].degree
    return PRecurrence([Poly(vec[j * (d + 1):(j + 1) * (d + 1)]) for j in range(s + 1)],
                       start=s).normalized()


def guess_precurrence(series, max_order: int = 6, max_degree: int = 3,
                      holdout: int = DEFAULT_HOLDOUT, max_primes: int = 8) -> PRecurrence | None:
    """Exact minimal recurrence for rational data.

    The shape is fixed by the first prime; further primes are added until
    the reconstruction holds on every supplied term.
    """
    a = [Fraction(x) for x in (series.coeffs if isinstance(series, RatSeries) else series)]
    mods = _to_mod_series(RatSeries(a), max_primes)
    first = guess_precurrence_mod(mods[0], max_order, max_degree, holdout)
    if first is None:
        return None
    fits = [first]
    for ms in mods[1:]:
        v = _rec_fit(ms, first.order, first.degree, holdout)
        if v is None:
            log.info("prime %d rejected for the recurrence fit", ms.prime)
            continue
        fits.append(ModRecurrence(ms.prime, first.order, first.degree, tuple(v)))
        rec = reconstruct_recurrence(fits)
        if rec is not None and not any(rec.residuals(a)):
            return rec
    return None
