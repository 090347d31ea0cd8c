"""Low-density series for the mean cluster size near a damp wall.

The generator solves the mean-size recurrences order by order in p. Cluster
states are indexed by seed width ``m`` and midpoint height ``y`` (``y = m-1``
touches the wall, ``y = m`` is adjacent to it, ``y > m`` is in the bulk).
Within one order the only same-order couplings lower ``m`` (the ``q``-type
terms) plus, in the bivariate ring, the adjacent-to-on-wall step weighted by
``p_w``; sweeping ``m`` upward therefore turns the fixed point into a
triangular solve.

Three coefficient rings share one engine:

* bivariate: exact integers, trailing axis = power of ``p_w``;
* scaled: ``p = b t``, ``p_w = a t`` for ``r = a/b``, exact integers in ``t``;
* mod: ``p = t``, ``p_w = r t`` over several primes at once (trailing axis).
"""

from __future__ import annotations

import heapq
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra.modular import rational_mod
from .algebra.poly import Poly
from .algebra.series import ModSeries, RatSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Seed:
    """Seed of ``m`` contiguous sites whose midpoint sits ``y`` units above the wall."""

    m: int
    y: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"seed width must be >= 1, got {self.m}")
        if self.y < self.m - 1:
            raise ValueError(f"seed midpoint y={self.y} below the wall for width {self.m}")

    @property
    def kind(self) -> str:
        if self.y == self.m - 1:
            return "on-wall"
        if self.y == self.m:
            return "adjacent"
        return "bulk"


def _as_seed(seed) -> Seed:
    return seed if isinstance(seed, Seed) else Seed(*seed)


# ---------------------------------------------------------------------------
# recurrence data
# ---------------------------------------------------------------------------

# weights as {(i, j): c} meaning c * p^i * p_w^j, with q = 1-p, q_w = 1-p_w
_PQ = {(1, 0): 1, (2, 0): -1}
_P2 = {(2, 0): 1}
_Q2 = {(0, 0): 1, (1, 0): -2, (2, 0): 1}
_PQW = {(1, 0): 1, (1, 1): -1}
_PWQ = {(0, 1): 1, (1, 1): -1}
_PPW = {(1, 1): 1}
_QQW = {(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): 1}
_P = {(1, 0): 1}
_Q = {(0, 0): 1, (1, 0): -1}

# (class, dm, dy, weight): neighbour (m+dm, y+dy) of a state in the class
_TERMS = (
    ("bulk", 0, 1, _PQ),
    ("bulk", 0, -1, _PQ),
    ("bulk", 1, 0, _P2),
    ("bulk", -1, 0, _Q2),
    ("adjacent", 0, 1, _PQW),
    ("adjacent", 0, -1, _PWQ),
    ("adjacent", 1, 0, _PPW),
    ("adjacent", -1, 0, _QQW),
    ("on-wall", 0, 1, _P),
    ("on-wall", -1, 0, _Q),
)


def _edge_cost(weight) -> int:
    return min(i for i, _ in weight)


def _distances(seed: Seed, M: int, Y: int) -> np.ndarray:
    """Minimal p-degree needed to reach each state from the seed (inf if unreachable)."""
    dist = np.full((M + 2, Y + 2), np.inf)
    dist[seed.m, seed.y] = 0
    heap = [(0, seed.m, seed.y)]
    while heap:
        d, m, y = heapq.heappop(heap)
        if d > dist[m, y]:
            continue
        cls = "on-wall" if y == m - 1 else "adjacent" if y == m else "bulk"
        for c, dm, dy, w in _TERMS:
            if c != cls:
                continue
            m2, y2 = m + dm, y + dy
            if m2 < 1 or m2 > M or y2 > Y:
                continue
            nd = d + _edge_cost(w)
            if nd < dist[m2, y2]:
                dist[m2, y2] = nd
                heapq.heappush(heap, (nd, m2, y2))
    return dist


def width_cutoff(order: int, m: int) -> int:
    return m + -(-order // 2) + 1


def height_cutoff(order: int, m: int, y: int) -> int:
    return max(y, m) + order + 1


def _bulk_coefficients(m: int, order: int) -> list[int]:
    """Taylor coefficients of the bulk mean size m(1-p)^2/(1-2p)^2 + m(m-1)/(2(1-2p))."""
    a = [(n + 1) << n for n in range(order + 1)]  # 1/(1-2p)^2
    out = []
    for n in range(order + 1):
        sq = a[n] - 2 * (a[n - 1] if n >= 1 else 0) + (a[n - 2] if n >= 2 else 0)
        out.append(m * sq + (m * (m - 1) // 2) * (1 << n))
    return out


class _Ring:
    """Coefficient ring of the engine; see the module docstring."""

    def __init__(self, kind: str, K: int, alpha=None, beta=None, primes=None):
        self.kind = kind
        self.K = K
        self.alpha = alpha
        self.beta = beta
        self.primes = None if primes is None else np.asarray(primes, dtype=np.int64)
        self.dtype = np.int64 if kind == "mod" else object

    def zeros(self, shape):
        return np.zeros(tuple(shape) + (self.K,), dtype=self.dtype)

    def reduce(self, a):
        return a % self.primes if self.kind == "mod" else a

    def scale(self, i: int, j: int, c: int):
        """Multiplier for c * p^i * p_w^j as an array over the trailing axis."""
        if self.kind == "bivariate":
            return c
        if self.kind == "scaled":
            return c * self.beta**i * self.alpha**j
        q = self.primes
        return (c * np.array([pow(int(a), j, int(qq)) for a, qq in zip(self.alpha, q)], dtype=object)
                % q.astype(object)).astype(np.int64)

    def order_shift(self, i: int, j: int) -> int:
        return i if self.kind == "bivariate" else i + j

    def k_shift(self, i: int, j: int) -> int:
        return j if self.kind == "bivariate" else 0


def _shift_k(a, j: int):
    if j == 0:
        return a
    out = np.zeros_like(a)
    out[..., j:] = a[..., :-j]
    if np.any(a[..., -j:] != 0):
        raise OverflowError("p_w degree exceeded the allocated range")
    return out


def _run_engine(seed: Seed, order: int, ring: _Ring) -> np.ndarray:
    """Coefficient array C[n, k...] of the seed's mean size through p^order (t^order)."""
    N = order
    M = width_cutoff(N, seed.m)
    Y = height_cutoff(N, seed.m, seed.y)
    dist = _distances(seed, M, Y)

    mm, yy = np.meshgrid(np.arange(M + 2), np.arange(Y + 2), indexing="ij")
    inside = (mm >= 1) & (mm <= M) & (yy <= Y)
    classes = {
        "bulk": inside & (yy >= mm + 1),
        "adjacent": inside & (yy == mm),
        "on-wall": inside & (yy == mm - 1),
    }

    # group terms by (dm, dy, i, j); every term without a power of p (after
    # specialisation) belongs to the same-order chain in m
    fields: dict[tuple, np.ndarray] = defaultdict(lambda: np.zeros((M + 2, Y + 2), dtype=np.int64))
    for cls, dm, dy, w in _TERMS:
        for (i, j), c in w.items():
            if ring.order_shift(i, j) == 0:
                continue
            fields[(dm, dy, i, j)] += c * classes[cls]
    terms = []
    for (dm, dy, i, j), field in fields.items():
        mult = ring.scale(i, j, 1)
        if ring.kind == "mod":
            wf = (field[:, :, None] % ring.primes) * mult % ring.primes
        else:
            wf = field.astype(object)[:, :, None] * mult
        terms.append((dm, dy, ring.order_shift(i, j), ring.k_shift(i, j), wf))

    bulk_edge = {m: _bulk_coefficients(m, N) for m in range(1, M + 1)}
    C = ring.zeros((N + 1, M + 2, Y + 2))
    reach_m = [0] * (N + 1)
    reach_y = [0] * (N + 1)
    for n in range(N + 1):
        ok = dist <= N - n
        ms, ys = np.nonzero(ok)
        reach_m[n] = int(ms.max()) if ms.size else 0
        reach_y[n] = int(ys.max()) if ys.size else 0

    for n in range(N + 1):
        mh = min(M, reach_m[n] + 1)
        yh = min(Y, reach_y[n] + 1)
        known = ring.zeros((mh + 1, yh + 1))
        for dm, dy, sn, sk, wf in terms:
            src_n = n - sn
            if src_n < 0:
                continue
            src = C[src_n]
            lo_m, lo_y = 1, 0
            sl = src[lo_m + dm: mh + 1 + dm, max(0, lo_y + dy): yh + 1 + dy]
            block = ring.zeros((mh, yh + 1))
            if dy < 0:
                block[:, -dy:] = sl
            else:
                block[:, :] = sl
            block = _shift_k(block, sk)
            known[1:] = ring.reduce(known[1:] + ring.reduce(wf[1:mh + 1, : yh + 1] * block))
        if n == 0:
            for m in range(1, mh + 1):
                if ring.kind == "bivariate":
                    known[m, :, 0] += m
                else:
                    known[m] = ring.reduce(known[m] + m)
        row_prev = ring.zeros((yh + 1,))
        for m in range(1, mh + 1):
            row = known[m]
            row[m - 1:] = ring.reduce(row[m - 1:] + row_prev[m - 1:])
            if ring.kind == "bivariate" and m <= yh:
                # p_w q S_{m,m-1} and q q_w S_{m-1,m} both carry a bare p_w
                row[m] = row[m] + _shift_k(row[m - 1], 1) - _shift_k(row_prev[m], 1)
            row[: max(0, m - 1)] = 0
            C[n, m, : yh + 1] = row
            row_prev = row
        # bulk boundary data above the height horizon
        for m in range(1, M + 1):
            val = bulk_edge[m][n]
            if ring.kind == "bivariate":
                C[n, m, Y + 1, 0] = int(val)
            elif ring.kind == "scaled":
                C[n, m, Y + 1] = int(val * ring.beta**n)
            else:
                C[n, m, Y + 1] = [val % int(q) for q in ring.primes]
        if n % 50 == 0 and n:
            log.debug("series order %d/%d", n, N)
    return C[:, seed.m, seed.y]


# ---------------------------------------------------------------------------
# public series types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateSeries:
    """Exact coefficients c(n, k) of p^n p_w^k, complete for all n <= order."""

    coeffs: dict
    order: int

    def coefficient(self, n: int, k: int) -> int:
        if n > self.order:
            raise IndexError(f"p^{n} beyond truncation order {self.order}")
        return self.coeffs.get((n, k), 0)

    def terms(self) -> list[tuple[int, int, int]]:
        return sorted((n, k, c) for (n, k), c in self.coeffs.items())

    def row(self, n: int) -> Poly:
        """Coefficient of p^n as a polynomial in p_w."""
        return Poly([self.coefficient(n, k) for k in range(self.max_k(n) + 1)])

    def max_k(self, n: int) -> int:
        ks = [k for (nn, k) in self.coeffs if nn == n]
        return max(ks) if ks else -1

    def at_wall(self, pw) -> RatSeries:
        """Series in p with p_w set to a constant."""
        pw = Fraction(pw)
        out = [Fraction(0)] * (self.order + 1)
        for (n, k), c in self.coeffs.items():
            out[n] += c * pw**k
        return RatSeries(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.order, tuple(sorted(self.coeffs.items()))))


def _from_grid(grid, order: int) -> BivariateSeries:
    coeffs = {}
    for n in range(order + 1):
        for k, c in enumerate(grid[n]):
            if c:
                coeffs[(n, k)] = int(c)
    return BivariateSeries(coeffs, order)


def mean_size_series(seed, order: int) -> BivariateSeries:
    """Mean cluster size S_{m,y}(p, p_w) through p^order from the recurrences."""
    seed = _as_seed(seed)
    if order < 0:
        raise ValueError("order must be non-negative")
    M = width_cutoff(order, seed.m)
    ring = _Ring("bivariate", K=2 * order + M + 3)
    return _from_grid(_run_engine(seed, order, ring), order)


def specialize(series: BivariateSeries, r) -> RatSeries:
    """Substitute p_w = r p: coefficient of p^n is sum_k c(n-k, k) r^k."""
    r = Fraction(r)
    N = series.order
    out = [Fraction(0)] * (N + 1)
    for (n, k), c in series.coeffs.items():
        if n + k <= N:
            out[n + k] += c * r**k
    return RatSeries(out)


def _check_r(r: Fraction) -> None:
    if not 0 <= r <= 2:
        log.warning("r = %s lies outside the physical range [0, 2]", r)


def specialize_series(seed, r, order: int) -> RatSeries:
    """Exact S_{m,y}(p, r p) through p^order without forming the bivariate series."""
    seed = _as_seed(seed)
    r = Fraction(r)
    _check_r(r)
    a, b = r.numerator, r.denominator
    ring = _Ring("scaled", K=1, alpha=a, beta=b)
    col = _run_engine(seed, order, ring)[:, 0]
    return RatSeries(Fraction(int(c), b**n) for n, c in enumerate(col))


def specialize_mod_many(seed, r, order: int, primes: Sequence[int]) -> list[ModSeries]:
    """S_{m,y}(p, r p) modulo each prime, computed natively in the prime fields."""
    seed = _as_seed(seed)
    r = Fraction(r)
    primes = [int(q) for q in primes]
    for q in primes:
        if q >= 2**31:
            raise ValueError("primes must be below 2**31")
    alpha = []
    for q in primes:
        try:
            alpha.append(rational_mod(r, q))
        except ZeroDivisionError:
            raise ValueError(f"denominator of r = {r} vanishes modulo {q}") from None
    ring = _Ring("mod", K=len(primes), alpha=alpha, beta=1, primes=primes)
    grid = _run_engine(seed, order, ring)
    return [ModSeries(grid[:, i].tolist(), q) for i, q in enumerate(primes)]


def specialize_mod(seed, r, order: int, prime: int) -> ModSeries:
    return specialize_mod_many(seed, r, order, [prime])[0]


# ---------------------------------------------------------------------------
# independent oracle: forward enumeration of lattice columns
# ---------------------------------------------------------------------------


def _column(m: int, y: int) -> tuple[int, int]:
    """Lattice interval (lowest x, highest x) of a column; the wall is x = 1."""
    mid = y + 1
    return mid - (m - 1), mid + (m - 1)


def _growth_options(lo: int, hi: int):
    """Possible next columns of a compact cluster with their site events.

    Each option is (next column or None, events) where events lists
    ('p'|'q'|'pw'|'qw') for the edge sites that had one wet predecessor.
    """
    uppers = [(hi + 1, "p"), (hi - 1, "q")]
    if lo >= 3:
        lowers = [(lo - 1, "p"), (lo + 1, "q")]
    elif lo == 2:
        lowers = [(lo - 1, "pw"), (lo + 1, "qw")]
    else:
        lowers = [(lo + 1, None)]
    for nhi, up in uppers:
        for nlo, down in lowers:
            events = [up] + ([down] if down else [])
            yield ((nlo, nhi) if nlo <= nhi else None), events


def mean_size_enum(seed, order: int) -> BivariateSeries:
    """Mean size by forward enumeration of all cluster histories.

    Column distributions are carried as exact polynomials in (p, p_w)
    truncated at p^order; a state dies out once its polynomial vanishes
    below that order, which always happens because every cycle of the
    growth rules costs at least one power of p.
    """
    seed = _as_seed(seed)
    N = order
    K = 2 * N + seed.m + 4
    start = np.zeros((N + 1, K), dtype=object)
    start[0, 0] = 1
    frontier = {_column(seed.m, seed.y): start}
    total = np.zeros((N + 1, K), dtype=object)
    factors = {
        "p": lambda a: _mul_p(a),
        "q": lambda a: a - _mul_p(a),
        "pw": lambda a: _shift_k(a, 1),
        "qw": lambda a: a - _shift_k(a, 1),
    }
    while frontier:
        nxt: dict = {}
        for (lo, hi), poly in frontier.items():
            width = (hi - lo) // 2 + 1
            total += width * poly
            for col, events in _growth_options(lo, hi):
                if col is None:
                    continue
                w = poly
                for e in events:
                    w = factors[e](w)
                if not np.any(w != 0):
                    continue
                if col in nxt:
                    nxt[col] = nxt[col] + w
                else:
                    nxt[col] = w
        frontier = {c: a for c, a in nxt.items() if np.any(a != 0)}
    return _from_grid(total, N)


def _mul_p(a):
    out = np.zeros_like(a)
    out[1:] = a[:-1]
    return out


@dataclass(frozen=True)
class Monomial:
    """p^p q^q p_w^pw q_w^qw (exponents)."""

    p: int = 0
    q: int = 0
    pw: int = 0
    qw: int = 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.p + other.p, self.q + other.q, self.pw + other.pw, self.qw + other.qw)

    def __str__(self) -> str:
        parts = []
        for name, e in (("p", self.p), ("q", self.q), ("p_w", self.pw), ("q_w", self.qw)):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return "".join(parts) or "1"


_EVENT = {"p": Monomial(p=1), "q": Monomial(q=1), "pw": Monomial(pw=1), "qw": Monomial(qw=1)}


def history_weight(columns: Sequence) -> Monomial:
    """Probability of a cluster history given column by column.

    ``columns`` holds (m, y) pairs; a final ``None`` marks the empty column
    in which the cluster dies.
    """
    if not columns or columns[0] is None:
        raise ValueError("history must start with the seed column")
    weight = Monomial()
    cur = _column(*_as_seed(columns[0]).__dict__.values())
    for nxt in columns[1:]:
        if cur is None:
            raise ValueError("history continues after the cluster died")
        target = None if nxt is None else _column(*_as_seed(nxt).__dict__.values())
        for col, events in _growth_options(*cur):
            if col == target:
                for e in events:
                    weight = weight * _EVENT[e]
                break
        else:
            raise ValueError(f"column {nxt} cannot follow {cur}")
        cur = target
    return weight


# ---------------------------------------------------------------------------
# closed forms for bulk, wet and dry walls (low density only)
# ---------------------------------------------------------------------------

_ONE_M_2P = Poly([1, -2])
_ONE_M_P = Poly([1, -1])


def _bulk_rational(m: int) -> tuple[Poly, Poly]:
    # m(1-p)^2/(1-2p)^2 + m(m-1)/2/(1-2p)
    num = m * _ONE_M_P**2 + Fraction(m * (m - 1), 2) * _ONE_M_2P
    return num, _ONE_M_2P**2


def _wet_rational(m: int) -> tuple[Poly, Poly]:
    # 2S = [m - 2p(1-p)]/(1-2p)^2 + (2m^2 - m)/(1-2p)
    num = (Poly([m, -2, 2]) + (2 * m * m - m) * _ONE_M_2P) * Fraction(1, 2)
    return num, _ONE_M_2P**2


def _dry_rational(m: int, y: int) -> tuple[Poly, Poly]:
    if y < m:
        raise ValueError("the dry-wall formula needs the seed off the wall (y >= m)")
    e = y - m - 1
    bnum, _ = _bulk_rational(m)
    if e >= 0:
        corr = m * Poly.monomial(2 + e)
        den = _ONE_M_2P**2 * _ONE_M_P**e
        return bnum * _ONE_M_P**e - corr, den
    corr = m * Poly.monomial(2 + e) * _ONE_M_P ** (-e)
    return bnum - corr, _ONE_M_2P**2


def closed_form_rational(which: str, m: int, y: int | None = None) -> tuple[Poly, Poly]:
    """Numerator and denominator of a reference mean size (valid for p < 1/2)."""
    if which == "bulk":
        return _bulk_rational(m)
    if which == "wet":
        return _wet_rational(m)
    if which == "dry":
        if y is None:
            raise ValueError("dry wall needs the seed height y")
        return _dry_rational(m, y)
    raise ValueError(f"unknown closed form {which!r}")


def closed_form(which: str, m: int, y: int | None = None, p=None, order: int | None = None):
    """Evaluate a reference closed form exactly at ``p`` or expand it to ``order``."""
    num, den = closed_form_rational(which, m, y)
    if p is not None:
        p = Fraction(p)
        if p >= Fraction(1, 2):
            raise ValueError("closed forms are only implemented for the low-density branch p < 1/2")
        return num(p) / den(p)
    if order is None:
        raise ValueError("give either p or order")
    return RatSeries.from_rational(num, den, order)
