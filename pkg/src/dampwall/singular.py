"""Singular points, indicial exponents and Padé analysis of the mean size."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .algebra.modular import DEFAULT_PRIME_START, rational_mod, rref_mod
from .algebra.poly import P, Poly, rational_roots
from .algebra.series import RatSeries
from .operators import DiffOperator, theta_form

log = logging.getLogger(__name__)

_DPS = 50


def _mp(c) -> mpmath.mpf:
    c = Fraction(c)
    return mpmath.mpf(c.numerator) / c.denominator


def _mp_eval(poly: Poly, x):
    acc = mpmath.mpf(0)
    for c in reversed(poly.coeffs):
        acc = acc * x + _mp(c)
    return acc


def _poly_roots(poly: Poly) -> list:
    """Numeric roots at the working precision."""
    cs = [_mp(c) for c in reversed(poly.coeffs)]
    if len(cs) == 2:
        return [-cs[1] / cs[0]]
    return list(mpmath.polyroots(cs, maxsteps=200, extraprec=2 * _DPS))


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    """A finite point given exactly or by an irreducible minimal polynomial, or infinity."""

    label: str
    value: Fraction | None = None
    minpoly: Poly | None = None
    approx: complex | None = None
    multiplicity: int = 1

    @property
    def is_infinity(self) -> bool:
        return self.value is None and self.minpoly is None

    @property
    def is_rational(self) -> bool:
        return self.value is not None

    def numeric(self):
        if self.is_rational:
            return _mp(self.value)
        return mpmath.mpc(self.approx)

    @classmethod
    def infinity(cls) -> "SingularPoint":
        return cls("infinity")

    @classmethod
    def rational(cls, x, label: str | None = None, multiplicity: int = 1) -> "SingularPoint":
        x = Fraction(x)
        return cls(label or str(x), value=x, approx=complex(x), multiplicity=multiplicity)

    def __str__(self) -> str:
        if self.is_infinity:
            return "infinity"
        if self.is_rational:
            return str(self.value)
        z = complex(self.approx)
        return f"{self.label} ~ {z.real:.9g}{z.imag:+.9g}i" if abs(z.imag) > 1e-12 else f"{self.label} ~ {z.real:.9g}"


def irreducible_factors(f: Poly) -> list[tuple[Poly, int]]:
    """Factorisation over Q for the small degrees met here (up to degree 5).

    Linear factors come from exact rational roots; a remaining quartic is
    split into quadratics when some pair of its numeric roots gives a
    rational quadratic that divides exactly.
    """
    out: list[tuple[Poly, int]] = []
    g = f
    for root, mult in rational_roots(f):
        lin = Poly([-root.numerator, root.denominator])
        out.append((lin, mult))
        for _ in range(mult):
            g = g.exact_div(lin)
    if g.degree <= 0:
        return out
    if g.degree > 5:
        raise NotImplementedError("factorisation only implemented up to degree 5")
    rest = [g]
    if g.degree == 4:
        with mpmath.workdps(_DPS):
            roots = _poly_roots(g)
        for a, b in itertools.combinations(roots, 2):
            s, t = a + b, a * b
            if abs(mpmath.im(s)) > 1e-20 or abs(mpmath.im(t)) > 1e-20:
                continue
            s = Fraction(str(mpmath.nstr(mpmath.re(s), 40))).limit_denominator(10**12)
            t = Fraction(str(mpmath.nstr(mpmath.re(t), 40))).limit_denominator(10**12)
            quad = Poly([t, -s, 1]).primitive()
            if quad.divides(g):
                rest = [quad, g.exact_div(quad).primitive()]
                break
    for h in rest:
        h = h.primitive()
        for i, (q, m) in enumerate(out):
            if q == h:
                out[i] = (q, m + 1)
                break
        else:
            out.append((h, 1))
    return out


def points_of(poly: Poly, label: str) -> list[SingularPoint]:
    """All roots of ``poly`` as singular points, grouped by irreducible factor."""
    pts = []
    for g, mult in irreducible_factors(poly):
        if g.degree == 1:
            pts.append(SingularPoint.rational(Fraction(-g[0], g[1]), label, mult))
            continue
        with mpmath.workdps(_DPS):
            for z in _poly_roots(g):
                pts.append(SingularPoint(label, minpoly=g, approx=complex(z), multiplicity=mult))
    return pts


def quartic(r) -> Poly:
    """P_4(p, r p) = r - 1 - 4 r^2 p^2 + 8 r^2 p^3 - 4 r^2 p^4."""
    r = Fraction(r)
    return Poly([r - 1, 0, -4 * r * r, 8 * r * r, -4 * r * r])


def singular_points(r) -> list[SingularPoint]:
    """Roots of the structural head factors for p_w = r p."""
    r = Fraction(r)
    if r in (0, 1):
        raise ValueError("r = 0 and r = 1 are degenerate; the operator is first order")
    pts = [SingularPoint.rational(Fraction(1, 2), "1/2"), SingularPoint.rational(1, "1")]
    pts += points_of(Poly([1, 4, -4]), "(1±√2)/2")
    pts.append(SingularPoint.rational(1 / r, "1/r"))
    pts.append(SingularPoint.rational(1 - 1 / r, "1-1/r"))
    pts += points_of(quartic(r), "P4")
    return pts


def nearest_to_origin(points: Sequence[SingularPoint]) -> dict[str, SingularPoint]:
    """Closest point overall and closest on the positive real axis."""
    finite = [pt for pt in points if not pt.is_infinity and pt.numeric() != 0]
    overall = min(finite, key=lambda pt: abs(complex(pt.approx)))
    positive = [pt for pt in finite
                if abs(complex(pt.approx).imag) < 1e-12 and complex(pt.approx).real > 0]
    out = {"overall": overall}
    if positive:
        out["positive_real"] = min(positive, key=lambda pt: complex(pt.approx).real)
    return out


def quartic_crossover(lo=1.0001, hi=1.9999) -> float:
    """r in (1, 2) where the negative quartic root becomes closer than 1 - 1/r."""
    def gap(r):
        r = mpmath.mpf(r)
        neg = (r - mpmath.sqrt(r * r + 2 * r * mpmath.sqrt(r - 1))) / (2 * r)
        return abs(neg) - (1 - 1 / r)
    return float(mpmath.findroot(gap, (lo, hi), solver="bisect"))


# ---------------------------------------------------------------------------
# head polynomial
# ---------------------------------------------------------------------------


def head_polynomial(op: DiffOperator) -> Poly:
    return op.head


@dataclass
class StructuralFactors:
    matched: list[tuple[str, Poly, int]]
    cofactor: Poly
    missing: list[tuple[str, int]] = field(default_factory=list)
    coalesced: list[tuple[str, ...]] = field(default_factory=list)
    origin_power: int = 0

    def product(self) -> Poly:
        out = self.cofactor.mul_x(self.origin_power)
        for _, f, m in self.matched:
            for _ in range(m):
                out = out * f
        return out

    @property
    def complete(self) -> bool:
        return not self.missing


def _positive_constant(f: Poly) -> Poly:
    f = f.primitive()
    return -f if f[0] < 0 else f


def structural_candidates(r) -> list[tuple[str, Poly, int]]:
    """(label, primitive integer factor with positive constant term, expected multiplicity)."""
    r = Fraction(r)
    return [
        ("(1-2p)", Poly([1, -2]), 4),
        ("(1-p)", Poly([1, -1]), 1),
        ("(1+4p-4p^2)", Poly([1, 4, -4]), 1),
        ("(1-rp)", _positive_constant(Poly([1, -r])), 1),
        ("(r-1-rp)", _positive_constant(Poly([r - 1, -r])), 1),
        ("P4(p,rp)", _positive_constant(quartic(r)), 1),
    ]


def structural_factors(head: Poly, r) -> StructuralFactors:
    """Divide the head by the structural candidates; the rest is the apparent part.

    Candidates that coincide for a particular r (r = 2 merges three linear
    factors into 1-2p) are divided out once as a group, with their expected
    multiplicities added. A power of p (the regular singular point at the
    origin) is split off first and reported on its own.
    """
    r = Fraction(r)
    if r in (0, 1):
        raise ValueError("structural factors are defined for r outside {0, 1}")
    origin = head.valuation()
    head = head.mul_x(-origin)
    groups: dict[Poly, list] = {}
    for label, f, m in structural_candidates(r):
        if f.degree == 0:
            continue
        sign = f if f.lc > 0 else -f
        groups.setdefault(sign, []).append((label, f, m))
    rest = head
    matched, missing, coalesced = [], [], []
    for f, members in groups.items():
        expected = sum(m for _, _, m in members)
        labels = tuple(label for label, _, _ in members)
        if len(members) > 1:
            coalesced.append(labels)
        rep = members[0][1]
        found = 0
        while found < expected and rep.divides(rest):
            rest = rest.exact_div(rep)
            found += 1
        label = "=".join(labels)
        if found:
            matched.append((label, rep, found))
        if found < expected:
            missing.append((label, expected - found))
    return StructuralFactors(matched, rest, missing, coalesced, origin)


# ---------------------------------------------------------------------------
# indicial equations
# ---------------------------------------------------------------------------


class IrregularSingularity(ArithmeticError):
    pass


@dataclass
class ExponentSet:
    point: SingularPoint
    exponents: list
    exact: bool

    def floats(self) -> list[complex]:
        return [complex(e) for e in self.exponents]

    def sorted_real(self) -> list[float]:
        return sorted(complex(e).real for e in self.exponents)


def _falling_poly(j: int) -> Poly:
    out = Poly([1])
    for i in range(j):
        out = out * (P - i)
    return out


def _indicial_from(orders: list[int | None], leads: list) -> list[tuple[int, object]]:
    """Pairs (j, leading coefficient) attaining min(nu_j - j); checks regularity."""
    k = len(orders) - 1
    shifts = [(o - j) if o is not None else None for j, o in enumerate(orders)]
    m = min(s for s in shifts if s is not None)
    if shifts[k] != m:
        raise IrregularSingularity("IRREGULAR: the head coefficient does not attain the minimal shift")
    return [(j, leads[j]) for j, s in enumerate(shifts) if s == m]


def indicial_polynomial(op: DiffOperator, point) -> Poly:
    """Indicial polynomial at a rational point or 'infinity' (exact)."""
    if point == "infinity" or (isinstance(point, SingularPoint) and point.is_infinity):
        _, theta, _ = theta_form(op)
        D = max(t.degree for t in theta)
        if theta[-1].degree != D:
            raise IrregularSingularity("IRREGULAR at infinity")
        # p^mu: theta -> mu; exponent at infinity in t = 1/p is -mu
        ind = Poly([t[D] if t.degree >= D else 0 for t in theta])
        return ind.compose(-P)
    a = point.value if isinstance(point, SingularPoint) else Fraction(point)
    shifted = [q.compose(P + a) for q in op.coeffs]
    orders = [q.valuation() if not q.is_zero() else None for q in shifted]
    leads = [q[q.valuation()] if not q.is_zero() else 0 for q in shifted]
    out = Poly()
    for j, c in _indicial_from(orders, leads):
        out = out + _falling_poly(j) * c
    return out


def _multiset_roots(poly: Poly) -> tuple[list, bool]:
    roots: list = []
    g = poly
    for x, m in rational_roots(poly):
        roots += [x] * m
        lin = Poly([-x, 1])
        for _ in range(m):
            g = g.exact_div(lin)
    if g.degree > 0:
        with mpmath.workdps(_DPS):
            roots += [complex(z) for z in _poly_roots(g)]
        return roots, False
    return roots, True


def indicial_exponents(op: DiffOperator, point) -> ExponentSet:
    """Local exponents at a regular singular point.

    Rational points and infinity are exact; at a root of an irreducible
    minimal polynomial g the orders come from exact division by g and the
    leading coefficients are evaluated numerically: for Q = g^nu h the
    leading term in t = p - alpha is h(alpha) g'(alpha)^nu t^nu.
    """
    if not isinstance(point, SingularPoint):
        point = SingularPoint.infinity() if point == "infinity" else SingularPoint.rational(point)
    if point.is_infinity or point.is_rational:
        ind = indicial_polynomial(op, point)
        roots, exact = _multiset_roots(ind)
        return ExponentSet(point, roots, exact)
    g = point.minpoly
    with mpmath.workdps(_DPS):
        alpha = mpmath.mpc(point.approx)
        # polish the root at working precision
        alpha = mpmath.findroot(lambda z: _mp_eval(g, z), alpha)
        dg = _mp_eval(g.derivative(), alpha)
        orders, leads = [], []
        for q in op.coeffs:
            if q.is_zero():
                orders.append(None)
                leads.append(0)
                continue
            nu, h = 0, q
            while g.divides(h):
                h = h.exact_div(g)
                nu += 1
            orders.append(nu)
            leads.append(_mp_eval(h, alpha) * dg**nu)
        terms = _indicial_from(orders, leads)
        k = max(j for j, _ in terms)
        coeffs = [mpmath.mpc(0)] * (k + 1)
        for j, c in terms:
            for i, f in enumerate(_falling_poly(j).coeffs):
                coeffs[i] += c * f
        roots = mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=_DPS) if k > 1 else [-coeffs[0] / coeffs[1]]
        return ExponentSet(point, [complex(z) for z in roots], False)


# ---------------------------------------------------------------------------
# Padé analysis
# ---------------------------------------------------------------------------


class NoEstimate(ArithmeticError):
    pass


@dataclass
class NumericPade:
    numerator: list
    denominator: list
    L: int
    M: int

    def __call__(self, x):
        x = mpmath.mpf(x)
        num = mpmath.polyval(self.numerator[::-1], x)
        den = mpmath.polyval(self.denominator[::-1], x)
        if den == 0:
            return mpmath.inf if num >= 0 else -mpmath.inf
        return num / den

    def poles(self, dps: int = 60) -> list:
        """Denominator roots: companion-matrix eigenvalues polished by Newton steps."""
        return _polished_roots(self.denominator, dps)


def _polished_roots(coeffs: Sequence, dps: int = 60) -> list[complex]:
    cs = list(coeffs)
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    n = len(cs) - 1
    if n < 1:
        return []
    with mpmath.workdps(dps):
        # rescale p so the roots have geometric mean modulus 1
        scale = abs(cs[0] / cs[-1]) ** (mpmath.mpf(1) / n)
        scaled = [float(c * scale**k / cs[-1]) for k, c in enumerate(cs)]
        guesses = np.roots(scaled[::-1]) * float(scale)
        rev = cs[::-1]
        drev = [c * (n - i) for i, c in enumerate(rev[:-1])]
        out = []
        for z in guesses:
            z = mpmath.mpc(complex(z))
            for _ in range(30):
                step = mpmath.polyval(rev, z) / mpmath.polyval(drev, z)
                z -= step
                if abs(step) < mpmath.mpf(10) ** (-dps // 2) * max(1, abs(z)):
                    break
            out.append(complex(z))
    return out


def _hankel_rank(coeffs: Sequence, L: int, M: int, prime: int = DEFAULT_PRIME_START) -> int:
    """Exact rank of the denominator system, computed modulo a large prime."""
    c = [rational_mod(x, prime) for x in coeffs[: L + M + 1]]
    rows = [[c[L + i - j] if L + i - j >= 0 else 0 for j in range(1, M + 1)] for i in range(1, M + 1)]
    return len(rref_mod(rows, prime)[1])


def pade_numeric(coeffs: Sequence, L: int, M: int, dps: int = 300) -> NumericPade:
    """[L/M] Padé approximant by a high-precision Hankel solve (denominator(0) = 1)."""
    if len(coeffs) < L + M + 1:
        raise ValueError(f"[{L}/{M}] needs {L + M + 1} coefficients, got {len(coeffs)}")
    if M and _hankel_rank(coeffs, L, M) < M:
        raise ArithmeticError(f"degenerate [{L}/{M}] Padé approximant")
    with mpmath.workdps(dps):
        c = [_mp(x) for x in coeffs]
        if M == 0:
            return NumericPade(c[: L + 1], [mpmath.mpf(1)], L, 0)
        A = mpmath.matrix(M, M)
        rhs = mpmath.matrix(M, 1)
        for i in range(1, M + 1):
            for j in range(1, M + 1):
                k = L + i - j
                A[i - 1, j - 1] = c[k] if k >= 0 else 0
            rhs[i - 1] = -c[L + i]
        try:
            b = mpmath.lu_solve(A, rhs)
        except ZeroDivisionError as exc:
            raise ArithmeticError(f"degenerate [{L}/{M}] Padé approximant") from exc
        den = [mpmath.mpf(1)] + [b[i] for i in range(M)]
        num = [mpmath.fsum(den[j] * c[i - j] for j in range(min(i, M) + 1)) for i in range(L + 1)]
        return NumericPade(num, den, L, M)


def _pade_with_retry(coeffs, L: int, M: int, notes: list[str]) -> NumericPade:
    while True:
        try:
            return pade_numeric(coeffs, L, M)
        except ArithmeticError as exc:
            notes.append(str(exc))
            if L == 0 or M == 0:
                raise
            L, M = L - 1, M - 1


@dataclass
class PadeScan:
    L: int
    M: int
    grid: list[float]
    values: list[float]
    real_poles: list[float]
    notes: list[str] = field(default_factory=list)
    all_real_poles: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["p,value"]
        lines += [f"{x:.6f},{v:.12g}" for x, v in zip(self.grid, self.values)]
        return "\n".join(lines) + "\n"

    def poles_near(self, x: float, tol: float) -> list[float]:
        return [z for z in self.real_poles if abs(z - x) <= tol]


def pade_scan(series: RatSeries, window: tuple[float, float] = (0.0, 0.49), step: float = 0.001,
              degree: int | None = None, imag_tol: float = 1e-8) -> PadeScan:
    """Evaluate a diagonal Padé approximant on a grid and list its real poles in the window."""
    N = series.order
    M = N // 2 if degree is None else degree
    if 2 * M > N:
        raise ValueError(f"[{M}/{M}] needs series order >= {2 * M}")
    notes: list[str] = []
    pa = _pade_with_retry(series.coeffs, M, M, notes)
    lo, hi = window
    real = sorted(z.real for z in pa.poles() if abs(z.imag) < imag_tol)
    poles = [x for x in real if lo < x < hi]
    n = int(round((hi - lo) / step))
    grid = [lo + i * step for i in range(1, n)]
    with mpmath.workdps(60):
        values = [float(pa(x)) for x in grid]
    return PadeScan(pa.L, pa.M, grid, values, poles, notes, real)


@dataclass
class ExponentEstimate:
    p_c: float
    gamma: float
    spread: float
    sizes: list[int]
    samples: list[tuple[float, float]]


def critical_exponent_estimate(series: RatSeries, p_c=Fraction(1, 2), sizes: Sequence[int] | None = None,
                               window: float = 0.05) -> ExponentEstimate:
    """Dlog-Padé estimate of gamma where S ~ |p_c - p|^(-gamma).

    The pole of a diagonal Padé of S'/S nearest p_c estimates p_c, and
    minus its residue estimates gamma. The spread over three sizes is the
    quoted uncertainty.
    """
    if series.order < 40:
        raise ValueError("series order must be at least 40")
    target = float(Fraction(p_c))
    dlog = series.log_derivative()
    N = dlog.order
    if sizes is None:
        top = min(N // 2, 40)
        sizes = [top - 4, top - 2, top]
    samples = []
    notes: list[str] = []
    with mpmath.workdps(120):
        for M in sizes:
            try:
                pa = _pade_with_retry(dlog.coeffs, M, M, notes)
            except ArithmeticError:
                continue
            cands = [z for z in pa.poles() if abs(z - target) < window]
            if not cands:
                continue
            z = min(cands, key=lambda w: abs(w - target))
            z = mpmath.mpc(z)
            num = mpmath.polyval(pa.numerator[::-1], z)
            dden = mpmath.polyval([i * c for i, c in enumerate(pa.denominator)][1:][::-1], z)
            res = num / dden
            samples.append((float(mpmath.re(z)), float(-mpmath.re(res))))
    if len(samples) < 2:
        raise NoEstimate(f"no stable pole within {window} of {p_c}")
    pcs = [s[0] for s in samples]
    gammas = [s[1] for s in samples]
    return ExponentEstimate(
        p_c=sum(pcs) / len(pcs),
        gamma=sum(gammas) / len(gammas),
        spread=max(gammas) - min(gammas),
        sizes=list(sizes),
        samples=samples,
    )
