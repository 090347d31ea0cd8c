"""Acceptance suite: one check per criterion, summarised at the end of the run.

Each ``criterion_N`` returns (passed, detail) and records it in RESULTS; the
conftest hook prints one PASS/FAIL line per criterion. Criteria 8 and 11 are
not attainable as literally stated. Their literal forms are strict xfails,
and separate tests assert every part that does hold together with the
explanation of the part that does not.

Run ``python tests/test_acceptance.py`` for the report without pytest.
"""

import sys
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dampwall.algebra.modular import prime_sequence  # noqa: E402
from dampwall.algebra.poly import P, Poly, poly_prod  # noqa: E402
from dampwall.factory import closed_form_S  # noqa: E402
from dampwall.guess import guess_ode_mod, minimal_ode_search, physical_source, reconstruct_ode  # noqa: E402
from dampwall.operators import DiffOperator  # noqa: E402
from dampwall.percolation import mean_size_enum, mean_size_series, specialize  # noqa: E402
from dampwall.repro import ODE_R2, RECURRENCE_R2, eq_recurrence, fig2, table2, table3  # noqa: E402
from dampwall.singular import indicial_exponents, structural_factors  # noqa: E402

from helpers import exact_series, factorization, order4, removal  # noqa: E402

RESULTS: dict[int, tuple[str, bool, str]] = {}

TITLES = {
    1: "series exactness through p^6",
    2: "specialized series at r = 2 through p^13",
    3: "generator equals enumeration, m <= 3, N = 8",
    4: "order-6 recurrence recovered from 50 terms",
    5: "inhomogeneous order-2 ODE at r = 2",
    6: "minimal ODE (4, 33) for r = 3, 4, 5",
    7: "special orders at r = 0, 1, 2",
    8: "local exponents at r = 3 and 3/2",
    9: "no physical pole at 1/3 for r = 3/2",
    10: "critical exponents by Dlog-Pade",
    11: "solutions, c_r and factorization",
    12: "closed-form sanity",
}

S11_ROWS = [
    [1, 1],
    [1, 2, 2],
    [2, 2, 3, 5],
    [4, 5, 3, 2, 14],
    [8, 8, 11, 9, -14, 42],
    [16, 19, 11, 16, 58, -108, 132],
    [32, 30, 48, 26, -71, 387, -561, 429],
]
R2_TERMS = [1, 3, 6, 16, 30, 84, 130, 464, 380, 3048, -1666, 27232, -60116, 332216]


def _record(n, ok, detail=""):
    RESULTS[n] = (TITLES[n], bool(ok), detail)
    return bool(ok), detail


@lru_cache(maxsize=None)
def criterion_1():
    s = mean_size_series((1, 1), 6)
    bad = [n for n in range(7) if list(s.row(n).coeffs) != S11_ROWS[n]]
    return _record(1, not bad, f"mismatched rows {bad}" if bad else "")


@lru_cache(maxsize=None)
def criterion_2():
    got = list(specialize(mean_size_series((1, 1), 13), 2).coeffs)
    return _record(2, got == R2_TERMS, "" if got == R2_TERMS else f"got {got}")


@lru_cache(maxsize=None)
def criterion_3():
    seeds = [(m, y) for m in (1, 2, 3) for y in range(m - 1, m + 3)]
    bad = [s for s in seeds if mean_size_series(s, 8) != mean_size_enum(s, 8)]
    return _record(3, not bad, f"{len(seeds)} seeds" + (f", mismatches {bad}" if bad else ""))


@lru_cache(maxsize=None)
def criterion_4():
    rec, rows = eq_recurrence(50)
    a = exact_series(2, 49).coeffs
    tail = RECURRENCE_R2.residuals(a)[7 - RECURRENCE_R2.start:] if rec is not None else [1]
    ok = rec is not None and all(r["pass"] for r in rows) and not any(tail)
    return _record(4, ok, "; ".join(f"{r['check']}={r['pass']}" for r in rows))


@lru_cache(maxsize=None)
def criterion_5():
    s = exact_series(2, 60)
    fits = [guess_ode_mod(s.to_mod(q), 2, 6, rhs_degree=5) for q in prime_sequence(3)]
    if any(f is None for f in fits):
        return _record(5, False, "no fit at (2, 6, 5)")
    op, bad = reconstruct_ode(fits)
    ref = ODE_R2.normalized()
    same = op is not None and op.coeffs == ref.coeffs and op.rhs == ref.rhs
    head = poly_prod([P**2, Poly([1, -1]), Poly([1, -2]) ** 3, Poly([1, 4, -4])])
    head_ok = op is not None and op.head == head * Fraction(op.head.lc, head.lc)
    exps = sorted(indicial_exponents(DiffOperator(op.coeffs), Fraction(1, 2)).exponents) if op else None
    ok = same and head_ok and exps == [-2, 2]
    return _record(5, ok, f"operator={same} head={head_ok} exponents={exps}")


@lru_cache(maxsize=None)
def criterion_6():
    details, ok = [], True
    for r in (3, 4, 5):
        op, rep = order4(r)
        sf = structural_factors(op.head, r)
        good = (op is not None and (rep.order, rep.degree) == (4, 33) and rep.unknowns == 170
                and rep.terms_used == 180 and len(rep.primes) <= 10 and sf.complete and len(sf.matched) == 6)
        ok &= good
        details.append(f"r={r}: ({rep.order},{rep.degree}) primes={len(rep.primes)} factors={len(sf.matched)}")
    return _record(6, ok, "; ".join(details))


@lru_cache(maxsize=None)
def criterion_7():
    orders = {r: minimal_ode_search(physical_source((1, 1), r)).order for r in (0, 1, 2)}
    return _record(7, orders == {0: 1, 1: 1, 2: 3}, f"orders {orders}")


@lru_cache(maxsize=None)
def table2_rows(r):
    op, _ = order4(r)
    return table2(r, op)


@lru_cache(maxsize=None)
def criterion_8():
    failing = [f"r={r} at {row['label']}: found {', '.join(row['found'])}" for r in (3, Fraction(3, 2))
               for row in table2_rows(r) if not row["pass"]]
    return _record(8, not failing, f"failing rows: {'; '.join(failing)}" if failing else "all rows match")


@lru_cache(maxsize=None)
def criterion_9():
    scan, rows = fig2(100)
    return _record(9, all(r["pass"] for r in rows), "; ".join(f"{r['check']}={r['pass']}" for r in rows))


@lru_cache(maxsize=None)
def criterion_10():
    rows = table3(100)
    detail = "; ".join(f"{r['case']}: gamma={r['gamma']:.4f}" for r in rows)
    return _record(10, all(r["pass"] for r in rows), detail)


@lru_cache(maxsize=None)
def criterion_11_parts():
    parts = {}
    for r in (3, 4, 5):
        rows = factorization(r)
        for row in rows[:6]:
            need = 100 if row["check"].startswith("L4") else 1
            parts[f"r={r} {row['check']}"] = row["pass"] and row["verified_order"] >= need
    parts["c_3 = 2"] = removal(3).c_r == 2
    parts["c_4 = 8"] = removal(4).c_r == 8
    printed, corrected = factorization(3)[6], factorization(3)[7]
    parts["r=3 printed L2.LS annihilates G_r to >= 60"] = printed["pass"] and printed["verified_order"] >= 60
    parts["r=3 corrected L2.LS annihilates G_r to >= 60"] = corrected["pass"] and corrected["verified_order"] >= 60
    return parts


@lru_cache(maxsize=None)
def criterion_11():
    parts = criterion_11_parts()
    failing = [k for k, v in parts.items() if not v]
    return _record(11, not failing, f"failing: {'; '.join(failing)}" if failing else "")


@lru_cache(maxsize=None)
def criterion_12():
    s = closed_form_S(Fraction(3, 2)).series(60)
    rational = all(isinstance(c, Fraction) for c in s.coeffs)
    zeros = all(closed_form_S(r).evaluate(Fraction(1, 2)) == 0 for r in (3, 4, 5))
    return _record(12, rational and zeros, f"rational={rational} zero at 1/2={zeros}")


CRITERIA = {n: globals()[f"criterion_{n}"] for n in TITLES}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7, 9, 10, 12])
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    assert ok, detail


@pytest.mark.xfail(strict=True, reason="exponents at 1/r = 2/3 for r = 3/2 are {-2, 1, 2, 3}: three apparent "
                                       "singularities of L4 coincide with 1/r at exactly this r")
def test_criterion_8_literal():
    ok, detail = criterion_8()
    assert ok, detail


def test_criterion_8_attainable():
    criterion_8()
    failing = [(r, row["label"]) for r in (3, Fraction(3, 2)) for row in table2_rows(r) if not row["pass"]]
    assert failing == [(Fraction(3, 2), "1/r")]
    # the deviation is confined to r = 3/2: on either side 1/r has the tabulated set
    for nearby in (Fraction(149, 100), Fraction(151, 100)):
        op, _ = order4(nearby)
        assert indicial_exponents(op, 1 / nearby).exponents == [-2, 0, 1, 2]
    op, _ = order4(Fraction(3, 2))
    sf = structural_factors(op.head, Fraction(3, 2))
    assert sf.cofactor(Fraction(2, 3)) == 0


@pytest.mark.xfail(strict=True, reason="c_3 = 2 and c_4 = 8 are the numerator contents, not removal "
                                       "coefficients (found: -1/4 and -1, ratio -1/8); the printed L2 "
                                       "needs b_1 and c_6 sign-flipped to annihilate G_r")
def test_criterion_11_literal():
    ok, detail = criterion_11()
    assert ok, detail


def test_criterion_11_attainable():
    criterion_11()
    parts = criterion_11_parts()
    assert sorted(k for k, v in parts.items() if not v) == [
        "c_3 = 2", "c_4 = 8", "r=3 printed L2.LS annihilates G_r to >= 60"]
    for r in (3, 4, 5):
        res = removal(r)
        assert res.ratio == Fraction(-1, 8)
    assert (removal(3).tabulated, removal(4).tabulated) == (2, 8)


def report(stream=sys.stdout):
    for n in sorted(RESULTS):
        title, ok, detail = RESULTS[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
        print(line + (f"  [{detail}]" if detail and not ok else ""), file=stream)


if __name__ == "__main__":
    for fn in CRITERIA.values():
        fn()
    report()
    sys.exit(0 if all(ok for _, ok, _ in RESULTS.values()) else 1)
