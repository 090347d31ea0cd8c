"""JSON and CSV artifacts: series, operators and check reports.

All numbers are written as exact decimal strings ("p/q" for non-integers)
and objects are dumped with sorted keys, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .algebra.poly import Poly
from .algebra.series import ModSeries, RatSeries
from .operators import DiffOperator
from .percolation import BivariateSeries


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def exact(c) -> str:
    return str(Fraction(c))


def poly_to_json(poly: Poly) -> list[str]:
    return [exact(c) for c in poly.coeffs]


def poly_from_json(items) -> Poly:
    return Poly(Fraction(s) for s in items)


def series_to_json(series) -> dict:
    if isinstance(series, BivariateSeries):
        return {"kind": "bivariate", "order": series.order,
                "terms": [{"n": n, "k": k, "c": str(c)} for n, k, c in series.terms()]}
    if isinstance(series, RatSeries):
        return {"kind": "rational", "order": series.order,
                "coeffs": [[str(c.numerator), str(c.denominator)] for c in series.coeffs]}
    if isinstance(series, ModSeries):
        return {"kind": "mod", "prime": series.prime, "order": series.order,
                "coeffs": [str(c) for c in series.coeffs]}
    raise TypeError(f"cannot serialise {type(series).__name__}")


def series_from_json(data: dict):
    kind = data.get("kind")
    if kind == "bivariate":
        coeffs = {(t["n"], t["k"]): int(t["c"]) for t in data["terms"] if int(t["c"])}
        return BivariateSeries(coeffs, data["order"])
    if kind == "rational":
        return RatSeries(Fraction(int(n), int(d)) for n, d in data["coeffs"])
    if kind == "mod":
        return ModSeries([int(c) for c in data["coeffs"]], data["prime"])
    raise ValueError(f"unknown series kind {kind!r}")


def operator_to_json(op: DiffOperator, verified_order: int | None = None,
                     primes=()) -> dict:
    return {
        "order": op.order,
        "coeffs": [poly_to_json(c) for c in op.coeffs],
        "rhs": None if op.rhs is None else poly_to_json(op.rhs),
        "verified_order": verified_order,
        "primes": [int(q) for q in primes],
    }


def operator_from_json(data: dict) -> DiffOperator:
    rhs = data.get("rhs")
    return DiffOperator([poly_from_json(c) for c in data["coeffs"]],
                        None if rhs is None else poly_from_json(rhs))


def read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
