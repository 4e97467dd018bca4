"""Vuza-style aperiodic inner rhythms.

Given n = p1*n1*p2*n2*n3 with gcd(p1*n1, p2*n2) = 1, the inner rhythm is

    A = n3 * (p1*n1*{0..n2-1}  +  p2*n2*{0..n1-1})   (mod n)

which has n1*n2 elements, contains 0 and has no nonzero period. The
rhythm is returned exactly as the formula produces it (not its
lexicographically smallest translate), e.g. 0,8,16,18,26,34 for n = 72.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from math import gcd
from typing import Iterator, Optional, TextIO

from .rhythm import Rhythm, smallest_period


class VuzaError(ValueError):
    pass


@dataclass(frozen=True)
class VuzaParams:
    p1: int
    n1: int
    p2: int
    n2: int
    n3: int

    @property
    def product(self) -> int:
        return self.p1 * self.n1 * self.p2 * self.n2 * self.n3

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.p1, self.n1, self.p2, self.n2, self.n3)


def violations(params: VuzaParams, n: int) -> list[str]:
    """Human-readable list of broken parameter invariants (empty when valid)."""
    problems = []
    for name, value in zip(("p1", "n1", "p2", "n2", "n3"), params.as_tuple()):
        if not isinstance(value, int) or value < 2:
            problems.append(f"{name}={value} must be an integer >= 2")
    if problems:
        return problems
    if params.product != n:
        problems.append(f"p1*n1*p2*n2*n3 = {params.product} != n = {n}")
    g = gcd(params.p1 * params.n1, params.p2 * params.n2)
    if g != 1:
        problems.append(f"gcd(p1*n1, p2*n2) = gcd({params.p1 * params.n1}, {params.p2 * params.n2}) = {g} != 1")
    return problems


def validate(params: VuzaParams, n: int) -> bool:
    return not violations(params, n)


def construct_inner(params: VuzaParams, n: Optional[int] = None) -> Rhythm:
    if n is None:
        n = params.product
    problems = violations(params, n)
    if problems:
        raise VuzaError("invalid Vuza parameters: " + "; ".join(problems))
    p1, n1, p2, n2, n3 = params.as_tuple()
    points = [n3 * (p1 * n1 * i + p2 * n2 * j) % n for i in range(n2) for j in range(n1)]
    # coprimality makes the two arithmetic progressions a direct sum
    if len(set(points)) != n1 * n2:
        raise VuzaError(f"Vuza summands collide for {params}")
    # i = j = 0 puts 0 in A, so the formula output is already a 0-based representative
    A = Rhythm.of(n, points)
    if smallest_period(A) is not None:
        raise VuzaError(f"constructed rhythm {A} is periodic")
    return A


@dataclass(frozen=True)
class InstanceRow:
    n: int
    params: VuzaParams
    expected: Optional[int] = None
    extended: bool = False
    label: str = ""


_REQUIRED = ("n", "p1", "n1", "p2", "n2", "n3")


def read_instances(fh: TextIO) -> Iterator[InstanceRow]:
    """Rows of an instance CSV with header ``n,p1,n1,p2,n2,n3``.

    Optional columns: ``expected`` (reference class count), ``extended``
    (truthy rows are skipped unless extended runs are requested) and ``label``.
    """
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        return
    missing = [c for c in _REQUIRED if c not in reader.fieldnames]
    if missing:
        raise VuzaError(f"instance CSV lacks columns {missing}")
    for row in reader:
        vals = {k: int(row[k]) for k in _REQUIRED}
        expected = row.get("expected") or None
        yield InstanceRow(
            n=vals["n"],
            params=VuzaParams(vals["p1"], vals["n1"], vals["p2"], vals["n2"], vals["n3"]),
            expected=int(expected) if expected is not None else None,
            extended=(row.get("extended") or "").strip().lower() in ("1", "true", "yes"),
            label=(row.get("label") or "").strip(),
        )
