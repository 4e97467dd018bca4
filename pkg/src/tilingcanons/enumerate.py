"""Enumerating tiling complements of a rhythm up to translation.

Three independent routes produce the same class sets:

* ``enumerate_sat``: solve the CNF model, and after each model block every
  translate of the decoded complement, until the store is UNSAT.
* ``enumerate_oracle``: exact-cover depth-first search over translates of A,
  always covering the smallest uncovered instant first.
* ``enumerate_fill_out``: grow a partial complement starting from {0},
  branching on the instant with the fewest remaining ways to be covered.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import sat as satlib
from .encoding import blocking_clause, encode
from .rhythm import (
    Rhythm,
    canonicalize,
    is_periodic_fast,
    is_tiling,
    maximal_divisors,
    smallest_period,
    translate,
)

METHOD_SAT = "SAT"
METHOD_ORACLE = "ORACLE"
METHOD_FILL_OUT = "FILL_OUT"

DEFAULT_ORACLE_CAP = 10_000_000


class EnumerationError(RuntimeError):
    """An internal inconsistency: a decoded model failed verification."""


class SearchLimitExceeded(RuntimeError):
    pass


class _OutOfTime(Exception):
    pass


@dataclass
class EnumerationReport:
    n: int
    rhythm: Rhythm
    method: str
    aperiodic: bool = True
    classes: list[Rhythm] = field(default_factory=list)
    raw_solution_count: int = 0
    elapsed: float = 0.0
    solver_calls: int = 0
    complete: bool = True

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def class_set(self) -> set[tuple[int, ...]]:
        return {c.elements for c in self.classes}

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "n": self.n,
            "A": list(self.rhythm.elements),
            "method": self.method,
            "aperiodic": self.aperiodic,
            "class_count": self.class_count,
            "classes": [list(c.elements) for c in self.classes],
            "raw_solution_count": self.raw_solution_count,
            "solver_calls": self.solver_calls,
            "complete": self.complete,
        }
        if timing:
            out["elapsed_ms"] = round(self.elapsed * 1000, 3)
        return out


def _cardinality_ok(A: Rhythm) -> bool:
    return bool(A.elements) and A.modulus % len(A) == 0


def _keep(B: Rhythm, aperiodic: bool) -> bool:
    return not aperiodic or smallest_period(B) is None


# -- SAT route -----------------------------------------------------------------

def enumerate_sat(
    A: Rhythm,
    aperiodic: bool = True,
    seed: int = satlib.DEFAULT_SEED,
    engine: str = "cdcl",
    deadline: Optional[float] = None,
    store_factory: Optional[Callable[[int], object]] = None,
) -> EnumerationReport:
    """AllSAT with translation blocking.

    After each model the complement B is decoded and verified, then one
    clause per distinct translate B + t forbids that exact x-support.
    Because every model has exactly n/|A| true x-variables, forbidding the
    support of B + t excludes B + t and nothing else.

    Each model is checked here against the base CNF, and its class must be
    new, which is exactly what the blocking clauses demand. The in-repo
    engines therefore skip re-checking the ever-growing blocking set.
    """
    start = time.perf_counter()
    A = canonicalize(A)
    n = A.modulus
    report = EnumerationReport(n, A, METHOD_SAT, aperiodic=aperiodic)
    if not _cardinality_ok(A):
        report.elapsed = time.perf_counter() - start
        return report

    inst = encode(A, aperiodic=aperiodic)
    D = maximal_divisors(n) if n >= 2 else None
    if store_factory is not None:
        store = store_factory(inst.num_vars)
    else:
        store = satlib.new_store(inst.num_vars, seed=seed, engine=engine, verify=False)
    store.add_clauses(inst.clauses)

    found = []
    seen: set[Rhythm] = set()
    while True:
        if deadline is not None and time.monotonic() > deadline:
            report.complete = False
            break
        result = store.solve(deadline=deadline)
        report.solver_calls += 1
        if result.status == satlib.UNKNOWN:
            report.complete = False
            break
        if result.status == satlib.UNSAT:
            break
        if not satlib.check_model(inst.clauses, result.model):
            raise EnumerationError("model violates the base CNF")
        B = inst.decode(result.model)
        if not is_tiling(A, B):
            raise EnumerationError(f"model decodes to a non-complement {B} of {A}")
        if aperiodic and n >= 2 and is_periodic_fast(B, D):
            raise EnumerationError(f"model decodes to a periodic complement {B}")
        if inst.aperiodic:
            _check_aux(inst, result.model, B)
        rep = canonicalize(B)
        if rep in seen:
            raise EnumerationError(f"class of {B} was already blocked")
        seen.add(rep)
        found.append(rep)
        translates = {translate(rep, t).elements for t in range(n)}
        report.raw_solution_count += len(translates)
        for T in sorted(translates):
            store.add_clause(blocking_clause(inst.var_map, T))

    report.classes = sorted(found)
    report.elapsed = time.perf_counter() - start
    return report


def _check_aux(inst, model, B: Rhythm) -> None:
    vm = inst.var_map
    members = B.elementset
    n = vm.n
    for d in vm.divisors:
        for i in range(d):
            hits = sum(1 for k in range(i, n, d) if k in members)
            constant = hits in (0, n // d)
            if model[vm.u(d, i) - 1] != constant:
                raise EnumerationError(f"u[{d},{i}] disagrees with chain of {B}")


# -- exact-cover routes --------------------------------------------------------

def _translate_masks(A: Rhythm) -> list[int]:
    n = A.modulus
    base = A.mask
    full = (1 << n) - 1
    # rotate left by b within n bits
    return [((base << b) | (base >> (n - b))) & full if b else base for b in range(n)]


def _finish(report: EnumerationReport, raw: list[tuple[int, ...]], aperiodic: bool, start: float):
    n = report.n
    classes = set()
    for elems in raw:
        B = canonicalize(Rhythm(n, elems))
        if _keep(B, aperiodic):
            classes.add(B)
    report.raw_solution_count = len(raw)
    report.classes = sorted(classes)
    report.elapsed = time.perf_counter() - start
    return report


def enumerate_oracle(
    A: Rhythm,
    aperiodic: bool = True,
    cap: int = DEFAULT_ORACLE_CAP,
    deadline: Optional[float] = None,
) -> EnumerationReport:
    """Brute-force exact cover: every complement B is found exactly once.

    ``raw_solution_count`` counts all complements before the periodicity
    filter and before collapsing translates. ``cap`` bounds the number of
    search nodes; passing ``deadline`` yields an incomplete report instead.
    """
    start = time.perf_counter()
    A = canonicalize(A)
    n = A.modulus
    report = EnumerationReport(n, A, METHOD_ORACLE, aperiodic=aperiodic)
    if not _cardinality_ok(A):
        return _finish(report, [], aperiodic, start)

    masks = _translate_masks(A)
    full = (1 << n) - 1
    elems = A.elements
    raw: list[tuple[int, ...]] = []
    chosen: list[int] = []
    nodes = 0

    def dfs(covered: int):
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise SearchLimitExceeded(f"oracle exceeded {cap} search nodes")
        if deadline is not None and not nodes & 4095 and time.monotonic() > deadline:
            raise _OutOfTime
        if covered == full:
            raw.append(tuple(sorted(chosen)))
            return
        s = (~covered & (covered + 1)).bit_length() - 1
        for a in elems:
            b = (s - a) % n
            m = masks[b]
            if not m & covered:
                chosen.append(b)
                dfs(covered | m)
                chosen.pop()

    try:
        dfs(0)
    except _OutOfTime:
        report.complete = False
    return _finish(report, raw, aperiodic, start)


def enumerate_fill_out(
    A: Rhythm,
    aperiodic: bool = True,
    cap: int = DEFAULT_ORACLE_CAP,
    deadline: Optional[float] = None,
) -> EnumerationReport:
    """Fill-out search from P = {0}.

    The rank of an uncovered instant x is the number of offsets b with
    x in A + b and A + b disjoint from the current cover. The search branches
    on an instant of smallest rank (ties to the smallest x); rank zero is a
    dead end. Only complements containing 0 are generated, so periodic
    complements and translates are removed afterwards.
    """
    start = time.perf_counter()
    A = canonicalize(A)
    n = A.modulus
    report = EnumerationReport(n, A, METHOD_FILL_OUT, aperiodic=aperiodic)
    if not _cardinality_ok(A):
        return _finish(report, [], aperiodic, start)

    masks = _translate_masks(A)
    full = (1 << n) - 1
    elems = A.elements
    raw: list[tuple[int, ...]] = []
    P = [0]
    nodes = 0

    def options(x: int, covered: int) -> list[int]:
        return [b for b in sorted({(x - a) % n for a in elems}) if not masks[b] & covered]

    def expand(covered: int):
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise SearchLimitExceeded(f"fill-out exceeded {cap} search nodes")
        if deadline is not None and not nodes & 4095 and time.monotonic() > deadline:
            raise _OutOfTime
        if covered == full:
            raw.append(tuple(sorted(P)))
            return
        best = None
        rest = ~covered & full
        while rest:
            low = rest & -rest
            x = low.bit_length() - 1
            rest ^= low
            opts = options(x, covered)
            if best is None or len(opts) < len(best[1]):
                best = (x, opts)
                if not opts:
                    return
        for b in best[1]:
            P.append(b)
            expand(covered | masks[b])
            P.pop()

    try:
        expand(masks[0])
    except _OutOfTime:
        report.complete = False
    return _finish(report, raw, aperiodic, start)


def cross_validate(A: Rhythm, aperiodic: bool = True, seed: int = satlib.DEFAULT_SEED) -> bool:
    """True iff the SAT, oracle and fill-out routes report identical class sets."""
    return reports_agree(
        enumerate_sat(A, aperiodic=aperiodic, seed=seed),
        enumerate_oracle(A, aperiodic=aperiodic),
        enumerate_fill_out(A, aperiodic=aperiodic),
    )


def reports_agree(*reports: EnumerationReport) -> bool:
    sets = [r.class_set() for r in reports]
    return all(s == sets[0] for s in sets[1:])


METHODS = {
    "sat": enumerate_sat,
    "oracle": enumerate_oracle,
    "fillout": enumerate_fill_out,
}
