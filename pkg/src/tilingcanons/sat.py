"""Incremental CDCL SAT engine.

Conflict-driven clause learning with two watched literals, VSIDS-style
branching, phase saving, Luby restarts and periodic reduction of learned
clauses. Clauses may be added between calls to :meth:`ClauseStore.solve`,
which is what the enumeration loop relies on.

A plain DPLL engine (:class:`BacktrackingStore`) with the same interface is
kept for differential testing, and :class:`ExternalStore` hands the problem
to any DIMACS solver executable.
"""
from __future__ import annotations

import heapq
import os
import random
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

DEFAULT_SEED = 0

_RESTART_BASE = 64
_VAR_DECAY = 0.95
_CLAUSE_DECAY = 0.999


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveResult:
    status: str
    model: Optional[tuple[bool, ...]] = None

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def value(self, var: int) -> bool:
        if self.model is None:
            raise SolverError(f"no model ({self.status})")
        return self.model[var - 1]

    def literals(self) -> list[int]:
        """Model as signed DIMACS literals, one per variable."""
        if self.model is None:
            return []
        return [v if b else -v for v, b in enumerate(self.model, start=1)]


def check_model(clauses: Iterable[Sequence[int]], model: Sequence[bool]) -> bool:
    """True iff every clause has a literal made true by ``model`` (index v-1)."""
    for clause in clauses:
        for lit in clause:
            if model[abs(lit) - 1] == (lit > 0):
                break
        else:
            return False
    return True


def luby(i: int) -> int:
    """i-th term (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


def _normalize(num_vars: int, clause: Iterable[int]) -> Optional[tuple[int, ...]]:
    """Deduplicated clause, or None for tautologies."""
    out = []
    seen = set()
    for lit in clause:
        lit = int(lit)
        if lit == 0 or abs(lit) > num_vars:
            raise SolverError(f"literal {lit} outside 1..{num_vars}")
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


class ClauseStore:
    """A growing clause set over ``num_vars`` variables, solved by CDCL.

    Literals are encoded internally as ``2*v`` (positive) and ``2*v + 1``
    (negative); ``val[lit]`` is 1 (true), -1 (false) or 0 (unassigned).
    With ``verify`` (the default) every model is re-checked against all
    added clauses; callers that grow the store by thousands of clauses can
    turn this off and check models themselves.
    """

    def __init__(self, num_vars: int, seed: int = DEFAULT_SEED, verify: bool = True):
        if num_vars < 1:
            raise SolverError("a clause store needs at least one variable")
        self.num_vars = num_vars
        self.seed = seed
        self.verify = verify
        self.original: list[tuple[int, ...]] = []
        self.unsat = False

        size = 2 * (num_vars + 1)
        self.val = [0] * size
        self.watches: list[list[int]] = [[] for _ in range(size)]
        self.clauses: list[Optional[list[int]]] = []
        self.learnt_ids: list[int] = []
        self.clause_act: dict[int, float] = {}
        self.level = [0] * (num_vars + 1)
        self.reason = [-1] * (num_vars + 1)
        self.phase = [False] * (num_vars + 1)
        self.seen = [False] * (num_vars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0

        self.activity = [0.0] * (num_vars + 1)
        if seed:
            rng = random.Random(seed)
            for v in range(1, num_vars + 1):
                self.activity[v] = rng.random() * 1e-5
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.heap: list[tuple[float, int]] = [(-self.activity[v], v) for v in range(1, num_vars + 1)]
        heapq.heapify(self.heap)

        self.max_learnts = 4000
        self.restarts = 0
        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0, "solves": 0}

    # -- clause management -------------------------------------------------

    def add_clause(self, clause: Iterable[int]) -> None:
        """Add a clause of signed DIMACS literals.

        An empty clause is accepted and makes the store permanently UNSAT.
        """
        norm = _normalize(self.num_vars, clause)
        if norm is None:
            return
        self.original.append(norm)
        if self.unsat:
            return
        self._backtrack(0)
        val = self.val
        lits = []
        for lit in norm:
            il = 2 * lit if lit > 0 else -2 * lit + 1
            if val[il] == 1:
                return
            if val[il] == 0:
                lits.append(il)
        if not lits:
            self.unsat = True
        elif len(lits) == 1:
            self._assign(lits[0], -1)
            if self._propagate() >= 0:
                self.unsat = True
        else:
            self._attach(lits)

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add_clause(c)

    def _attach(self, lits: list[int], learnt: bool = False) -> int:
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)
        if learnt:
            self.learnt_ids.append(ci)
            self.clause_act[ci] = self.cla_inc
        return ci

    # -- assignment ----------------------------------------------------------

    def _assign(self, lit: int, reason: int) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        lim = self.trail_lim[lvl]
        val, reason, phase, act, heap = self.val, self.reason, self.phase, self.activity, self.heap
        trail = self.trail
        for k in range(len(trail) - 1, lim - 1, -1):
            lit = trail[k]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = -1
            phase[v] = not (lit & 1)
            heapq.heappush(heap, (-act[v], v))
        del trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = lim
        if len(heap) > 8 * self.num_vars + 1024:
            self._rebuild_heap()

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        clauses, watches, val = self.clauses, self.watches, self.val
        trail, level, reason = self.trail, self.level, self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        props = 0
        while qhead < len(trail):
            fl = trail[qhead] ^ 1
            qhead += 1
            ws = watches[fl]
            if not ws:
                continue
            props += 1
            keep = []
            n_ws = len(ws)
            i = 0
            while i < n_ws:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c is None:
                    continue
                if c[0] == fl:
                    c[0] = c[1]
                    c[1] = fl
                first = c[0]
                if val[first] == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = fl
                        watches[lk].append(ci)
                        break
                else:
                    keep.append(ci)
                    if val[first] == -1:
                        keep.extend(ws[i:])
                        watches[fl] = keep
                        self.qhead = len(trail)
                        self.stats["propagations"] += props
                        return ci
                    val[first] = 1
                    val[first ^ 1] = -1
                    v = first >> 1
                    level[v] = dl
                    reason[v] = ci
                    trail.append(first)
            watches[fl] = keep
        self.qhead = qhead
        self.stats["propagations"] += props
        return -1

    # -- learning ------------------------------------------------------------

    def _bump_var(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _bump_clause(self, ci: int) -> None:
        ca = self.clause_act
        ca[ci] += self.cla_inc
        if ca[ci] > 1e20:
            for k in ca:
                ca[k] *= 1e-20
            self.cla_inc *= 1e-20

    def _rebuild_heap(self) -> None:
        act, val = self.activity, self.val
        self.heap = [(-act[v], v) for v in range(1, self.num_vars + 1) if val[2 * v] == 0]
        heapq.heapify(self.heap)

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        clauses, level, reason, seen, trail = self.clauses, self.level, self.reason, self.seen, self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        while True:
            c = clauses[confl]
            if confl in self.clause_act:
                self._bump_clause(confl)
            for q in (c if p < 0 else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump_var(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # drop literals implied by the rest of the clause
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r < 0:
                kept.append(q)
                continue
            for w in clauses[r][1:]:
                u = w >> 1
                if not seen[u] and level[u] > 0:
                    kept.append(q)
                    break
        for q in learnt[1:]:
            seen[q >> 1] = False

        if len(kept) == 1:
            return kept, 0
        best = 1
        for k in range(2, len(kept)):
            if level[kept[k] >> 1] > level[kept[best] >> 1]:
                best = k
        kept[1], kept[best] = kept[best], kept[1]
        return kept, level[kept[1] >> 1]

    def _reduce_db(self) -> None:
        clauses, reason, val, ca = self.clauses, self.reason, self.val, self.clause_act
        ids = sorted(self.learnt_ids, key=lambda ci: ca[ci])
        half = len(ids) // 2
        survivors = []
        for rank, ci in enumerate(ids):
            c = clauses[ci]
            locked = reason[c[0] >> 1] == ci and val[c[0]] == 1
            if rank < half and len(c) > 2 and not locked:
                clauses[ci] = None
                del ca[ci]
            else:
                survivors.append(ci)
        survivors.sort()
        self.learnt_ids = survivors
        self.max_learnts = int(self.max_learnts * 1.1)

    def _pick_branch(self) -> int:
        heap, val, act = self.heap, self.val, self.activity
        while heap:
            neg_a, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -neg_a == act[v]:
                return v
        for v in range(1, self.num_vars + 1):
            if val[2 * v] == 0:
                return v
        return 0

    # -- solving -------------------------------------------------------------

    def solve(self, deadline: Optional[float] = None) -> SolveResult:
        """Decide the current clause set.

        ``deadline`` is an absolute :func:`time.monotonic` value; when it
        passes, the result is UNKNOWN.
        """
        self.stats["solves"] += 1
        if self.unsat:
            return SolveResult(UNSAT)
        self._backtrack(0)
        if self._propagate() >= 0:
            self.unsat = True
            return SolveResult(UNSAT)

        budget = luby(self.restarts) * _RESTART_BASE
        conflicts = 0
        while True:
            confl = self._propagate()
            if confl >= 0:
                self.stats["conflicts"] += 1
                conflicts += 1
                if not self.trail_lim:
                    self.unsat = True
                    return SolveResult(UNSAT)
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._assign(learnt[0], -1)
                else:
                    ci = self._attach(learnt, learnt=True)
                    self._assign(learnt[0], ci)
                self.var_inc /= _VAR_DECAY
                self.cla_inc /= _CLAUSE_DECAY
                if deadline is not None and conflicts % 128 == 0 and time.monotonic() > deadline:
                    self._backtrack(0)
                    return SolveResult(UNKNOWN)
                continue

            if conflicts >= budget:
                self.restarts += 1
                budget = conflicts + luby(self.restarts) * _RESTART_BASE
                self._backtrack(0)
                continue
            if len(self.learnt_ids) - len(self.trail) >= self.max_learnts:
                self._reduce_db()

            v = self._pick_branch()
            if v == 0:
                model = tuple(self.val[2 * u] == 1 for u in range(1, self.num_vars + 1))
                self._backtrack(0)
                if self.verify and not check_model(self.original, model):
                    raise SolverError("CDCL produced a model that violates a clause")
                return SolveResult(SAT, model)
            self.stats["decisions"] += 1
            self.trail_lim.append(len(self.trail))
            self._assign(2 * v if self.phase[v] else 2 * v + 1, -1)


class BacktrackingStore:
    """Chronological DPLL with unit propagation; small instances only."""

    def __init__(self, num_vars: int, seed: int = DEFAULT_SEED, verify: bool = True):
        if num_vars < 1:
            raise SolverError("a clause store needs at least one variable")
        self.num_vars = num_vars
        self.seed = seed
        self.verify = verify
        self.original: list[tuple[int, ...]] = []

    def add_clause(self, clause: Iterable[int]) -> None:
        norm = _normalize(self.num_vars, clause)
        if norm is not None:
            self.original.append(norm)

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add_clause(c)

    def solve(self, deadline: Optional[float] = None) -> SolveResult:
        assign: dict[int, bool] = {}
        model = self._dpll(assign, deadline)
        if model is None:
            return SolveResult(UNSAT)
        if model == "timeout":
            return SolveResult(UNKNOWN)
        full = tuple(model.get(v, False) for v in range(1, self.num_vars + 1))
        if self.verify and not check_model(self.original, full):
            raise SolverError("backtracking engine produced an invalid model")
        return SolveResult(SAT, full)

    def _dpll(self, assign, deadline):
        if deadline is not None and time.monotonic() > deadline:
            return "timeout"
        assign = dict(assign)
        while True:
            unit = None
            for clause in self.original:
                open_lits = []
                satisfied = False
                for lit in clause:
                    v = abs(lit)
                    if v in assign:
                        if assign[v] == (lit > 0):
                            satisfied = True
                            break
                    else:
                        open_lits.append(lit)
                if satisfied:
                    continue
                if not open_lits:
                    return None
                if len(open_lits) == 1:
                    unit = open_lits[0]
                    break
            if unit is None:
                break
            assign[abs(unit)] = unit > 0
        for v in range(1, self.num_vars + 1):
            if v not in assign:
                for value in (False, True):
                    assign[v] = value
                    found = self._dpll(assign, deadline)
                    if found is not None:
                        return found
                return None
        return assign


class ExternalStore:
    """Delegates each solve to an external DIMACS solver.

    ``command`` is an argv list; the DIMACS file path is appended. The
    solver must print ``s SATISFIABLE`` / ``s UNSATISFIABLE`` and ``v`` lines.
    """

    def __init__(self, num_vars: int, command: Sequence[str], seed: int = DEFAULT_SEED):
        self.num_vars = num_vars
        self.command = list(command)
        self.seed = seed
        self.original: list[tuple[int, ...]] = []

    def add_clause(self, clause: Iterable[int]) -> None:
        norm = _normalize(self.num_vars, clause)
        if norm is not None:
            self.original.append(norm)

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add_clause(c)

    def solve(self, deadline: Optional[float] = None) -> SolveResult:
        timeout = None if deadline is None else max(0.0, deadline - time.monotonic())
        fd, path = tempfile.mkstemp(suffix=".cnf")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(f"p cnf {self.num_vars} {len(self.original)}\n")
                for c in self.original:
                    fh.write(" ".join(map(str, c)) + " 0\n")
            try:
                proc = subprocess.run(self.command + [path], capture_output=True, text=True, timeout=timeout)
            except subprocess.TimeoutExpired:
                return SolveResult(UNKNOWN)
        finally:
            os.unlink(path)
        return parse_solver_output(proc.stdout, self.num_vars, self.original)


def parse_solver_output(text: str, num_vars: int, clauses: Sequence[Sequence[int]] = ()) -> SolveResult:
    status = None
    values: dict[int, bool] = {}
    for line in text.splitlines():
        if line.startswith("s "):
            word = line[2:].strip().upper()
            status = SAT if word == "SATISFIABLE" else UNSAT if word == "UNSATISFIABLE" else UNKNOWN
        elif line.startswith("v "):
            for tok in line[2:].split():
                lit = int(tok)
                if lit:
                    values[abs(lit)] = lit > 0
    if status != SAT:
        return SolveResult(status or UNKNOWN)
    model = tuple(values.get(v, False) for v in range(1, num_vars + 1))
    if clauses and not check_model(clauses, model):
        raise SolverError("external solver returned an invalid model")
    return SolveResult(SAT, model)


def format_model(result: SolveResult) -> str:
    """DIMACS-solver style output: an ``s`` line and, when SAT, a ``v`` line."""
    if result.status == SAT:
        return "s SATISFIABLE\nv " + " ".join(map(str, result.literals())) + " 0\n"
    if result.status == UNSAT:
        return "s UNSATISFIABLE\n"
    return "s UNKNOWN\n"


ENGINES = {"cdcl": ClauseStore, "backtracking": BacktrackingStore}


def new_store(num_vars: int, seed: int = DEFAULT_SEED, engine: str = "cdcl", verify: bool = True):
    try:
        cls = ENGINES[engine]
    except KeyError:
        raise SolverError(f"unknown engine {engine!r}; choose from {sorted(ENGINES)}") from None
    return cls(num_vars, seed=seed, verify=verify)
