"""Propositional and ILP models of the aperiodic tiling complement problem.

Variables: ``x_i`` (i in B) for i in 0..n-1, then for every maximal divisor
d of n and every residue i in 0..d-1 a triple ``y_{d,i}`` (chain all ones),
``z_{d,i}`` (chain all zeros), ``u_{d,i}`` (chain constant). The chain of
(d, i) is x_i, x_{i+d}, ..., x_{i+(n/d-1)d}.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

from .rhythm import DivisorSet, Rhythm, canonicalize, maximal_divisors


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class CirculantSpec:
    """Circulant 0/1 matrix whose column j is the characteristic vector of A shifted down by j."""

    n: int
    first_column: tuple[int, ...]

    @classmethod
    def of(cls, A: Rhythm) -> "CirculantSpec":
        return cls(A.modulus, tuple(A.indicator()))

    def entry(self, i: int, j: int) -> int:
        return self.first_column[(i - j) % self.n]

    def matrix(self) -> list[list[int]]:
        return [[self.entry(i, j) for j in range(self.n)] for i in range(self.n)]

    def row_support(self, i: int) -> list[int]:
        """Columns j with T[i][j] = 1, i.e. offsets b covering instant i."""
        return [j for j in range(self.n) if self.entry(i, j)]


@dataclass(frozen=True)
class VarMap:
    n: int
    divisors: tuple[int, ...] = ()

    @property
    def aperiodic(self) -> bool:
        return bool(self.divisors)

    @property
    def num_vars(self) -> int:
        return self.n + 3 * sum(self.divisors)

    def x(self, i: int) -> int:
        return i % self.n + 1

    def _aux_base(self, d: int) -> int:
        base = self.n
        for e in self.divisors:
            if e == d:
                return base
            base += 3 * e
        raise EncodingError(f"{d} is not an encoded divisor (have {self.divisors})")

    def y(self, d: int, i: int) -> int:
        return self._aux_base(d) + 3 * i + 1

    def z(self, d: int, i: int) -> int:
        return self._aux_base(d) + 3 * i + 2

    def u(self, d: int, i: int) -> int:
        return self._aux_base(d) + 3 * i + 3

    def names(self) -> dict[int, str]:
        """Identifier -> symbolic name, e.g. ``{1: 'x 0', 10: 'y 3 0'}``."""
        out = {self.x(i): f"x {i}" for i in range(self.n)}
        for d in self.divisors:
            for i in range(d):
                out[self.y(d, i)] = f"y {d} {i}"
                out[self.z(d, i)] = f"z {d} {i}"
                out[self.u(d, i)] = f"u {d} {i}"
        return out


@dataclass
class CnfInstance:
    var_map: VarMap
    clauses: list[tuple[int, ...]]
    rhythm: Optional[Rhythm] = None
    aperiodic: bool = False
    comments: list[str] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return self.var_map.num_vars

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def validate(self) -> None:
        top = self.num_vars
        for c in self.clauses:
            if not c:
                raise EncodingError("empty clause")
            lits = set(c)
            for lit in c:
                if lit == 0 or abs(lit) > top:
                    raise EncodingError(f"literal {lit} not declared (num_vars={top})")
                if -lit in lits:
                    raise EncodingError(f"tautological clause {c}")

    def decode(self, model) -> Rhythm:
        """Rhythm B read off the x-variables of a model (sequence of bools, index v-1)."""
        n = self.var_map.n
        return Rhythm(n, tuple(i for i in range(n) if model[self.var_map.x(i) - 1]))


def _prepared(A: Rhythm) -> Rhythm:
    if not A.elements:
        raise EncodingError("cannot encode the empty rhythm")
    return canonicalize(A)


def chain(n: int, d: int, i: int) -> list[int]:
    return [i + k * d for k in range(n // d)]


def tiling_clauses(A: Rhythm, vm: Optional[VarMap] = None) -> CnfInstance:
    """Exactly-one x_{(i - a) mod n} over a in A, for every instant i."""
    A = _prepared(A)
    n = A.modulus
    if vm is None:
        vm = VarMap(n)
    clauses: list[tuple[int, ...]] = []
    for i in range(n):
        lits = [vm.x((n - (j - i)) % n) for j in A.elements]
        clauses.append(tuple(lits))
        for k, l in itertools.combinations(lits, 2):
            clauses.append((-k, -l))
    return CnfInstance(vm, clauses, rhythm=A, aperiodic=False)


def aperiodicity_clauses(n: int, D: DivisorSet, vm: VarMap) -> list[tuple[int, ...]]:
    """Tseitin clauses forcing some residue chain per maximal divisor to be non-constant."""
    clauses: list[tuple[int, ...]] = []
    for d in D.maximal_divisors:
        for i in range(d):
            xs = [vm.x(k) for k in chain(n, d, i)]
            y, z, u = vm.y(d, i), vm.z(d, i), vm.u(d, i)
            # y <-> all of xs
            clauses.extend((-y, x) for x in xs)
            clauses.append((y, *(-x for x in xs)))
            # z <-> none of xs
            clauses.extend((-z, -x) for x in xs)
            clauses.append((z, *xs))
            # u <-> (y or z)
            clauses.append((-u, y, z))
            clauses.append((u, -y))
            clauses.append((u, -z))
        clauses.append(tuple(-vm.u(d, l) for l in range(d)))
    return clauses


def encode(A: Rhythm, aperiodic: bool = True) -> CnfInstance:
    A = _prepared(A)
    n = A.modulus
    D = maximal_divisors(n) if aperiodic and n >= 2 else None
    vm = VarMap(n, D.maximal_divisors if D else ())
    inst = tiling_clauses(A, vm)
    if D:
        inst.clauses.extend(aperiodicity_clauses(n, D, vm))
    inst.aperiodic = bool(D)
    return inst


def blocking_clause(vm: VarMap, B: Iterable[int]) -> tuple[int, ...]:
    """Clause excluding every model whose x-support contains B."""
    return tuple(-vm.x(b) for b in B)


# -- DIMACS ------------------------------------------------------------------

def export_dimacs(inst: CnfInstance, sink: TextIO) -> None:
    vm = inst.var_map
    if inst.rhythm is not None:
        sink.write(f"c rhythm n={inst.rhythm.modulus} A={inst.rhythm}\n")
    sink.write(f"c aperiodic {int(inst.aperiodic)}\n")
    if vm.divisors:
        sink.write("c divisors " + " ".join(map(str, vm.divisors)) + "\n")
    for i in range(vm.n):
        sink.write(f"c x {i} -> {vm.x(i)}\n")
    for d in vm.divisors:
        for i in range(d):
            sink.write(f"c y {d} {i} -> {vm.y(d, i)}\n")
            sink.write(f"c z {d} {i} -> {vm.z(d, i)}\n")
            sink.write(f"c u {d} {i} -> {vm.u(d, i)}\n")
    sink.write(f"p cnf {inst.num_vars} {inst.num_clauses}\n")
    for c in inst.clauses:
        sink.write(" ".join(map(str, c)) + " 0\n")


def dimacs_text(inst: CnfInstance) -> str:
    import io

    buf = io.StringIO()
    export_dimacs(inst, buf)
    return buf.getvalue()


def import_dimacs(source: TextIO) -> CnfInstance:
    """Read a DIMACS CNF file; our own comment lines restore the variable map."""
    n = None
    A = None
    aperiodic = False
    divisors: tuple[int, ...] = ()
    num_vars = num_clauses = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    x_count = 0
    for raw in source:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) >= 4 and parts[1] == "rhythm":
                n = int(parts[2].split("=", 1)[1])
                A = Rhythm.parse(n, parts[3].split("=", 1)[1])
            elif len(parts) == 3 and parts[1] == "aperiodic":
                aperiodic = parts[2] == "1"
            elif len(parts) >= 2 and parts[1] == "divisors":
                divisors = tuple(int(p) for p in parts[2:])
            elif len(parts) == 5 and parts[1] == "x" and parts[3] == "->":
                x_count += 1
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise EncodingError(f"bad problem line: {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        clauses.append(tuple(pending))
    if num_vars is None:
        raise EncodingError("missing 'p cnf' header")
    if num_clauses != len(clauses):
        raise EncodingError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    if n is None:
        n = x_count or num_vars
    vm = VarMap(n, divisors)
    if vm.num_vars != num_vars:
        # foreign file without our variable map: treat every variable as an x
        vm = VarMap(num_vars)
    inst = CnfInstance(vm, clauses, rhythm=A, aperiodic=aperiodic)
    inst.validate()
    return inst


# -- LP format -----------------------------------------------------------------

def _lp_terms(terms: list[tuple[int, str]]) -> str:
    out = []
    for coef, name in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{mag} {name}"
        out.append(f"{sign} {body}")
    text = " ".join(out)
    return text[2:] if text.startswith("+ ") else text


def lp_rows(A: Rhythm) -> list[tuple[str, list[tuple[int, str]], str, int]]:
    """Rows of the ILP model as (name, terms, sense, rhs)."""
    A = _prepared(A)
    n = A.modulus
    T = CirculantSpec.of(A)
    rows = []
    for j in range(n):
        rows.append((f"t_{j}", [(1, f"x_{b}") for b in T.row_support(j)], "=", 1))
    if n < 2:
        return rows
    for d in maximal_divisors(n).maximal_divisors:
        m = n // d
        for i in range(d):
            xs = chain(n, d, i)
            ones = [(1, f"x_{k}") for k in xs]
            rows.append((f"yb_{d}_{i}_lo", ones + [(-m, f"y_{d}_{i}")], ">=", 0))
            rows.append((f"yb_{d}_{i}_hi", ones + [(-m, f"y_{d}_{i}")], "<=", m - 1))
            # sum(1 - x_k) - m z  in [0, m-1], constants moved to the right
            neg = [(-1, f"x_{k}") for k in xs]
            rows.append((f"zb_{d}_{i}_lo", neg + [(-m, f"z_{d}_{i}")], ">=", -m))
            rows.append((f"zb_{d}_{i}_hi", neg + [(-m, f"z_{d}_{i}")], "<=", -1))
        for i in range(d):
            rows.append((f"u_{d}_{i}", [(1, f"y_{d}_{i}"), (1, f"z_{d}_{i}"), (-1, f"u_{d}_{i}")], "=", 0))
        rows.append((f"ap_{d}", [(1, f"u_{d}_{i}") for i in range(d)], "<=", d - 1))
    return rows


def lp_variables(n: int) -> list[str]:
    names = [f"x_{i}" for i in range(n)]
    if n >= 2:
        for d in maximal_divisors(n).maximal_divisors:
            for i in range(d):
                names += [f"y_{d}_{i}", f"z_{d}_{i}", f"u_{d}_{i}"]
    return names


def export_lp(A: Rhythm, sink: TextIO) -> None:
    """CPLEX LP file: constant objective, tiling rows, band rows, all binary."""
    A = _prepared(A)
    n = A.modulus
    sink.write(f"\\ aperiodic tiling complements of A={A} in Z_{n}\n")
    sink.write("Minimize\n obj: 0 x_0\n")
    sink.write("Subject To\n")
    for name, terms, sense, rhs in lp_rows(A):
        sink.write(f" {name}: {_lp_terms(terms)} {sense} {rhs}\n")
    sink.write("Binary\n")
    for name in lp_variables(n):
        sink.write(f" {name}\n")
    sink.write("End\n")


def row_counts(A: Rhythm) -> dict[str, int]:
    """Number of LP rows per family (a band counts once for its two sides)."""
    counts = {"tiling": 0, "y_band": 0, "z_band": 0, "link": 0, "aperiodic": 0}
    for name, *_ in lp_rows(A):
        if name.startswith("t_"):
            counts["tiling"] += 1
        elif name.startswith("yb_") and name.endswith("_lo"):
            counts["y_band"] += 1
        elif name.startswith("zb_") and name.endswith("_lo"):
            counts["z_band"] += 1
        elif name.startswith("u_"):
            counts["link"] += 1
        elif name.startswith("ap_"):
            counts["aperiodic"] += 1
    return counts

