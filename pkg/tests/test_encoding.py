import io
import itertools

import pytest

from conftest import CORPUS, CORPUS_IDS, brute_complements, brute_period
from tilingcanons.encoding import (
    CirculantSpec,
    CnfInstance,
    EncodingError,
    VarMap,
    aperiodicity_clauses,
    dimacs_text,
    encode,
    export_dimacs,
    export_lp,
    import_dimacs,
    lp_rows,
    row_counts,
    tiling_clauses,
)
from tilingcanons.enumerate import enumerate_oracle
from tilingcanons.rhythm import Rhythm, canonicalize, maximal_divisors, translate
from tilingcanons.sat import SAT, UNSAT, new_store


def R(n, *e):
    return Rhythm.of(n, e)


def all_x_models(inst):
    """Every x-projection of the instance's models (blocking on x only)."""
    s = new_store(inst.num_vars)
    s.add_clauses(inst.clauses)
    n = inst.var_map.n
    found = set()
    while True:
        res = s.solve()
        if res.status == UNSAT:
            return found
        B = inst.decode(res.model)
        assert B.elements not in found
        found.add(B.elements)
        s.add_clause([-inst.var_map.x(i) if i in B else inst.var_map.x(i) for i in range(n)])


def raw_complements(A):
    """All complements B of A (every translate), via the exact-cover oracle."""
    rep = enumerate_oracle(A, aperiodic=False)
    out = set()
    for C in rep.classes:
        for t in range(A.modulus):
            out.add(translate(C, t).elements)
    assert len(out) == rep.raw_solution_count
    return out


class TestCirculant:
    def test_columns_are_shifts(self):
        T = CirculantSpec.of(R(9, 0, 1, 5))
        M = T.matrix()
        a = [M[i][0] for i in range(9)]
        assert a == [1, 1, 0, 0, 0, 1, 0, 0, 0]
        for j in range(9):
            assert [M[i][j] for i in range(9)] == [a[(i - j) % 9] for i in range(9)]

    def test_row_support_matches_clause(self):
        A = R(9, 0, 1, 5)
        T = CirculantSpec.of(A)
        inst = tiling_clauses(A)
        alo = [c for c in inst.clauses if all(l > 0 for l in c)]
        for i in range(9):
            assert sorted(v - 1 for v in alo[i]) == T.row_support(i)


class TestTilingClauses:
    def test_count_n9(self):
        inst = tiling_clauses(R(9, 0, 1, 5))
        assert inst.num_vars == 9
        assert inst.num_clauses == 9 * (1 + 3)
        assert inst.num_clauses == 36

    def test_unit_instance(self):
        inst = tiling_clauses(R(1, 0))
        assert inst.clauses == [(1,)]
        assert all_x_models(inst) == {(0,)}

    def test_models_n9(self):
        assert all_x_models(tiling_clauses(R(9, 0, 1, 5))) == {(0, 3, 6), (1, 4, 7), (2, 5, 8)}

    def test_models_match_brute_force_small(self):
        for n, A in CORPUS:
            if n > 16:
                continue
            inst = tiling_clauses(Rhythm(n, A))
            assert all_x_models(inst) == brute_complements(canonicalize(Rhythm(n, A)))

    @pytest.mark.parametrize("n, A", CORPUS, ids=CORPUS_IDS)
    def test_clause_count_and_models(self, n, A):
        rhythm = Rhythm(n, A)
        inst = tiling_clauses(rhythm)
        k = len(A)
        assert inst.num_clauses == n * (1 + k * (k - 1) // 2)
        inst.validate()
        models = all_x_models(inst)
        assert models == raw_complements(canonicalize(rhythm))
        assert all(len(B) == n // k for B in models)

    def test_empty_rejected(self):
        with pytest.raises(EncodingError):
            tiling_clauses(Rhythm(4, ()))

    def test_non_canonical_input_is_canonicalized(self):
        inst = tiling_clauses(R(9, 1, 2, 6))
        assert inst.rhythm == R(9, 0, 1, 5)


class TestAperiodicityClauses:
    def test_n9_counts(self):
        D = maximal_divisors(9)
        vm = VarMap(9, D.maximal_divisors)
        clauses = aperiodicity_clauses(9, D, vm)
        assert vm.num_vars == 9 + 9
        # per residue: (m + 1) for y, (m + 1) for z, 3 for u, with m = n/d = 3
        assert len(clauses) == 3 * (2 * (3 + 1) + 3) + 1
        assert sum(1 for c in clauses if len(c) == 3 and all(vm.u(3, i) in map(abs, c) for i in range(3))) == 1

    def test_period_two_excluded_n4(self):
        inst = encode(R(4, 0, 1), aperiodic=True)
        vm = inst.var_map
        s = new_store(inst.num_vars)
        s.add_clauses(inst.clauses)
        for i, bit in enumerate((1, 0, 1, 0)):
            s.add_clause([vm.x(i) if bit else -vm.x(i)])
        assert s.solve().status == UNSAT

    def test_n9_full_unsat(self):
        inst = encode(R(9, 0, 1, 5), aperiodic=True)
        s = new_store(inst.num_vars)
        s.add_clauses(inst.clauses)
        assert s.solve().status == UNSAT

    @pytest.mark.parametrize("n, A", CORPUS, ids=CORPUS_IDS)
    def test_removes_exactly_periodic_models(self, n, A):
        rhythm = Rhythm(n, A)
        full = encode(rhythm, aperiodic=True)
        vm = full.var_map
        for B in raw_complements(canonicalize(rhythm)):
            s = new_store(full.num_vars)
            s.add_clauses(full.clauses)
            members = set(B)
            for i in range(n):
                s.add_clause([vm.x(i) if i in members else -vm.x(i)])
            res = s.solve()
            periodic = brute_period(B, n) is not None
            assert (res.status == UNSAT) == periodic, B
            if res.status == SAT:
                for d in vm.divisors:
                    for i in range(d):
                        chain_vals = {k in members for k in range(i, n, d)}
                        assert res.value(vm.u(d, i)) == (len(chain_vals) == 1)
                        assert res.value(vm.y(d, i)) == (chain_vals == {True})
                        assert res.value(vm.z(d, i)) == (chain_vals == {False})


class TestEncode:
    @pytest.mark.parametrize("n, A", CORPUS, ids=CORPUS_IDS)
    def test_variable_count(self, n, A):
        inst = encode(Rhythm(n, A), aperiodic=True)
        divs = maximal_divisors(n).maximal_divisors if n >= 2 else ()
        assert inst.num_vars == n + 3 * sum(divs)
        assert encode(Rhythm(n, A), aperiodic=False).num_vars == n
        inst.validate()

    def test_n72_variable_count(self):
        inst = encode(R(72, 0, 8, 16, 18, 26, 34), aperiodic=True)
        assert inst.num_vars == 72 + 3 * (24 + 36) == 252

    def test_variable_order(self):
        vm = encode(R(9, 0, 1, 5)).var_map
        assert [vm.x(i) for i in range(9)] == list(range(1, 10))
        assert [(vm.y(3, i), vm.z(3, i), vm.u(3, i)) for i in range(3)] == [(10, 11, 12), (13, 14, 15), (16, 17, 18)]
        vm = VarMap(72, (24, 36))
        assert vm.y(36, 0) == 72 + 3 * 24 + 1
        assert vm.names()[vm.u(24, 5)] == "u 24 5"

    def test_concatenation(self):
        A = R(9, 0, 1, 5)
        full = encode(A, aperiodic=True)
        tiling = encode(A, aperiodic=False)
        assert full.clauses[: tiling.num_clauses] == tiling.clauses

    def test_validate_catches_problems(self):
        vm = VarMap(2)
        with pytest.raises(EncodingError):
            CnfInstance(vm, [()]).validate()
        with pytest.raises(EncodingError):
            CnfInstance(vm, [(1, -1)]).validate()
        with pytest.raises(EncodingError):
            CnfInstance(vm, [(3,)]).validate()


class TestDimacs:
    def test_unit_instance(self):
        text = dimacs_text(encode(R(1, 0), aperiodic=True))
        body = [l for l in text.splitlines() if not l.startswith("c")]
        assert body == ["p cnf 1 1", "1 0"]

    def test_header_n9(self):
        text = dimacs_text(encode(R(9, 0, 1, 5), aperiodic=False))
        assert "p cnf 9 36" in text.splitlines()
        assert "c x 0 -> 1" in text

    def test_aux_comments(self):
        text = dimacs_text(encode(R(9, 0, 1, 5), aperiodic=True))
        assert "c u 3 2 -> 18" in text.splitlines()
        assert "p cnf 18 70" in text.splitlines()

    @pytest.mark.parametrize("n, A", CORPUS, ids=CORPUS_IDS)
    @pytest.mark.parametrize("aperiodic", [True, False])
    def test_round_trip(self, n, A, aperiodic):
        inst = encode(Rhythm(n, A), aperiodic=aperiodic)
        text = dimacs_text(inst)
        back = import_dimacs(io.StringIO(text))
        assert back == inst
        assert dimacs_text(back) == text

    def test_foreign_file(self):
        back = import_dimacs(io.StringIO("c hello\np cnf 3 2\n1 -2 0\n2 3 0\n"))
        assert back.num_vars == 3 and back.clauses == [(1, -2), (2, 3)]

    def test_bad_files(self):
        with pytest.raises(EncodingError):
            import_dimacs(io.StringIO("1 2 0\n"))
        with pytest.raises(EncodingError):
            import_dimacs(io.StringIO("p cnf 2 2\n1 2 0\n"))
        with pytest.raises(EncodingError):
            import_dimacs(io.StringIO("p cnf 2 1\n1 3 0\n"))


class TestLp:
    def test_row_counts_n9(self):
        assert row_counts(R(9, 0, 1, 5)) == {"tiling": 9, "y_band": 3, "z_band": 3, "link": 3, "aperiodic": 1}

    @pytest.mark.parametrize("n, A", CORPUS, ids=CORPUS_IDS)
    def test_variable_counts(self, n, A):
        buf = io.StringIO()
        export_lp(Rhythm(n, A), buf)
        text = buf.getvalue()
        binaries = text.split("Binary\n")[1].split("End")[0].split()
        divs = maximal_divisors(n).maximal_divisors if n >= 2 else ()
        assert sum(1 for v in binaries if v.startswith("x_")) == n
        assert sum(1 for v in binaries if not v.startswith("x_")) == 3 * sum(divs)

    def test_rows_are_feasible_exactly_for_aperiodic_complements(self):
        # evaluate every LP row on every 0/1 assignment of x for n = 4, A = {0,1}
        A = R(4, 0, 1)
        rows = lp_rows(A)
        for bits in itertools.product((0, 1), repeat=4):
            x = {f"x_{i}": b for i, b in enumerate(bits)}
            feasible = False
            aux_names = [f"{k}_2_{i}" for i in range(2) for k in "yzu"]
            for aux in itertools.product((0, 1), repeat=len(aux_names)):
                env = dict(x, **dict(zip(aux_names, aux)))
                ok = True
                for _, terms, sense, rhs in rows:
                    lhs = sum(c * env[v] for c, v in terms)
                    ok &= {"=": lhs == rhs, "<=": lhs <= rhs, ">=": lhs >= rhs}[sense]
                if ok:
                    feasible = True
                    break
            B = tuple(i for i in range(4) if bits[i])
            expected = B in brute_complements(A) and brute_period(B, 4) is None
            assert feasible == expected, B


highspy = pytest.importorskip("highspy")


def _highs_read(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    status = h.readModel(str(path))
    return h, status


@pytest.mark.parametrize("n, A", [(9, (0, 1, 5)), (4, (0, 2)), (72, (0, 8, 16, 18, 26, 34))])
def test_lp_loads_in_highs(tmp_path, n, A):
    path = tmp_path / "model.lp"
    with open(path, "w") as fh:
        export_lp(Rhythm(n, A), fh)
    h, status = _highs_read(path)
    assert status == highspy.HighsStatus.kOk
    lp = h.getLp()
    divs = maximal_divisors(n).maximal_divisors
    assert lp.num_col_ == n + 3 * sum(divs)
    counts = row_counts(Rhythm(n, A))
    assert lp.num_row_ == counts["tiling"] + 2 * counts["y_band"] + 2 * counts["z_band"] + counts["link"] + counts["aperiodic"]


def test_lp_solution_is_aperiodic_complement(tmp_path):
    # n=4, A={0,2}: the only aperiodic complements are {0,1} and its translates
    path = tmp_path / "model.lp"
    with open(path, "w") as fh:
        export_lp(R(4, 0, 2), fh)
    h, _ = _highs_read(path)
    h.run()
    assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal
    values = dict(zip(h.getLp().col_names_, h.getSolution().col_value))
    B = tuple(i for i in range(4) if values[f"x_{i}"] > 0.5)
    assert brute_period(B, 4) is None
    assert B in brute_complements(R(4, 0, 2))
