"""Command line front end.

    tilingcanons vuza --n 72 --p1 2 --n1 2 --p2 3 --n2 3 --n3 2
    tilingcanons enumerate --n 9 --rhythm 0,1,5 --method all
    tilingcanons encode --n 9 --rhythm 0,1,5 --no-aperiodic --out a.cnf
    tilingcanons check --n 9 --rhythm 0,1,5 --complement 0,3,6
    tilingcanons table data/table1.csv --jobs 4

Timing fields are only written with ``--timing`` so that reports are
byte-identical across runs.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from . import sat as satlib
from .encoding import encode, export_dimacs, export_lp, row_counts
from .enumerate import (
    METHODS,
    EnumerationReport,
    SearchLimitExceeded,
    reports_agree,
    enumerate_sat,
)
from .rhythm import (
    Rhythm,
    RhythmError,
    canonicalize,
    is_tiling,
    poly_tiling_check,
    smallest_period,
)
from .vuza import VuzaError, VuzaParams, construct_inner, read_instances, violations

DEFAULT_TIME_LIMIT = 600.0
SEED_ENV = "CANON_SEED"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else satlib.DEFAULT_SEED


class CliError(Exception):
    pass


# -- argument handling -----------------------------------------------------------

def _add_vuza_flags(p: argparse.ArgumentParser) -> None:
    for name in ("p1", "n1", "p2", "n2", "n3"):
        p.add_argument(f"--{name}", type=int)


def _add_rhythm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="period of the canon")
    p.add_argument("--rhythm", help="inner rhythm A, e.g. 0,1,5")
    p.add_argument("--rhythm-file", help="file holding A as text (0,1,5) or JSON {\"n\":..,\"elements\":..}")
    _add_vuza_flags(p)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--aperiodic", dest="aperiodic", action="store_true", default=True)
    p.add_argument("--no-aperiodic", dest="aperiodic", action="store_false")
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT, help="seconds per instance")
    p.add_argument("--seed", type=int, default=None, help=f"solver seed (default ${SEED_ENV} or {satlib.DEFAULT_SEED})")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings in the output")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--external-solver", help="DIMACS solver command used instead of the in-repo engine")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tilingcanons", description="Aperiodic tiling complements of rhythms in Z_n.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vuza", help="construct a Vuza inner rhythm")
    p.add_argument("--n", type=int)
    _add_vuza_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("enumerate", help="enumerate complement classes")
    _add_rhythm_flags(p)
    _add_run_flags(p)
    p.add_argument("--method", choices=("sat", "oracle", "fillout", "all"), default="sat")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = sub.add_parser("encode", help="export the CNF or LP model")
    _add_rhythm_flags(p)
    p.add_argument("--aperiodic", dest="aperiodic", action="store_true", default=True)
    p.add_argument("--no-aperiodic", dest="aperiodic", action="store_false")
    p.add_argument("--format", choices=("dimacs", "lp"), default="dimacs")
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("check", help="verify a canon (A, B)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rhythm", required=True, help="inner rhythm A")
    p.add_argument("--complement", required=True, help="outer rhythm B")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("table", help="reproduce a table of Vuza instances from CSV")
    p.add_argument("instances", help="CSV with header n,p1,n1,p2,n2,n3[,expected,extended,label]")
    _add_run_flags(p)
    p.add_argument("--method", choices=("sat", "oracle", "fillout"), default="sat")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--extended", action="store_true", help="also run rows flagged as extended")
    return parser


def _vuza_params(args) -> Optional[VuzaParams]:
    vals = [getattr(args, k) for k in ("p1", "n1", "p2", "n2", "n3")]
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        raise CliError("Vuza construction needs all of --p1 --n1 --p2 --n2 --n3")
    return VuzaParams(*vals)


def _load_rhythm_file(path: str, n: Optional[int]) -> Rhythm:
    with open(path) as fh:
        text = fh.read().strip()
    if text.startswith("{"):
        A = Rhythm.from_json(text)
        if n is not None and A.modulus != n:
            raise CliError(f"--n {n} disagrees with n={A.modulus} in {path}")
        return A
    if n is None:
        raise CliError("--n is required with a plain-text rhythm file")
    return Rhythm.parse(n, text)


def resolve_rhythm(args) -> Rhythm:
    """The single rhythm source of an enumerate/encode command."""
    params = _vuza_params(args)
    sources = [s for s in (args.rhythm, args.rhythm_file, params) if s is not None]
    if len(sources) != 1:
        raise CliError("give exactly one of --rhythm, --rhythm-file or the Vuza parameters")
    if params is not None:
        n = args.n if args.n is not None else params.product
        return construct_inner(params, n)
    if args.rhythm_file:
        return _load_rhythm_file(args.rhythm_file, args.n)
    if args.n is None:
        raise CliError("--n is required with --rhythm")
    return Rhythm.parse(args.n, args.rhythm)


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(text: str, path: Optional[str]) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


# -- commands --------------------------------------------------------------------

def cmd_vuza(args) -> int:
    params = _vuza_params(args)
    if params is None:
        raise CliError("vuza needs --p1 --n1 --p2 --n2 --n3")
    n = args.n if args.n is not None else params.product
    problems = violations(params, n)
    if problems:
        print("invalid parameters: " + "; ".join(problems), file=sys.stderr)
        return EXIT_FAIL
    A = construct_inner(params, n)
    if args.format == "json":
        print(json.dumps({"n": n, "A": list(A.elements), "cardinality": len(A)}))
    else:
        print(str(A))
        print(f"cardinality {len(A)}")
    return EXIT_OK


def _store_factory(args):
    if not args.external_solver:
        return None
    command = shlex.split(args.external_solver)
    return lambda num_vars: satlib.ExternalStore(num_vars, command)


def run_method(method: str, A: Rhythm, args, deadline: float) -> EnumerationReport:
    if method == "sat":
        seed = args.seed if args.seed is not None else default_seed()
        return enumerate_sat(A, aperiodic=args.aperiodic, seed=seed, deadline=deadline,
                             store_factory=_store_factory(args))
    return METHODS[method](A, aperiodic=args.aperiodic, deadline=deadline)


def _report_csv(reports: list[EnumerationReport], timing: bool) -> str:
    buf = io.StringIO()
    fields = ["n", "A", "method", "aperiodic", "class_count", "raw_solution_count", "solver_calls", "complete"]
    if timing:
        fields.append("elapsed_ms")
    w = csv.DictWriter(buf, fields, lineterminator="\n")
    w.writeheader()
    for r in reports:
        row = r.to_json(timing)
        row["A"] = " ".join(map(str, row["A"]))
        del row["classes"]
        w.writerow(row)
    return buf.getvalue()


def _report_text(reports: list[EnumerationReport], timing: bool) -> str:
    lines = []
    for r in reports:
        head = f"{r.method}: n={r.n} A={r.rhythm} classes={r.class_count} raw={r.raw_solution_count}"
        if r.method == "SAT":
            head += f" solver_calls={r.solver_calls}"
        if not r.complete:
            head += " INCOMPLETE"
        if timing:
            head += f" elapsed={r.elapsed:.3f}s"
        lines.append(head)
        lines.extend("  " + str(c) for c in r.classes)
    return "\n".join(lines) + "\n"


def cmd_enumerate(args) -> int:
    A = canonicalize(resolve_rhythm(args))
    deadline = time.monotonic() + args.time_limit
    methods = ["sat", "oracle", "fillout"] if args.method == "all" else [args.method]
    reports = [run_method(m, A, args, deadline) for m in methods]
    complete = all(r.complete for r in reports)
    agreement = reports_agree(*reports) if len(reports) > 1 else None

    if args.format == "json":
        if len(reports) == 1:
            payload = reports[0].to_json(args.timing)
        else:
            payload = {"agreement": agreement, "reports": [r.to_json(args.timing) for r in reports]}
        if not complete:
            payload["status"] = "incomplete"
        text = json.dumps(payload, sort_keys=False) + "\n"
    elif args.format == "csv":
        text = _report_csv(reports, args.timing)
    else:
        text = _report_text(reports, args.timing)
        if agreement is not None:
            text += f"agreement={str(agreement).lower()}\n"
    _emit(text, args.out)

    if not complete:
        print("time limit reached: report is incomplete", file=sys.stderr)
        return EXIT_FAIL
    if agreement is False:
        print("methods disagree", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_encode(args) -> int:
    A = canonicalize(resolve_rhythm(args))
    fh, close = _open_out(args.out)
    try:
        if args.format == "dimacs":
            inst = encode(A, aperiodic=args.aperiodic)
            export_dimacs(inst, fh)
            summary = f"{inst.num_vars} variables, {inst.num_clauses} clauses"
        else:
            export_lp(A, fh)
            counts = row_counts(A)
            summary = ", ".join(f"{v} {k} rows" for k, v in counts.items())
    finally:
        if close:
            fh.close()
    print(summary, file=sys.stdout if close else sys.stderr)
    return EXIT_OK


def check_canon(A: Rhythm, B: Rhythm) -> dict:
    tiles = is_tiling(A, B)
    poly = poly_tiling_check(A, B)
    zA, zB = smallest_period(A), smallest_period(B)
    return {
        "n": A.modulus,
        "A": list(A.elements),
        "B": list(B.elements),
        "tiles": tiles,
        "tiles_polynomial": poly,
        "A_period": zA,
        "B_period": zB,
        "vuza": tiles and zA is None and zB is None,
    }


def cmd_check(args) -> int:
    A = Rhythm.parse(args.n, args.rhythm)
    B = Rhythm.parse(args.n, args.complement)
    verdict = check_canon(A, B)
    if args.format == "json":
        print(json.dumps(verdict))
        return EXIT_OK

    def period(z):
        return "aperiodic" if z is None else f"periodic z={z}"

    print(f"tiles={str(verdict['tiles']).lower()} (direct sum)")
    print(f"tiles={str(verdict['tiles_polynomial']).lower()} (polynomial)")
    print(f"A {period(verdict['A_period'])}")
    print(f"B {period(verdict['B_period'])}")
    print(f"vuza={str(verdict['vuza']).lower()}")
    return EXIT_OK


TABLE_FIELDS = ["n", "p1", "n1", "p2", "n2", "n3", "size_A", "class_count", "method", "status", "expected", "match"]


def _table_row(row, method: str, aperiodic: bool, time_limit: float, seed: int) -> dict:
    out = {"n": row.n, **dict(zip(("p1", "n1", "p2", "n2", "n3"), row.params.as_tuple())),
           "size_A": "", "class_count": "", "method": method, "status": "ok",
           "expected": "" if row.expected is None else row.expected, "match": "", "elapsed_ms": ""}
    if violations(row.params, row.n):
        out["status"] = "invalid-params"
        return out
    start = time.perf_counter()
    try:
        A = construct_inner(row.params, row.n)
        out["size_A"] = len(A)
        deadline = time.monotonic() + time_limit
        if method == "sat":
            rep = enumerate_sat(A, aperiodic=aperiodic, seed=seed, deadline=deadline)
        else:
            rep = METHODS[method](A, aperiodic=aperiodic, deadline=deadline)
    except (VuzaError, SearchLimitExceeded) as exc:
        out["status"] = f"error: {exc}"
        return out
    out["class_count"] = rep.class_count
    out["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
    if not rep.complete:
        out["status"] = "incomplete"
    if row.expected is not None and rep.complete:
        out["match"] = str(rep.class_count == row.expected).lower()
    return out


def cmd_table(args) -> int:
    with open(args.instances, newline="") as fh:
        rows = [r for r in read_instances(fh) if args.extended or not r.extended]
    seed = args.seed if args.seed is not None else default_seed()
    job = (args.method, args.aperiodic, args.time_limit, seed)
    if args.jobs > 1 and len(rows) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_table_row, rows, *[[v] * len(rows) for v in job]))
    else:
        results = [_table_row(r, *job) for r in rows]

    fields = TABLE_FIELDS + (["elapsed_ms"] if args.timing else [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fields, extrasaction="ignore", lineterminator="\n")
    if rows:
        w.writeheader()
        w.writerows(results)
    _emit(buf.getvalue(), args.out)
    failed = any(r["status"] not in ("ok", "invalid-params") or r["match"] == "false" for r in results)
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {
    "vuza": cmd_vuza,
    "enumerate": cmd_enumerate,
    "encode": cmd_encode,
    "check": cmd_check,
    "table": cmd_table,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "time_limit", 1.0) <= 0:
        print("--time-limit must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (CliError, RhythmError, VuzaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
