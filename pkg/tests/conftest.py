import itertools

import pytest

from tilingcanons.rhythm import Rhythm

# (n, A) pairs with at least one tiling complement, n <= 36
CORPUS = [
    (9, (0, 1, 5)),
    (4, (0, 2)),
    (12, (0, 1, 6, 7)),
    (12, (0, 2, 4)),
    (6, (0, 1)),
    (8, (0, 3)),
    (10, (0, 5)),
    (12, (0, 6)),
    (12, (0, 7, 11)),
    (12, (0, 2, 5, 11)),
    (14, (0, 7)),
    (15, (0, 2, 11, 13, 14)),
    (16, (0, 8)),
    (16, (0, 4, 5, 9)),
    (18, (0, 4, 5)),
    (18, (0, 10, 17)),
    (20, (0, 9)),
    (20, (0, 14)),
    (20, (0, 1, 10, 11)),
    (24, (0, 11)),
    (24, (0, 10)),
    (24, (0, 20)),
    (24, (0, 4, 8)),
    (24, (0, 1, 12, 13)),
    (27, (0, 7, 23)),
    (28, (0, 13, 15, 22)),
    (30, (0, 14, 16)),
    (30, (0, 2, 9, 11, 16, 25)),
    (32, (0, 12, 19, 31)),
    (36, (0, 17, 34)),
    (36, (0, 1, 35)),
    (36, (0, 1, 2, 3)),
    (5, (0, 1, 2, 3, 4)),
    (1, (0,)),
]

CORPUS_IDS = [f"n{n}-" + "_".join(map(str, A)) for n, A in CORPUS]


def corpus_rhythms():
    return [Rhythm(n, A) for n, A in CORPUS]


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False,
                     help="run the optional multi-hour golden rows")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended"):
        return
    skip = pytest.mark.skip(reason="needs --extended")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def brute_complements(A: Rhythm) -> set:
    """Every B of size n/|A| with A + B = Z_n, by trying all subsets."""
    n = A.modulus
    if n % len(A):
        return set()
    k = n // len(A)
    out = set()
    for B in itertools.combinations(range(n), k):
        sums = {(a + b) % n for a in A.elements for b in B}
        if len(sums) == n:
            out.add(B)
    return out


def brute_period(elems, n):
    s = set(elems)
    for z in range(1, n):
        if {(e + z) % n for e in s} == s:
            return z
    return None


def lex_min_translate(elems, n):
    return min(tuple(sorted((e + t) % n for e in elems)) for t in range(n))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
