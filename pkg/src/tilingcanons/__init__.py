"""Aperiodic tiling complements of rhythms in Z_n via a SAT encoding."""
from .rhythm import (
    DivisorSet,
    Polynomial01,
    Rhythm,
    RhythmError,
    canonicalize,
    is_periodic_fast,
    is_tiling,
    maximal_divisors,
    poly_tiling_check,
    smallest_period,
    translate,
)
from .vuza import VuzaParams, construct_inner, validate
from .encoding import CnfInstance, VarMap, encode, export_dimacs, export_lp, import_dimacs
from .sat import ClauseStore, SolveResult, new_store
from .enumerate import (
    EnumerationReport,
    cross_validate,
    enumerate_fill_out,
    enumerate_oracle,
    enumerate_sat,
)

__version__ = "0.1.0"
