"""Rhythms in the cyclic group Z_n.

A rhythm is a subset of {0, ..., n-1} together with its modulus. Everything
here is exact integer arithmetic; values are immutable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional


class RhythmError(ValueError):
    """Raised for malformed rhythms or incompatible operands."""


@dataclass(frozen=True, order=True)
class Rhythm:
    modulus: int
    elements: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 1:
            raise RhythmError(f"modulus must be a positive integer, got {self.modulus!r}")
        elems = tuple(self.elements)
        for a, b in zip(elems, elems[1:]):
            if a >= b:
                raise RhythmError(f"elements must be strictly increasing: {list(elems)}")
        if elems and (elems[0] < 0 or elems[-1] >= self.modulus):
            raise RhythmError(f"elements must lie in [0, {self.modulus - 1}]: {list(elems)}")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def of(cls, n: int, elements: Iterable[int]) -> "Rhythm":
        """Build from any iterable of integers; rejects duplicates and out-of-range values."""
        elems = list(elements)
        if len(set(elems)) != len(elems):
            raise RhythmError(f"duplicate elements in {elems}")
        return cls(n, tuple(sorted(elems)))

    @classmethod
    def parse(cls, n: int, text: str) -> "Rhythm":
        """Parse the comma-separated text form, e.g. ``"0,1,5"``."""
        text = text.strip()
        if not text:
            return cls(n, ())
        try:
            elems = [int(tok) for tok in text.split(",")]
        except ValueError as exc:
            raise RhythmError(f"cannot parse rhythm {text!r}") from exc
        return cls.of(n, elems)

    @classmethod
    def from_json(cls, data) -> "Rhythm":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls.of(int(data["n"]), [int(e) for e in data["elements"]])
        except (KeyError, TypeError) as exc:
            raise RhythmError(f"bad rhythm JSON: {data!r}") from exc

    def to_json(self) -> dict:
        return {"n": self.modulus, "elements": list(self.elements)}

    def __str__(self):
        return ",".join(map(str, self.elements))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, item):
        return item in self.elementset

    @property
    def elementset(self) -> frozenset[int]:
        return frozenset(self.elements)

    @property
    def mask(self) -> int:
        """Bitmask with bit i set iff i is in the rhythm."""
        return sum(1 << e for e in self.elements)

    def indicator(self) -> list[int]:
        """Characteristic 0/1 vector of length n."""
        vec = [0] * self.modulus
        for e in self.elements:
            vec[e] = 1
        return vec


@dataclass(frozen=True)
class DivisorSet:
    modulus: int
    maximal_divisors: tuple[int, ...]
    prime_factorization: tuple[tuple[int, int], ...]

    @property
    def k_n(self) -> int:
        return len(self.prime_factorization)

    def __iter__(self):
        return iter(self.maximal_divisors)


@dataclass(frozen=True)
class Polynomial01:
    modulus: int
    coefficients: tuple[int, ...]

    @classmethod
    def of(cls, rhythm: Rhythm) -> "Polynomial01":
        return cls(rhythm.modulus, tuple(rhythm.indicator()))


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, as (prime, exponent) pairs."""
    factors = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
        p += 1
    if n > 1:
        factors.append((n, 1))
    return factors


def maximal_divisors(n: int) -> DivisorSet:
    if n < 2:
        raise RhythmError(f"maximal divisors need n >= 2, got {n}")
    fac = tuple(factorize(n))
    return DivisorSet(n, tuple(sorted(n // p for p, _ in fac)), fac)


def translate(A: Rhythm, t: int) -> Rhythm:
    n = A.modulus
    return Rhythm(n, tuple(sorted((a + t) % n for a in A.elements)))


def _require_nonempty(A: Rhythm, what: str):
    if not A.elements:
        raise RhythmError(f"{what} is undefined for the empty rhythm")


def _require_same_modulus(A: Rhythm, B: Rhythm):
    if A.modulus != B.modulus:
        raise RhythmError(f"modulus mismatch: {A.modulus} vs {B.modulus}")


def _fixed_by(A: Rhythm, z: int) -> bool:
    n = A.modulus
    s = A.elementset
    return all((a + z) % n in s for a in A.elements)


def smallest_period(A: Rhythm) -> Optional[int]:
    """Smallest nonzero shift z with z + A = A, or None for aperiodic rhythms.

    Every shift in 1..n-1 is tried; this is deliberately the slow route so it
    can serve as a check on :func:`is_periodic_fast`.
    """
    _require_nonempty(A, "periodicity")
    for z in range(1, A.modulus):
        if _fixed_by(A, z):
            return z
    return None


def is_periodic_fast(A: Rhythm, D: Optional[DivisorSet] = None) -> bool:
    """Periodicity tested only against the maximal divisors of n."""
    _require_nonempty(A, "periodicity")
    if A.modulus == 1:
        return False
    if D is None:
        D = maximal_divisors(A.modulus)
    elif D.modulus != A.modulus:
        raise RhythmError(f"divisor set is for n={D.modulus}, rhythm has n={A.modulus}")
    return any(_fixed_by(A, d) for d in D.maximal_divisors)


def is_tiling(A: Rhythm, B: Rhythm) -> bool:
    """True iff every element of Z_n is a + b for exactly one (a, b)."""
    _require_same_modulus(A, B)
    _require_nonempty(A, "tiling")
    _require_nonempty(B, "tiling")
    n = A.modulus
    if len(A) * len(B) != n:
        return False
    hit = [False] * n
    for a in A.elements:
        for b in B.elements:
            s = (a + b) % n
            if hit[s]:
                return False
            hit[s] = True
    return True


def poly_product_mod(P: Polynomial01, Q: Polynomial01) -> list[int]:
    """Integer coefficients of P(x) Q(x) mod (x^n - 1)."""
    if P.modulus != Q.modulus:
        raise RhythmError(f"modulus mismatch: {P.modulus} vs {Q.modulus}")
    n = P.modulus
    out = [0] * n
    for i, p in enumerate(P.coefficients):
        if p:
            for j, q in enumerate(Q.coefficients):
                if q:
                    out[(i + j) % n] += p * q
    return out


def poly_tiling_check(A: Rhythm, B: Rhythm) -> bool:
    _require_same_modulus(A, B)
    prod = poly_product_mod(Polynomial01.of(A), Polynomial01.of(B))
    return all(c == 1 for c in prod)


def canonicalize(A: Rhythm) -> Rhythm:
    """Lexicographically smallest translate of A (always contains 0)."""
    _require_nonempty(A, "canonicalization")
    n = A.modulus
    best = min(tuple(sorted((e - a) % n for e in A.elements)) for a in A.elements)
    return Rhythm(n, best)


def translation_class(A: Rhythm) -> set[Rhythm]:
    """All distinct translates of A."""
    return {translate(A, t) for t in range(A.modulus)}

