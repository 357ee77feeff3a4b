"""Crude upper bound on primes where two CM abelian surfaces can have
isomorphic reduction, and the case table giving the exponent r'."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from sympy import primerange

from .base_field import FieldElem, primes_above
from .cm_field import CMField
from .intlat import int_root_floor


@dataclass(frozen=True)
class BoundInput:
    K1: CMField
    K2: CMField
    c1: Optional[FieldElem] = None
    c2: Optional[FieldElem] = None
    disc_O1: int = field(init=False)
    disc_O2: int = field(init=False)
    disc_L: int = field(init=False)

    def __post_init__(self):
        if self.K1.base != self.K2.base:
            raise ValueError("K1 and K2 must share the real quadratic subfield")
        L = self.K1.base
        object.__setattr__(self, "disc_L", L.disc_L)
        for name, K, c in (("disc_O1", self.K1, self.c1), ("disc_O2", self.K2, self.c2)):
            nc = 1 if c is None else abs(int(c.norm()))
            if nc == 0:
                raise ValueError("conductor must be nonzero")
            # N(c^2 m) disc(O_L)^2 with m = (d)
            object.__setattr__(self, name, nc * nc * abs(int(K.d.norm())) * L.disc_L ** 2)


@dataclass(frozen=True)
class CaseRow:
    p_behavior: str  # "unramified" (inert or split) | "inert" | "ramified"
    reduction: str  # "superspecial" | "supersingular_not_ssp"
    rapoport: bool
    r_prime: int

    def applies_to(self, behavior: str) -> bool:
        if self.p_behavior == "unramified":
            return behavior in ("inert", "split")
        return self.p_behavior == behavior

    def to_json(self) -> dict:
        return {"p": self.p_behavior, "reduction": self.reduction,
                "rapoport": self.rapoport, "r_prime": self.r_prime}


CASE_TABLE: Tuple[CaseRow, ...] = (
    CaseRow("unramified", "superspecial", True, 2),
    CaseRow("inert", "supersingular_not_ssp", True, 4),
    CaseRow("ramified", "superspecial", True, 2),
    CaseRow("ramified", "superspecial", False, 1),
)


def crude_bound(B: BoundInput) -> Fraction:
    """4^g disc(O_1) disc(O_2) / disc(O_L)^4 with g = 2."""
    return Fraction(16 * B.disc_O1 * B.disc_O2, B.disc_L ** 4)


def root_floor(x: Fraction, r: int) -> int:
    """floor(x^(1/r)) for rational x >= 0, in exact integer arithmetic."""
    return int_root_floor(x.numerator // x.denominator, r)


def prime_bound_for_case(B: BoundInput, row: CaseRow) -> int:
    return root_floor(crude_bound(B), row.r_prime)


def ceilings(B: BoundInput) -> dict:
    b = crude_bound(B)
    return {f"r{r}": root_floor(b, r) for r in (1, 2, 4)}


def behavior_in_L(L, p: int) -> str:
    prs = primes_above(L, p)
    if any(P.ramified for P in prs):
        return "ramified"
    return "split" if len(prs) == 2 else "inert"


def odd_ef_count(L, p: int) -> int:
    """Number of primes q | p of O_L with e(q/p) f(q/p) odd."""
    return sum(1 for P in primes_above(L, p) if (P.e * P.residue_degree) % 2 == 1)


@dataclass
class Candidate:
    p: int
    behavior: str
    r: int
    rows: List[Tuple[CaseRow, int, bool]]
    notes: List[str]

    @property
    def superspecial_possible(self) -> bool:
        return any(row.reduction == "superspecial" and ok for row, _, ok in self.rows)

    def to_json(self) -> dict:
        return {"p": str(self.p), "behavior": self.behavior, "r": self.r,
                "rows": [dict(row.to_json(), ceiling=str(c), survives=ok) for row, c, ok in self.rows],
                "notes": self.notes}


def candidate_primes(B: BoundInput) -> List[Candidate]:
    """Primes that survive the bound for at least one applicable case row."""
    L = B.K1.base
    b = crude_bound(B)
    row_ceiling = {row: root_floor(b, row.r_prime) for row in CASE_TABLE}
    top = max(row_ceiling[row] for row in CASE_TABLE if row.p_behavior != "ramified")
    ram = [q for q in primerange(2, abs(B.disc_L) + 1) if B.disc_L % q == 0]
    ps = sorted(set(primerange(2, top + 1)) | set(ram))
    dprimes = set()
    for K in (B.K1, B.K2):
        dprimes |= {P.p for P in K.d_primes()}
    out = []
    for p in ps:
        beh = behavior_in_L(L, p)
        rows = [(row, row_ceiling[row], p <= row_ceiling[row]) for row in CASE_TABLE if row.applies_to(beh)]
        if not any(ok for _, _, ok in rows):
            continue
        notes = []
        if p == 2:
            notes.append("dyadic: counting formula not applicable, bound only")
        if beh == "ramified":
            notes.append("ramified in L: counting formula not applicable, bound only")
        if p in dprimes:
            notes.append("ramified in K1 or K2: counting formula not applicable, bound only")
        out.append(Candidate(p, beh, odd_ef_count(L, p), rows, notes))
    return out
