"""Legendre and Hilbert symbols over L, prime search in residue classes,
and the totally negative prime alpha0 presenting the quaternion algebra
ramified exactly at S0 and the two real places as (d, alpha0*p / L)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from sympy import factorint, isprime

from .base_field import (FieldElem, IdealL, PrimeOfL, RealQuadraticField, ResidueField,
                         congruent, coprime, crt_solve, factor_element, primes_above,
                         reduce_mod, valuation)
from .cm_field import CMField, PrimeOfK, splitting_in_K
from .errors import (IneligiblePrime, NonCoprimeIdeal,
                     SearchBudgetExceeded, VerificationFailed)


@dataclass(frozen=True)
class Place:
    kind: str  # "finite" | "real"
    prime: Optional[PrimeOfL] = None
    index: int = 0  # 1 or 2 for real places

    @staticmethod
    def real(i: int) -> "Place":
        return Place("real", None, i)

    @staticmethod
    def finite(P: PrimeOfL) -> "Place":
        return Place("finite", P, 0)

    def __str__(self):
        return f"real{self.index}" if self.kind == "real" else str(self.prime)


@dataclass(frozen=True)
class QuaternionShape:
    gamma: FieldElem
    delta: FieldElem
    ramified_places: FrozenSet[Place]


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------

def legendre(gamma: FieldElem, P: PrimeOfL) -> int:
    """(gamma / P) for an odd prime P."""
    if P.p == 2:
        raise ValueError("Legendre symbol at a dyadic prime")
    R = ResidueField(P)
    if gamma.den % P.p == 0:
        raise ValueError("gamma not integral at P")
    return R.legendre(R.reduce(gamma))


def _strip(g: FieldElem, P: PrimeOfL) -> Tuple[int, FieldElem]:
    """(v, u) with g = pi^v u, u a P-unit (pi = canonical generator)."""
    v = valuation(g, P)
    return v, g / P.generator ** v


def _integral_square_multiple(g: FieldElem) -> FieldElem:
    return g * (g.den * g.den)


@lru_cache(maxsize=None)
def _dyadic_ring(P: PrimeOfL, N: int):
    """Residues of O_L modulo P^N and the set of squares among them."""
    F = P.F
    m = IdealL(P.generator ** N)
    (h11, _), (_, h22) = m.hnf()
    elems = [F.elem(x, y) for x in range(h11) for y in range(h22)]
    key = lambda e: (e.x, e.y)
    squares = {key(reduce_mod(e * e, m)) for e in elems}
    sq_elems = [F.elem(x, y) for x, y in squares]
    return m, squares, sq_elems


def _dyadic_symbol(gamma: FieldElem, delta: FieldElem, P: PrimeOfL) -> int:
    """Isotropy of x^2 - gamma y^2 - delta z^2 over the completion at P by
    searching for a primitive solution modulo P^(2e+3)."""
    g = _integral_square_multiple(gamma)
    h = _integral_square_multiple(delta)
    pi2 = P.generator * P.generator
    while valuation(g, P) >= 2:
        g = g / pi2
    while valuation(h, P) >= 2:
        h = h / pi2
    N = 2 * P.e + 3
    m, squares, sq_elems = _dyadic_ring(P, N)
    key = lambda e: (e.x, e.y)

    def red(e):
        return key(reduce_mod(e, m))

    # y unit: x^2 = gamma + delta z^2 ; z unit: x^2 = delta + gamma y^2
    for s2 in sq_elems:
        if red(g + h * s2) in squares or red(h + g * s2) in squares:
            return 1
    # x unit: gamma y^2 + delta z^2 = 1
    hs = {red(h * s2) for s2 in sq_elems}
    one = P.F.one
    for s1 in sq_elems:
        if red(one - g * s1) in hs:
            return 1
    return -1


def hilbert_symbol(gamma: FieldElem, delta: FieldElem, place: Place) -> int:
    if not gamma or not delta:
        raise ValueError("Hilbert symbol of zero")
    if place.kind == "real":
        i = place.index - 1
        return -1 if gamma.embedding_signs()[i] < 0 and delta.embedding_signs()[i] < 0 else 1
    P = place.prime
    if P.p == 2:
        return _dyadic_symbol(gamma, delta, P)
    a, g0 = _strip(gamma, P)
    b, h0 = _strip(delta, P)
    R = ResidueField(P)
    val = R.mul(R.pow(R.reduce(g0), b), R.pow(R.reduce(h0), -a))
    if (a * b) % 2:
        val = R.neg(val)
    return R.legendre(val)


def relevant_places(gamma: FieldElem, delta: FieldElem) -> List[Place]:
    F = gamma.F
    qs = {2}
    for x in (gamma, delta):
        n = x.norm()
        qs |= set(factorint(abs(n.numerator))) | set(factorint(n.denominator)) | set(factorint(x.den))
    qs.discard(1)
    places = [Place.real(1), Place.real(2)]
    for q in sorted(qs):
        places.extend(Place.finite(P) for P in primes_above(F, q))
    return places


def ramified_places(gamma: FieldElem, delta: FieldElem) -> FrozenSet[Place]:
    return frozenset(v for v in relevant_places(gamma, delta) if hilbert_symbol(gamma, delta, v) == -1)


def quaternion_shape(gamma: FieldElem, delta: FieldElem) -> QuaternionShape:
    return QuaternionShape(gamma, delta, ramified_places(gamma, delta))


def product_formula_check(gamma: FieldElem, delta: FieldElem) -> bool:
    prod = 1
    for v in relevant_places(gamma, delta):
        prod *= hilbert_symbol(gamma, delta, v)
    return prod == 1


def real_negative_count(*xs: FieldElem) -> int:
    """Number of real places where all the given elements are negative."""
    return sum(1 for i in range(2) if all(x.embedding_signs()[i] < 0 for x in xs))


# ---------------------------------------------------------------------------
# Prime search
# ---------------------------------------------------------------------------

def is_prime_element(a: FieldElem) -> bool:
    if not a or not a.is_integral():
        return False
    n = abs(int(a.norm()))
    if isprime(n):
        return True
    r = math.isqrt(n)
    if r * r == n and isprime(r):
        # inert rational prime times a unit
        q = r
        if all(P.residue_degree == 2 for P in primes_above(a.F, q)):
            return (a / q).is_integral()
    return False


def _box_points(R: int):
    if R == 0:
        yield (0, 0)
        return
    pts = [(i, j) for i in range(-R, R + 1) for j in range(-R, R + 1) if max(abs(i), abs(j)) == R]
    yield from sorted(pts)


def find_prime_in_progression(r: FieldElem, modulus: IdealL, signs: Tuple[int, int],
                              budget: int = 200000, seed: int = 0) -> FieldElem:
    """The seed-th prime element alpha = r mod modulus with the given signs,
    in the canonical order: alpha = r + mu*(i + j omega) over growing boxes."""
    F = r.F
    if not coprime(IdealL.of(r) if r else IdealL(F.zero), modulus) and not modulus.is_one():
        raise NonCoprimeIdeal(f"residue {r} not prime to modulus {modulus}")
    mu = modulus.generator
    w = F.omega
    r0 = reduce_mod(r, modulus) if not modulus.is_one() else F.zero
    tested = 0
    hits = 0
    R = 0
    while True:
        for i, j in _box_points(R):
            alpha = r0 + mu * (F.elem(i) + w * j)
            tested += 1
            if tested > budget:
                raise SearchBudgetExceeded(f"no prime found after {budget} candidates")
            if alpha.embedding_signs() != tuple(signs):
                continue
            if is_prime_element(alpha):
                if hits == seed:
                    return alpha
                hits += 1
        R += 1


# ---------------------------------------------------------------------------
# alpha0
# ---------------------------------------------------------------------------

def s_sets(K: CMField, p: int) -> Tuple[List[PrimeOfL], List[PrimeOfL]]:
    """(S, S0): primes of L above p and those of odd residue degree."""
    S = primes_above(K.base, p)
    S0 = [P for P in S if P.residue_degree % 2 == 1]
    return S, S0


def expected_ramification(K: CMField, p: int) -> FrozenSet[Place]:
    _, S0 = s_sets(K, p)
    return frozenset([Place.real(1), Place.real(2)] + [Place.finite(P) for P in S0])


def alpha0_congruences(K: CMField, p: int) -> List[Tuple[FieldElem, IdealL]]:
    F = K.base
    pe = F.elem(p)
    cong = []
    for q in K.d_primes():
        cong.append((pe, q.ideal()))
    for eta in primes_above(F, 2):
        cong.append((pe, IdealL.of(eta.generator ** (2 * eta.e + 3))))
    cong.append((F.one, IdealL.of(pe)))
    return cong


@dataclass(frozen=True)
class Alpha0:
    alpha0: FieldElem
    A: PrimeOfK
    Abar: PrimeOfK
    ramified: FrozenSet[Place]


def eligibility(K: CMField, p: int) -> Tuple[bool, str]:
    """Whether the superspecial counting hypotheses hold for (K, p), with the
    first failed clause named."""
    F = K.base
    if not isprime(p):
        return False, "p is not prime"
    if p == 2:
        return False, "p = 2 is dyadic"
    if F.disc_L % p == 0:
        return False, "ramified in L"
    if any(P.p == p for P in K.d_primes()):
        return False, "ramified in K"
    S, S0 = s_sets(K, p)
    for P in S:
        kind = splitting_in_K(P, K)[0]
        if P in S0 and kind != "inert":
            return False, f"prime {P} of odd residue degree is {kind} in K, not inert"
        if P not in S0 and kind != "split":
            return False, f"supersingular, not superspecial: prime {P} of even residue degree is {kind} in K"
    return True, "eligible"


def find_alpha0(K: CMField, p: int, budget: int = 200000, seed: int = 0,
                swap: bool = False) -> Alpha0:
    """Totally negative prime alpha0 with alpha0 = p mod q (q | d),
    alpha0 = p mod eta^(2e+3) (eta | 2), alpha0 = 1 mod p."""
    F = K.base
    ok, reason = eligibility(K, p)
    if not ok:
        raise IneligiblePrime(p, reason)
    cong = alpha0_congruences(K, p)
    r = crt_solve(cong)
    modulus = IdealL.of(F.one)
    for _, m in cong:
        modulus = modulus * m
    alpha0 = find_prime_in_progression(r, modulus, (-1, -1), budget=budget, seed=seed)
    for res, m in cong:
        if not congruent(alpha0, res, m):
            raise VerificationFailed(f"alpha0 misses congruence mod {m}")
    P0 = next(iter(factor_element(alpha0)[1]))
    kind, prs = splitting_in_K(P0, K)
    if kind != "split":
        raise VerificationFailed(f"(alpha0) = {P0} does not split in K")
    ram = ramified_places(K.d, alpha0 * p)
    if ram != expected_ramification(K, p):
        raise VerificationFailed(
            f"(d, alpha0 p) ramified at {sorted(map(str, ram))}, expected S0 and both real places")
    A, Abar = (prs[1], prs[0]) if swap else (prs[0], prs[1])
    return Alpha0(alpha0, A, Abar, ram)
