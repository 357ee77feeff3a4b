"""Counting simultaneous embeddings: condition C, the weights delta(x), the
S_2 aggregation over ideal classes, and the classical g = 1 valuation sum."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from sympy import divisors, jacobi_symbol

from .base_field import FieldElem, IdealL, enumerate_totally_bounded, in_prime, total_sign
from .cm_field import (CMField, ClassGroup, ElemK, IdealK, class_group, class_of,
                       count_ideals_norm_in_class, enumerate_elements_with_relative_norm,
                       roots_of_unity_count, unit_quotient_order)
from .errors import IneligiblePrime, NonIntegerResult, VerificationFailed
from .orders import (EmbeddingContext, all_sign_vectors, beta_twist, brute_force_S, build_order,
                     make_context)
from .reciprocity import eligibility


@dataclass(frozen=True)
class ConditionCParams:
    aK: FieldElem
    trW: FieldElem
    d: FieldElem
    dprime: FieldElem
    p: int
    ell: FieldElem

    @staticmethod
    def of(K: CMField, Kp: CMField, p: int, ell: Optional[FieldElem] = None,
           w: Optional[ElemK] = None) -> "ConditionCParams":
        w = Kp.t if w is None else w
        trW = w.rel_trace()
        dprime = trW * trW - 4 * w.rel_norm()
        ell = K.base.one if ell is None else ell
        return ConditionCParams(K.a, trW, K.d, dprime, p, ell)

    @property
    def dd(self) -> FieldElem:
        return self.d * self.dprime

    @property
    def divisor(self) -> FieldElem:
        return self.ell * self.ell * (4 * self.p)


def satisfies_C(x: FieldElem, P: ConditionCParams) -> bool:
    two = x.F.elem(2)
    if not ((x - P.aK * P.trW) / two).is_integral():
        return False
    diff = x * x - P.dd
    if not (diff / P.divisor).is_integral():
        return False
    return total_sign(diff) == "totally_negative"


def condition_C_solutions(P: ConditionCParams) -> List[FieldElem]:
    """All x in O_L satisfying C, from the box where x^2 < dd' at both places."""
    F = P.d.F
    cands = enumerate_totally_bounded(P.dd, P.aK * P.trW, IdealL.of(F.elem(2)))
    return [x for x in cands if satisfies_C(x, P)]


def delta(x: FieldElem, K: CMField) -> int:
    if not x:
        return 2 ** len(K.d_primes())
    return 2 ** sum(1 for Q in K.d_primes() if in_prime(x, Q))


def superspecial_eligible(K: CMField, p: int) -> Tuple[bool, str]:
    return eligibility(K, p)


# ---------------------------------------------------------------------------
# S_1 and S_2
# ---------------------------------------------------------------------------

def s2_norm(x: FieldElem, P: ConditionCParams) -> IdealL:
    """The O_L-ideal ((x^2 - dd') / (4 p l^2))."""
    return IdealL.of((x * x - P.dd) / P.divisor)


def s1_elements(ctx: EmbeddingContext, a_ideal: IdealK, x: FieldElem,
                P: ConditionCParams) -> List[ElemK]:
    """gamma in A^-1 a^-1 a-bar with gamma gamma-bar = (x^2 - dd') / (4 alpha0 p l^2)."""
    target = (x * x - P.dd) / (P.divisor * ctx.alpha0)
    return enumerate_elements_with_relative_norm(beta_twist(ctx, a_ideal), target)


def s2_count(ctx: EmbeddingContext, a_ideal: IdealK, x: FieldElem, P: ConditionCParams,
             G: ClassGroup) -> int:
    """Integral ideals b with N(b) = (x^2 - dd')/(4 p l^2) and b ~ a^2 A."""
    target = class_of(a_ideal * a_ideal * ctx.A, G)
    return count_ideals_norm_in_class(s2_norm(x, P), target, ctx.K, G)


def count_S2_weighted(K: CMField, Kp: CMField, ctx: EmbeddingContext, a_ideal: IdealK,
                      G: ClassGroup, w: Optional[ElemK] = None) -> int:
    """w_K * sum over x satisfying C of delta(x) #S_2(a, x, l)."""
    P = ConditionCParams.of(K, Kp, ctx.p, ctx.ell, w)
    target = class_of(a_ideal * a_ideal * ctx.A, G)
    total = 0
    for x in condition_C_solutions(P):
        total += delta(x, K) * count_ideals_norm_in_class(s2_norm(x, P), target, K, G)
    return roots_of_unity_count(K) * total


def brute_force_total(ctx: EmbeddingContext, a_ideal: IdealK, w: ElemK) -> int:
    """sum over sign vectors of #{xi in R(a, lambda_eps, l) : Trd = Tr(w), Nrd = N(w)},
    by direct enumeration in each order."""
    t, nu = w.rel_trace(), w.rel_norm()
    return sum(len(brute_force_S(build_order(ctx, a_ideal, eps), t, nu))
               for eps in all_sign_vectors(ctx))


# ---------------------------------------------------------------------------
# Totals
# ---------------------------------------------------------------------------

@dataclass
class CoincidenceReport:
    p: int
    eligible: bool
    reason: str
    n: int = 1
    per_class: List[dict] = field(default_factory=list)
    total: Optional[int] = None
    raw_sum: Optional[int] = None
    multiplicity: Optional[int] = None
    alpha0_used: Optional[FieldElem] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def to_json(self, timings: bool = False) -> dict:
        out = {"p": str(self.p), "eligible": self.eligible, "reason": self.reason, "n": str(self.n),
               "total": None if self.total is None else str(self.total),
               "per_class": [{"class": c["class"], "s2_weighted": str(c["s2_weighted"])}
                             for c in self.per_class],
               "alpha0": None if self.alpha0_used is None else self.alpha0_used.to_json()}
        if self.multiplicity is not None:
            out["multiplicity"] = str(self.multiplicity)
            out["raw_sum"] = str(self.raw_sum)
        if timings:
            out["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return out


def coincidence_total(K: CMField, Kp: CMField, p: int, n: int = 1,
                      multiplicity: Optional[int] = None, seed: int = 0, swap: bool = False,
                      budget: int = 200000, w: Optional[ElemK] = None,
                      relation_budget: int = 4000, allow_same: bool = True,
                      raise_ineligible: bool = False) -> CoincidenceReport:
    """Sum over ideal classes of #S(a, lambda_a, p^(n-1)), computed as
    2^-tau sum_a w_K sum_x delta(x) #S_2(a, x, l)."""
    if K.base != Kp.base:
        raise ValueError("K and K' must share the real quadratic subfield")
    if not allow_same and K.same_order(Kp):
        raise ValueError("K and K' coincide")
    t0 = time.perf_counter()
    ok, reason = eligibility(K, p)
    if not ok:
        if raise_ineligible:
            raise IneligiblePrime(p, reason)
        return CoincidenceReport(p, False, reason, n)
    ctx = make_context(K, p, n, seed=seed, swap=swap, budget=budget)
    t1 = time.perf_counter()
    G = class_group(K, avoid=IdealL.of(ctx.alpha0 * K.d * p), relation_budget=relation_budget)
    t2 = time.perf_counter()
    per_class = []
    raw = 0
    for c, a in zip(G.rep_classes, G.representatives):
        s = count_S2_weighted(K, Kp, ctx, a, G, w)
        per_class.append({"class": list(c), "s2_weighted": s, "ideal": a})
        raw += s
    scale = 2 ** K.tau
    if raw % scale:
        raise NonIntegerResult(f"sum {raw} not divisible by 2^tau = {scale}")
    total = raw // scale
    t3 = time.perf_counter()
    rep = CoincidenceReport(p, True, reason, n, per_class, total, total, multiplicity, ctx.alpha0,
                            {"alpha0": t1 - t0, "class_group": t2 - t1, "count": t3 - t2})
    if multiplicity is not None:
        rep.total = total * multiplicity
    return rep


def optimal_triples_count(K: CMField, Kp: CMField, p: int, **kw) -> Fraction:
    """#(O_K^x / O_L^x)^-1 sum_a #S(a, lambda_a, 1)."""
    if K.same_order(Kp):
        raise ValueError("optimal triples need K != K'")
    rep = coincidence_total(K, Kp, p, 1, raise_ineligible=True, **kw)
    u = unit_quotient_order(K)
    val = Fraction(rep.raw_sum, u)
    if val.denominator != 1:
        raise NonIntegerResult(f"{rep.raw_sum} / {u} is not an integer")
    return val


# ---------------------------------------------------------------------------
# g = 1
# ---------------------------------------------------------------------------

def is_fundamental_discriminant(D: int) -> bool:
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    from sympy import factorint
    return all(e == 1 for e in factorint(n).values())


def kronecker(D: int, k: int) -> int:
    """Kronecker symbol (D / k) for k >= 1."""
    out = 1
    while k % 2 == 0:
        k //= 2
        if D % 2 == 0:
            return 0
        out *= 1 if D % 8 in (1, 7) else -1
    if k == 1:
        return out
    return out * jacobi_symbol(D % k, k)


def ideal_count_imag_quadratic(D: int, m: int) -> int:
    """Number of ideals of norm m in the maximal order of discriminant D."""
    if m <= 0:
        return 0
    return sum(kronecker(D, k) for k in divisors(m))


def gz1_valuation(d: int, dprime: int, p: int, field_disc: int) -> Fraction:
    """1/2 sum_x sum_{n>=1} delta(x) R((dd' - x^2)/(4 p^n)), with R counting
    ideals in the maximal order of discriminant field_disc."""
    if d >= 0 or dprime >= 0:
        raise ValueError("d and d' must be negative")
    if not (is_fundamental_discriminant(d) and is_fundamental_discriminant(dprime)):
        raise ValueError("d and d' must be fundamental discriminants")
    if math.gcd(d, dprime) != 1:
        raise ValueError("d and d' must be coprime")
    N = d * dprime
    total = 0
    x = -math.isqrt(N)
    while x * x <= N:
        if x * x < N and (N - x * x) % 4 == 0:
            m = (N - x * x) // 4
            dx = 2 if x % d == 0 else 1
            k = m
            while k % p == 0:
                k //= p
                total += dx * ideal_count_imag_quadratic(field_disc, k)
        x += 1
    return Fraction(total, 2)
