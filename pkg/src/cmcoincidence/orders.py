"""Superspecial orders R(a, lambda, l) inside M_2(K) as explicit Z-lattices.

An element [alpha, beta] stands for the matrix ((alpha, beta), (q beta-bar,
alpha-bar)) with q = alpha0 * p. Orders are stored as rank-8 lattices in the
coordinates (alpha, beta) on the Z-basis (1, omega, t, omega t) of each slot,
in Hermite normal form with a denominator, so equality is syntactic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .base_field import (FieldElem, IdealL, PrimeOfL, congruent, crt_solve, factor_element,
                         total_sign, valuation)
from .cm_field import (CMField, ElemK, IdealK, factor_ideal,
                       ideal_valuation, ramified_prime_above, splitting_in_K)
from .errors import ClosureFailure, NonCoprimeIdeal, VerificationFailed
from .intlat import det, hnf, short_vectors, solve_in_span
from .reciprocity import Alpha0, find_alpha0, s_sets

Signs = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingContext:
    K: CMField
    p: int
    n: int
    ell: FieldElem
    alpha0: FieldElem
    A: IdealK
    Abar: IdealK
    lambda_q: Dict[PrimeOfL, FieldElem] = field(hash=False)
    S0: Tuple[PrimeOfL, ...]
    ell_split: bool
    seed: int = 0
    swap: bool = False

    @property
    def q(self) -> FieldElem:
        """alpha0 * p, the second slot of the algebra (d, alpha0 p / L)."""
        return self.alpha0 * self.p

    @property
    def d_primes(self) -> List[PrimeOfL]:
        return self.K.d_primes()


def make_context(K: CMField, p: int, n: int = 1, seed: int = 0, swap: bool = False,
                 budget: int = 200000, ell: Optional[FieldElem] = None,
                 alpha: Optional[Alpha0] = None) -> EmbeddingContext:
    F = K.base
    if n < 1:
        raise ValueError("level n must be positive")
    a0 = alpha or find_alpha0(K, p, budget=budget, seed=seed, swap=swap)
    ell = F.elem(p ** (n - 1)) if ell is None else ell
    q = a0.alpha0 * p
    lam = {}
    for Q in K.d_primes():
        # alpha0 = p mod q, so p is a square root of alpha0 p
        r = F.elem(p)
        if not congruent(r * r, q, Q.ideal()):
            raise VerificationFailed(f"p is not a square root of alpha0 p mod {Q}")
        lam[Q] = r
    _, fac = factor_element(ell)
    bad = factor_element(a0.alpha0 * K.d)[1]
    for P in fac:
        if P in bad:
            raise NonCoprimeIdeal(f"l = {ell} shares {P} with alpha0 d")
    ell_split = all(splitting_in_K(P, K)[0] == "split" for P in fac)
    _, S0 = s_sets(K, p)
    return EmbeddingContext(K, p, n, ell, a0.alpha0, a0.A.ideal, a0.Abar.ideal, lam,
                            tuple(S0), ell_split, seed, swap)


# ---------------------------------------------------------------------------
# Quaternion elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuaternionElem:
    alpha: ElemK
    beta: ElemK
    q: FieldElem = field(repr=False)

    def __add__(self, o: "QuaternionElem") -> "QuaternionElem":
        return QuaternionElem(self.alpha + o.alpha, self.beta + o.beta, self.q)

    def __neg__(self) -> "QuaternionElem":
        return QuaternionElem(-self.alpha, -self.beta, self.q)

    def __sub__(self, o: "QuaternionElem") -> "QuaternionElem":
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, QuaternionElem):
            # [x, y][z, w] = [xz + q y w-bar, xw + y z-bar]
            x, y, z, w = self.alpha, self.beta, o.alpha, o.beta
            return QuaternionElem(x * z + y * w.conj() * self.q, x * w + y * z.conj(), self.q)
        return QuaternionElem(self.alpha * o, self.beta * o, self.q)

    def conj(self) -> "QuaternionElem":
        """Quaternion conjugate, the adjugate matrix."""
        return QuaternionElem(self.alpha.conj(), -self.beta, self.q)

    def trd(self) -> FieldElem:
        return self.alpha.rel_trace()

    def nrd(self) -> FieldElem:
        return self.alpha.rel_norm() - self.q * self.beta.rel_norm()

    def matrix(self) -> List[List[ElemK]]:
        return [[self.alpha, self.beta], [self.beta.conj() * self.q, self.alpha.conj()]]

    def coords(self) -> Tuple[List[int], int]:
        ca, da = self.alpha.coords()
        cb, db = self.beta.coords()
        den = math.lcm(da, db)
        return [v * (den // da) for v in ca] + [v * (den // db) for v in cb], den

    @staticmethod
    def from_coords(K: CMField, q: FieldElem, c: Sequence[int], den: int = 1) -> "QuaternionElem":
        return QuaternionElem(ElemK.from_coords(K, c[:4], den), ElemK.from_coords(K, c[4:], den), q)

    def is_zero(self) -> bool:
        return not self.alpha and not self.beta

    def to_json(self) -> dict:
        return {"alpha": self.alpha.to_json(), "beta": self.beta.to_json()}


def pairing(x: QuaternionElem, y: QuaternionElem) -> FieldElem:
    """<x, y> = Trd(x y-bar) = a c-bar + a-bar c - q (b d-bar + b-bar d)."""
    return (x.alpha * y.alpha.conj()).rel_trace() - x.q * (x.beta * y.beta.conj()).rel_trace()


# ---------------------------------------------------------------------------
# Lattices of quaternions
# ---------------------------------------------------------------------------

def _normalize8(rows: List[List[int]], den: int) -> Tuple[Tuple[Tuple[int, ...], ...], int]:
    H = hnf(rows)
    if len(H) != 8:
        raise ValueError("degenerate quaternion lattice")
    g = den
    for r in H:
        for v in r:
            g = math.gcd(g, v)
    if g > 1:
        H = [[v // g for v in r] for r in H]
        den //= g
    return tuple(tuple(r) for r in H), den


def _rows_of(elems: Sequence[QuaternionElem]) -> Tuple[List[List[int]], int]:
    cs = [e.coords() for e in elems]
    den = math.lcm(*[c[1] for c in cs])
    return [[v * (den // e) for v in c] for c, e in cs], den


@dataclass(frozen=True)
class OrderLattice:
    """A rank-8 Z-lattice of quaternions, with the data defining R(a, lambda, l)."""

    M: Tuple[Tuple[int, ...], ...]
    den: int
    ctx: EmbeddingContext = field(compare=False, repr=False)
    label: Tuple = field(compare=False, default=())
    lam: Optional[FieldElem] = field(compare=False, default=None)
    beta_ideal: Optional[IdealK] = field(compare=False, default=None, repr=False)

    @staticmethod
    def from_elems(ctx: EmbeddingContext, elems: Sequence[QuaternionElem], **kw) -> "OrderLattice":
        rows, den = _rows_of(elems)
        M, den = _normalize8(rows, den)
        return OrderLattice(M, den, ctx, **kw)

    def basis(self) -> List[QuaternionElem]:
        return [QuaternionElem.from_coords(self.ctx.K, self.ctx.q, r, self.den) for r in self.M]

    def contains(self, x: QuaternionElem) -> bool:
        c, e = x.coords()
        scaled = [v * self.den for v in c]
        if any(v % e for v in scaled):
            return False
        return solve_in_span(self.M, [v // e for v in scaled]) is not None

    def contains_by_predicate(self, x: QuaternionElem) -> bool:
        """The defining predicate of R(a, lambda, l)."""
        K = self.ctx.K
        sd = K.sqrt_d()
        if not (x.alpha * sd).is_integral():
            return False
        if not self.beta_ideal.contains(x.beta):
            return False
        return (x.alpha - x.beta * K.elem(self.lam)).is_integral()

    def element(self, coeffs: Sequence[int]) -> QuaternionElem:
        c = [sum(k * r[j] for k, r in zip(coeffs, self.M)) for j in range(8)]
        return QuaternionElem.from_coords(self.ctx.K, self.ctx.q, c, self.den)

    def gram_L(self) -> List[List[FieldElem]]:
        B = self.basis()
        return [[pairing(x, y) for y in B] for x in B]

    def gram(self) -> List[List[int]]:
        """Integer matrix of Tr_{L/Q} <e_i, e_j> on the basis."""
        out = []
        for row in self.gram_L():
            r = []
            for v in row:
                t = v.trace()
                if t.denominator != 1:
                    raise VerificationFailed("pairing trace not integral on the lattice")
                r.append(int(t))
            out.append(r)
        return out

    def is_closed(self) -> bool:
        B = self.basis()
        return all(self.contains(x * y) for x in B for y in B)

    def contains_OK(self) -> bool:
        K = self.ctx.K
        zero = K.zero
        gens = [K.one, K.elem(K.base.omega), K.t, K.elem(0, K.base.omega)]
        return all(self.contains(QuaternionElem(g, zero, self.ctx.q)) for g in gens)

    def to_json(self) -> dict:
        return {"basis": [e.to_json() for e in self.basis()],
                "gram": [[str(v) for v in r] for r in self.gram()],
                "den": str(self.den),
                "zbasis": [[str(v) for v in r] for r in self.M]}


def order_from_json(ctx: EmbeddingContext, data: dict) -> OrderLattice:
    M, den = _normalize8([[int(v) for v in r] for r in data["zbasis"]], int(data["den"]))
    return OrderLattice(M, den, ctx)


# ---------------------------------------------------------------------------
# lambda
# ---------------------------------------------------------------------------

def _ideal_L_from_exponents(F, exps: Dict[PrimeOfL, int]) -> IdealL:
    g = F.one
    for P, e in exps.items():
        g = g * P.generator ** e
    return IdealL.of(g)


def beta_twist(ctx: EmbeddingContext, a_ideal: IdealK) -> IdealK:
    """A^{-1} a^{-1} a-bar."""
    return ctx.A.inv() * a_ideal.inv() * a_ideal.conj()


def denominator_ideal(J: IdealK) -> IdealL:
    """Smallest integral ideal c of O_L with c J contained in O_K."""
    need: Dict[PrimeOfL, int] = {}
    for Q, e in factor_ideal(J).items():
        if e < 0:
            k = -(-(-e) // Q.e_over_L)
            need[Q.P] = max(need.get(Q.P, 0), k)
    return _ideal_L_from_exponents(J.K.base, need)


def default_signs(ctx: EmbeddingContext, a_ideal: IdealK) -> Signs:
    """epsilon(a, q) = (-1)^{v_q~(a)} for each q | d."""
    K = ctx.K
    return tuple((-1) ** (ideal_valuation(a_ideal, ramified_prime_above(K, Q)) % 2)
                 for Q in ctx.d_primes)


def all_sign_vectors(ctx: EmbeddingContext) -> List[Signs]:
    return [tuple(s) for s in itertools.product((1, -1), repeat=len(ctx.d_primes))]


def solve_lambda(ctx: EmbeddingContext, a_ideal: IdealK, signs: Optional[Signs] = None,
                 shift: int = 0) -> FieldElem:
    """lambda = signs(q) lambda_q mod q for q | d, with lambda A^{-1} a^{-1} a-bar
    integral. ``shift`` adds shift * d * c, giving other valid choices."""
    K, F = ctx.K, ctx.K.base
    if not a_ideal.is_integral():
        raise ValueError("a must be an integral ideal")
    if signs is None:
        signs = default_signs(ctx, a_ideal)
    c = denominator_ideal(beta_twist(ctx, a_ideal))
    dps = ctx.d_primes
    if len(signs) != len(dps):
        raise ValueError("one sign per prime dividing d")
    cong = [(ctx.lambda_q[Q] * s, Q.ideal()) for Q, s in zip(dps, signs)]
    cfac = c.factor()
    if any(Q in cfac for Q in dps):
        raise NonCoprimeIdeal(f"denominator {c} of A^-1 a^-1 a-bar meets d")
    if not c.is_one():
        cong.append((F.zero, c))
    lam = crt_solve(cong)
    if shift:
        lam = lam + K.d * c.generator * shift
    return lam


# ---------------------------------------------------------------------------
# Building R(a, lambda, l)
# ---------------------------------------------------------------------------

def _check_ell(ctx: EmbeddingContext, twist: IdealK) -> None:
    if ctx.ell == ctx.K.base.one:
        return
    ell_primes = set(factor_element(ctx.ell)[1])
    for Q in factor_ideal(twist):
        if Q.P in ell_primes:
            raise NonCoprimeIdeal(f"l = {ctx.ell} meets a^-1 a-bar at {Q}")


def _kernel_build(ctx: EmbeddingContext, Dinv: IdealK, B: IdealK, lam: FieldElem) -> List[QuaternionElem]:
    """Sublattice of Dinv x B cut out by alpha = lam beta mod O_K."""
    K, q = ctx.K, ctx.q
    zero = K.zero
    gens = [QuaternionElem(a, zero, q) for a in Dinv.basis()]
    gens += [QuaternionElem(zero, b, q) for b in B.basis()]
    lk = K.elem(lam)
    images = [(g.alpha - lk * g.beta).coords() for g in gens]
    N = math.lcm(*[e for _, e in images])
    F_rows = [[v * (N // e) for v in c] for c, e in images]
    rows = [F_rows[k] + [int(k == j) for j in range(8)] for k in range(8)]
    rows += [[N * int(i == j) for j in range(4)] + [0] * 8 for i in range(4)]
    H = hnf(rows)
    kernel = [r[4:] for r in H if not any(r[:4])]
    if len(kernel) != 8:
        raise VerificationFailed("congruence kernel has wrong rank")
    out = []
    for c in kernel:
        x = QuaternionElem(zero, zero, q)
        for k, g in zip(c, gens):
            if k:
                x = x + g * k
        out.append(x)
    return out


def build_order(ctx: EmbeddingContext, a_ideal: IdealK, signs: Optional[Signs] = None,
                lam: Optional[FieldElem] = None, check: bool = True) -> OrderLattice:
    K = ctx.K
    if signs is None:
        signs = default_signs(ctx, a_ideal)
    if lam is None:
        lam = solve_lambda(ctx, a_ideal, signs)
    twist = beta_twist(ctx, a_ideal)
    _check_ell(ctx, a_ideal.inv() * a_ideal.conj())
    sd = K.sqrt_d()
    Dinv = IdealK.from_gens(K, [sd.inverse()])
    B = Dinv * twist * K.elem(ctx.ell)
    lk = K.elem(lam)
    if not (twist * lk).is_integral():
        raise VerificationFailed("lambda A^-1 a^-1 a-bar is not integral")
    label = (a_ideal, tuple(signs), ctx.ell)
    R = OrderLattice.from_elems(ctx, _kernel_build(ctx, Dinv, B, lam),
                                label=label, lam=lam, beta_ideal=B)
    if check:
        # second construction: O_K x 0 plus {[lam b, b] : b in B}
        zero = K.zero
        direct = [QuaternionElem(g, zero, ctx.q) for g in IdealK.unit(K).basis()]
        direct += [QuaternionElem(lk * b, b, ctx.q) for b in B.basis()]
        R2 = OrderLattice.from_elems(ctx, direct)
        if (R2.M, R2.den) != (R.M, R.den):
            raise VerificationFailed("kernel and direct constructions of R disagree")
        if not R.is_closed():
            raise ClosureFailure(f"R{label} is not closed under multiplication")
    return R


def build_R_prime(ctx: EmbeddingContext, a_ideal: IdealK) -> OrderLattice:
    """R' = {[alpha, beta] : alpha in O_K, beta in l a^{-1} a-bar}."""
    K = ctx.K
    zero = K.zero
    Bp = a_ideal.inv() * a_ideal.conj() * K.elem(ctx.ell)
    elems = [QuaternionElem(g, zero, ctx.q) for g in IdealK.unit(K).basis()]
    elems += [QuaternionElem(zero, b, ctx.q) for b in Bp.basis()]
    return OrderLattice.from_elems(ctx, elems, label=(a_ideal, (), ctx.ell), beta_ideal=Bp)


# ---------------------------------------------------------------------------
# Discriminants
# ---------------------------------------------------------------------------

def _det_L(M: List[List[FieldElem]]) -> FieldElem:
    A = [list(r) for r in M]
    n = len(A)
    F = A[0][0].F
    result = F.one
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            return F.zero
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            result = -result
        p = A[c][c]
        result = result * p
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] / p
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return result


def _ideal_generated(F, elems: Sequence[FieldElem]) -> IdealL:
    """gcd of principal ideals, by minimal valuations at the primes of the
    element of smallest norm."""
    elems = [e for e in elems if e]
    e0 = min(elems, key=lambda e: abs(e.norm()))
    exps = {}
    for P in factor_element(e0)[1]:
        exps[P] = min(valuation(e, P) for e in elems)
    return _ideal_L_from_exponents(F, exps)


def discriminant_ideal(R: OrderLattice) -> IdealL:
    """The O_L-ideal generated by det(<x_i, x_j>) over 4-element subsets of a
    Z-basis; for a rank-4 O_L-lattice this is its discriminant."""
    G = R.gram_L()
    F = R.ctx.K.base
    dets = [_det_L([[G[i][j] for j in S] for i in S]) for S in itertools.combinations(range(8), 4)]
    D = _ideal_generated(F, dets)
    # cross-check against the Z-Gram determinant: |det| = N(D) disc_L^4
    zdet = abs(det(R.gram()))
    if zdet != D.norm() * F.disc_L ** 4:
        raise VerificationFailed("Z-Gram determinant disagrees with the O_L discriminant")
    return D


def ideal_sqrt(I: IdealL) -> Optional[IdealL]:
    F = I.F
    half = {}
    for P, e in I.factor().items():
        if e % 2:
            return None
        half[P] = e // 2
    return _ideal_L_from_exponents(F, half)


def order_discriminant(R: OrderLattice) -> IdealL:
    """Reduced discriminant: the square root of discriminant_ideal(R)."""
    D = discriminant_ideal(R)
    r = ideal_sqrt(D)
    if r is None:
        raise VerificationFailed(f"discriminant {D} is not a square")
    return r


# ---------------------------------------------------------------------------
# Equality and conjugation
# ---------------------------------------------------------------------------

def orders_equal(R1: OrderLattice, R2: OrderLattice) -> bool:
    if R1.ctx.q != R2.ctx.q:
        raise ValueError("orders live in different ambient algebras")
    return all(R2.contains(x) for x in R1.basis()) and all(R1.contains(x) for x in R2.basis())


def predict_equal_orders(ctx: EmbeddingContext, a: IdealK, b: IdealK) -> bool:
    """R(a, lambda_a) = R(b, lambda_b) iff a^-1 a-bar = b^-1 b-bar and the
    valuations at ramified primes agree mod 2."""
    if a.inv() * a.conj() != b.inv() * b.conj():
        return False
    return default_signs(ctx, a) == default_signs(ctx, b)


def conjugate_order(R: OrderLattice, mu: ElemK) -> OrderLattice:
    """[mu^-1, 0] R [mu, 0], using [mu^-1,0][alpha,beta][mu,0] = [alpha, mu-bar beta / mu]."""
    f = mu.conj() / mu
    elems = [QuaternionElem(x.alpha, x.beta * f, x.q) for x in R.basis()]
    return OrderLattice.from_elems(R.ctx, elems)


# ---------------------------------------------------------------------------
# Elements of given reduced trace and norm
# ---------------------------------------------------------------------------

def brute_force_S(R: OrderLattice, target_trace: FieldElem, target_norm: FieldElem) -> List[QuaternionElem]:
    """All x in R with Trd(x) = t and Nrd(x) = nu, by enumerating the level
    set Tr_{L/Q}(Nrd x) = Tr_{L/Q}(nu) of the positive definite form."""
    if total_sign(target_norm) != "totally_positive":
        return []
    level = 2 * target_norm.trace()
    if level.denominator != 1:
        return []
    G = R.gram()
    out = []
    for v in short_vectors(G, int(level), exact_level=True):
        x = R.element(v)
        if x.trd() == target_trace and x.nrd() == target_norm:
            out.append(x)
    return out
