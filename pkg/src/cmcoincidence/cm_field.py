"""Quartic CM fields K = L(t), t^2 + a t + b = 0, with O_K = O_L[t].

Ideals of O_K are kept as Z-lattices of rank 4 in the coordinates of the
Z-basis (1, omega, t, omega*t): an integer matrix in Hermite normal form
together with a positive integer denominator. That normal form is unique,
so ideal equality is a syntactic comparison.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import factorint, isprime

from .base_field import (FieldElem, IdealL, PrimeOfL, RealQuadraticField, ResidueField,
                         elem_from_json, factor_element, primes_above, real_quadratic_field,
                         reduce_mod, sqrt_in_L, tp_elements_of_norm, totally_positive_generator, total_sign,
                         valuation)
from .errors import HypothesisViolation, RelationSearchIncomplete
from .intlat import hnf, lll_gram, matmul, short_vectors, smith, solve_in_span, transpose

Vec = Tuple[int, ...]


# ---------------------------------------------------------------------------
# The field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CMField:
    base: RealQuadraticField
    a: FieldElem
    b: FieldElem
    d: FieldElem = field(init=False, compare=False)
    tau: int = field(init=False, compare=False)
    disc_abs: int = field(init=False, compare=False)

    def __post_init__(self):
        d = self.a * self.a - 4 * self.b
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tau", len(factor_element(d)[1]) if d else 0)
        object.__setattr__(self, "disc_abs", int(self.base.disc_L ** 2 * abs(d.norm())))

    # -- basic data ----------------------------------------------------
    @property
    def F(self) -> RealQuadraticField:
        return self.base

    @property
    def t(self) -> "ElemK":
        return ElemK(self.base.zero, self.base.one, self)

    def elem(self, u, v=0) -> "ElemK":
        F = self.base
        u = u if isinstance(u, FieldElem) else F.elem(Fraction(u))
        v = v if isinstance(v, FieldElem) else F.elem(Fraction(v))
        return ElemK(u, v, self)

    @property
    def one(self) -> "ElemK":
        return self.elem(1)

    @property
    def zero(self) -> "ElemK":
        return self.elem(0)

    def sqrt_d(self) -> "ElemK":
        """2t + a, whose square is d."""
        return self.elem(self.a, 2)

    def d_primes(self) -> List[PrimeOfL]:
        return sorted(factor_element(self.d)[1], key=lambda P: (P.norm, P.generator.x, P.generator.y))

    def same_order(self, other: "CMField") -> bool:
        """Same field over L, hence the same maximal order: d'/d is a square in L."""
        return self.base == other.base and sqrt_in_L(other.d / self.d) is not None

    def to_json(self) -> dict:
        return {"D": self.base.D, "a": self.a.to_json(), "b": self.b.to_json()}

    def __repr__(self):
        return f"CMField(D={self.base.D}, a={self.a}, b={self.b}, d={self.d})"

    # -- integral structure constants ----------------------------------
    @property
    def _table(self):
        return _structure(self)

    def mul_vec(self, c1: Sequence[int], c2: Sequence[int]) -> List[int]:
        T = self._table[0]
        out = [0, 0, 0, 0]
        for i, x in enumerate(c1):
            if not x:
                continue
            for j, y in enumerate(c2):
                if not y:
                    continue
                xy = x * y
                tij = T[i][j]
                for k in range(4):
                    if tij[k]:
                        out[k] += xy * tij[k]
        return out

    def conj_vec(self, c: Sequence[int]) -> List[int]:
        C = self._table[1]
        return [sum(c[i] * C[i][k] for i in range(4)) for k in range(4)]

    def qform_gram(self) -> List[List[int]]:
        """Integer Gram matrix G with x G x^t = 2 Tr_{L/Q}(gamma gamma-bar)."""
        return self._table[2]


@lru_cache(maxsize=None)
def _structure(K: CMField):
    basis = [K.elem(1), K.elem(K.base.omega), K.t, K.elem(0, K.base.omega)]
    T = [[(bi * bj).coords()[0] for bj in basis] for bi in basis]
    C = [bi.conj().coords()[0] for bi in basis]
    G = [[int((bi * bj.conj() + bi.conj() * bj).u.trace()) for bj in basis] for bi in basis]
    return T, C, G


def make_cm_field(base: RealQuadraticField, a: FieldElem, b: FieldElem) -> CMField:
    """Validated CM field with O_K = O_L[t]."""
    base.require_strict()
    if not (a.is_integral() and b.is_integral()):
        raise HypothesisViolation("a, b integral", f"a={a}, b={b}")
    K = CMField(base, a, b)
    d = K.d
    if not d or total_sign(d) != "totally_negative":
        raise HypothesisViolation("d totally negative", f"d={d}")
    _, fac = factor_element(d)
    for P, e in fac.items():
        if P.p == 2:
            raise HypothesisViolation("dyadic condition", f"d={d} is not prime to 2")
        if e > 1:
            raise HypothesisViolation("d squarefree", f"{P} divides d to power {e}")
    nd = d.norm()
    r = math.isqrt(int(nd))
    if r * r == nd:
        raise HypothesisViolation("not primitive", f"N(d)={nd} is a rational square (biquadratic)")
    return K


def cm_field_from_radicand(base: RealQuadraticField, delta: FieldElem) -> CMField:
    """The CM field L(sqrt delta) in the form O_L[t] (square parts stripped)."""
    unit, fac = factor_element(delta)
    d = unit
    for P, e in fac.items():
        d = d * P.generator ** (e % 2)
    eps = base.fundamental_unit
    F = base
    reps = [F.elem(x, y) for x in (0, 1) for y in (0, 1)]
    for k in range(24):
        dk = d * eps ** (2 * k)
        for a in reps:
            bb = (a * a - dk) / 4
            if bb.is_integral():
                return make_cm_field(base, a, bb)
    raise HypothesisViolation("dyadic condition", f"no a with a^2 = {d} mod 4")


def cm_field_from_json(data: dict) -> CMField:
    F = real_quadratic_field(int(data["D"]))
    if "radicand" in data:
        return cm_field_from_radicand(F, elem_from_json(F, data["radicand"]))
    return make_cm_field(F, elem_from_json(F, data["a"]), elem_from_json(F, data["b"]))


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElemK:
    """u + v t with u, v in L."""

    u: FieldElem
    v: FieldElem
    K: CMField = field(repr=False)

    def _c(self, o):
        if isinstance(o, ElemK):
            return o
        if isinstance(o, (int, Fraction, FieldElem)):
            return self.K.elem(o)
        return NotImplemented

    def __add__(self, o):
        o = self._c(o)
        if o is NotImplemented:
            return o
        return ElemK(self.u + o.u, self.v + o.v, self.K)

    __radd__ = __add__

    def __neg__(self):
        return ElemK(-self.u, -self.v, self.K)

    def __sub__(self, o):
        o = self._c(o)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._c(o)
        if o is NotImplemented:
            return o
        a, b = self.K.a, self.K.b
        vv = self.v * o.v
        return ElemK(self.u * o.u - b * vv, self.u * o.v + self.v * o.u - a * vv, self.K)

    __rmul__ = __mul__

    def conj(self) -> "ElemK":
        return ElemK(self.u - self.K.a * self.v, -self.v, self.K)

    def rel_norm(self) -> FieldElem:
        return self.u * self.u - self.K.a * self.u * self.v + self.K.b * self.v * self.v

    def rel_trace(self) -> FieldElem:
        return 2 * self.u - self.K.a * self.v

    def abs_norm(self) -> Fraction:
        return self.rel_norm().norm()

    def inverse(self) -> "ElemK":
        n = self.rel_norm()
        if not n:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        ni = n.inverse()
        return ElemK(c.u * ni, c.v * ni, self.K)

    def __truediv__(self, o):
        o = self._c(o)
        return self * o.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        r = self.K.one
        base = self
        while k:
            if k & 1:
                r = r * base
            base = base * base
            k >>= 1
        return r

    def __bool__(self):
        return bool(self.u) or bool(self.v)

    def coords(self) -> Tuple[List[int], int]:
        """Integer coordinates on (1, omega, t, omega t) and a common denominator."""
        den = math.lcm(self.u.den, self.v.den)
        cu, cv = den // self.u.den, den // self.v.den
        return [self.u.x * cu, self.u.y * cu, self.v.x * cv, self.v.y * cv], den

    @staticmethod
    def from_coords(K: CMField, c: Sequence[int], den: int = 1) -> "ElemK":
        F = K.base
        return ElemK(F.elem(c[0], c[1], den), F.elem(c[2], c[3], den), K)

    def is_integral(self) -> bool:
        return self.u.is_integral() and self.v.is_integral()

    def to_json(self) -> dict:
        return {"u": self.u.to_json(), "v": self.v.to_json()}

    def __str__(self):
        return f"({self.u}) + ({self.v})*t"


def elemK_from_json(K: CMField, data: dict) -> ElemK:
    return ElemK(elem_from_json(K.base, data["u"]), elem_from_json(K.base, data["v"]), K)


# ---------------------------------------------------------------------------
# Ideals
# ---------------------------------------------------------------------------

def _normalize(rows: List[List[int]], den: int) -> Tuple[Tuple[Vec, ...], int]:
    H = hnf(rows)
    if len(H) != 4:
        raise ValueError("zero or degenerate ideal")
    g = den
    for r in H:
        for v in r:
            g = math.gcd(g, v)
    if g > 1:
        H = [[v // g for v in r] for r in H]
        den //= g
    return tuple(tuple(r) for r in H), den


@dataclass(frozen=True)
class IdealK:
    """Fractional ideal M/den of O_K, M in row Hermite normal form."""

    M: Tuple[Vec, ...]
    den: int
    K: CMField = field(repr=False)

    # -- construction --------------------------------------------------
    @staticmethod
    def from_rows(K: CMField, rows: Iterable[Sequence[int]], den: int = 1) -> "IdealK":
        M, den = _normalize([list(r) for r in rows], den)
        return IdealK(M, den, K)

    @staticmethod
    def from_gens(K: CMField, gens: Sequence) -> "IdealK":
        """The O_K-module generated by the given elements."""
        items = []
        for g in gens:
            if not isinstance(g, ElemK):
                g = K.elem(g)
            items.append(g.coords())
        den = math.lcm(*[e for _, e in items]) if items else 1
        unit_basis = [[int(i == j) for j in range(4)] for i in range(4)]
        rows = []
        for c, e in items:
            c = [v * (den // e) for v in c]
            for bj in unit_basis:
                rows.append(K.mul_vec(c, bj))
        return IdealK.from_rows(K, rows, den)

    @staticmethod
    def unit(K: CMField) -> "IdealK":
        return IdealK(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)), 1, K)

    @staticmethod
    def extend(K: CMField, I: IdealL) -> "IdealK":
        return IdealK.from_gens(K, [K.elem(I.generator)])

    # -- arithmetic ----------------------------------------------------
    def __mul__(self, other):
        K = self.K
        if isinstance(other, (ElemK, FieldElem, int, Fraction)):
            other = IdealK.from_gens(K, [other])
        rows = [K.mul_vec(r, s) for r in self.M for s in other.M]
        return IdealK.from_rows(K, rows, self.den * other.den)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IdealK":
        if k < 0:
            return self.inv() ** (-k)
        r = IdealK.unit(self.K)
        base = self
        while k:
            if k & 1:
                r = r * base
            base = base * base
            k >>= 1
        return r

    def __add__(self, other: "IdealK") -> "IdealK":
        den = math.lcm(self.den, other.den)
        rows = [[v * (den // self.den) for v in r] for r in self.M]
        rows += [[v * (den // other.den) for v in r] for r in other.M]
        return IdealK.from_rows(self.K, rows, den)

    def conj(self) -> "IdealK":
        return IdealK.from_rows(self.K, [self.K.conj_vec(r) for r in self.M], self.den)

    def intersect_L(self) -> List[List[Fraction]]:
        """Z-basis (omega-coordinates) of I intersected with L."""
        perm = [[r[2], r[3], r[0], r[1]] for r in self.M]
        H = hnf(perm)
        return [[Fraction(r[2], self.den), Fraction(r[3], self.den)] for r in H if r[0] == 0 and r[1] == 0]

    def rel_norm(self) -> IdealL:
        """N_{K/L}(I) via the absolute norm and a generator search."""
        return _rel_norm(self)

    def abs_norm(self) -> Fraction:
        p = 1
        for i, r in enumerate(self.M):
            p *= r[i]
        return Fraction(p, self.den ** 4)

    def inv(self) -> "IdealK":
        nu = self.rel_norm().generator
        return self.conj() * self.K.elem(nu.inverse())

    def __truediv__(self, other: "IdealK") -> "IdealK":
        return self * other.inv()

    def contains(self, g: ElemK) -> bool:
        c, e = g.coords()
        scaled = [v * self.den for v in c]
        if any(v % e for v in scaled):
            return False
        return solve_in_span(self.M, [v // e for v in scaled]) is not None

    def contains_ideal(self, other: "IdealK") -> bool:
        return all(self.contains(ElemK.from_coords(self.K, r, other.den)) for r in other.M)

    def is_integral(self) -> bool:
        return self.den == 1

    def is_one(self) -> bool:
        return self == IdealK.unit(self.K)

    def basis(self) -> List[ElemK]:
        return [ElemK.from_coords(self.K, r, self.den) for r in self.M]

    def gram(self) -> Tuple[List[List[int]], int]:
        """(G, s) with Tr_{L/Q}(gamma gamma-bar) = c G c^t / s for gamma = c * basis."""
        G = self.K.qform_gram()
        GM = matmul(matmul([list(r) for r in self.M], G), transpose(self.M))
        return GM, 2 * self.den * self.den

    def coprime_to(self, other: "IdealK") -> bool:
        return (self + other).is_one()

    def ol_form(self) -> Tuple[List[FieldElem], int]:
        """Upper-triangular O_L-basis {g1, c + g2 t} of den*I, and den."""
        F = self.K.base
        H = hnf([[r[2], r[3], r[0], r[1]] for r in self.M])
        top = [h for h in H if h[0] or h[1]]
        low = [[h[2], h[3]] for h in H if not (h[0] or h[1])]
        g1 = _generator_of_L_lattice(F, low)
        g2 = _generator_of_L_lattice(F, [[h[0], h[1]] for h in top])
        coef = solve_in_span([[h[0], h[1]] for h in top], [g2.x, g2.y])
        c = F.elem(sum(k * h[2] for k, h in zip(coef, top)), sum(k * h[3] for k, h in zip(coef, top)))
        c = reduce_mod(c, IdealL(g1))
        return [g1, c, g2], self.den

    def to_json(self) -> dict:
        (g1, c, g2), den = self.ol_form()
        return {"basis": [[g1.to_json(), ["0", "0", "1"]], [c.to_json(), g2.to_json()]],
                "den": str(den), "zbasis": [[str(v) for v in r] for r in self.M]}

    def __str__(self):
        return f"IdealK({[list(r) for r in self.M]}/{self.den})"


def ideal_from_json(K: CMField, data: dict) -> IdealK:
    if "zbasis" in data:
        return IdealK.from_rows(K, [[int(v) for v in r] for r in data["zbasis"]], int(data["den"]))
    F = K.base
    (g1, _), (c, g2) = data["basis"]
    g1, c, g2 = elem_from_json(F, g1), elem_from_json(F, c), elem_from_json(F, g2)
    I = IdealK.from_gens(K, [K.elem(g1), ElemK(c, g2, K)])
    den = int(data.get("den", 1))
    return I * K.elem(Fraction(1, den)) if den != 1 else I


def _generator_of_L_lattice(F: RealQuadraticField, rows: List[List[int]]) -> FieldElem:
    """Canonical totally positive generator of the O_L-ideal with the given
    integral Z-basis rows (omega coordinates)."""
    H = [r for r in hnf(rows) if any(r)]
    n = abs(H[0][0] * H[1][1])
    if n == 0 or len(H) != 2:
        raise ValueError("lattice is not an O_L-ideal")
    gens = [F.elem(*r) for r in H]
    # valuations of an ideal are minima over any generating set
    g = F.one
    for q in factorint(n):
        for P in primes_above(F, q):
            v = min(valuation(x, P) for x in gens if x)
            if v:
                g = g * P.generator ** v
    if abs(g.norm()) != n:
        raise ValueError("lattice is not an O_L-ideal")
    return totally_positive_generator(g)


def _rel_norm(I: IdealK) -> IdealL:
    K, F = I.K, I.K.base
    J = I * I.conj()
    lat = J.intersect_L()
    den = J.den
    rows = [[int(v * den) for v in r] for r in lat]
    g = _generator_of_L_lattice(F, rows)
    return IdealL(totally_positive_generator(g / den))


# ---------------------------------------------------------------------------
# Primes of K
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeOfK:
    P: PrimeOfL
    kind: str  # split | inert | ramified
    ideal: IdealK
    index: int = 0

    @property
    def norm(self) -> int:
        return int(self.ideal.abs_norm())

    @property
    def f_over_L(self) -> int:
        return 2 if self.kind == "inert" else 1

    @property
    def e_over_L(self) -> int:
        return 2 if self.kind == "ramified" else 1

    def __str__(self):
        return f"Q[{self.P}:{self.kind}{self.index}]"


@lru_cache(maxsize=None)
def splitting_in_K(P: PrimeOfL, K: CMField) -> Tuple[str, Tuple[PrimeOfK, ...]]:
    """Decomposition of P in K from t^2 + a t + b over the residue field."""
    R = ResidueField(P)
    pi = K.elem(P.generator)
    aa, bb = R.reduce(K.a), R.reduce(K.b)
    if P.p != 2:
        dd = R.reduce(K.d)
        leg = R.legendre(dd)
        kind = {0: "ramified", 1: "split", -1: "inert"}[leg]
        roots = []
        if kind != "inert":
            half = R.inv(R.add(R.one, R.one))
            sq = R.sqrt(dd)
            roots = [R.mul(R.add(R.neg(aa), sq), half)]
            if kind == "split":
                roots.append(R.mul(R.sub(R.neg(aa), sq), half))
            roots.sort()
    else:
        roots = [r for r in R.elements()
                 if R.is_zero(R.add(R.add(R.mul(r, r), R.mul(aa, r)), bb))]
        kind = "inert" if not roots else ("ramified" if len(roots) == 1 else "split")
    if kind == "inert":
        return kind, (PrimeOfK(P, kind, IdealK.from_gens(K, [pi])),)
    out = []
    for i, r in enumerate(roots):
        ideal = IdealK.from_gens(K, [pi, K.t - K.elem(R.lift(r))])
        out.append(PrimeOfK(P, kind, ideal, i))
    return kind, tuple(out)


def primes_of_K_above(K: CMField, q: int) -> List[PrimeOfK]:
    out = []
    for P in primes_above(K.base, q):
        out.extend(splitting_in_K(P, K)[1])
    return out


def ramified_prime_above(K: CMField, P: PrimeOfL) -> PrimeOfK:
    kind, prs = splitting_in_K(P, K)
    if kind != "ramified":
        raise ValueError(f"{P} is not ramified in K")
    return prs[0]


def ideal_valuation(I: IdealK, Q: PrimeOfK) -> int:
    """Exponent of Q in the fractional ideal I."""
    K = I.K
    q = Q.P.p
    e_q = Q.P.e * Q.e_over_L
    v_den = 0
    den = I.den
    while den % q == 0:
        den //= q
        v_den += 1
    J = IdealK(I.M, 1, K)
    # upper bound from the norm
    n = J.abs_norm()
    vmax = 0
    nn = int(n)
    while nn % Q.norm == 0:
        nn //= Q.norm
        vmax += 1
    v = 0
    power = IdealK.unit(K)
    while v < vmax:
        nxt = power * Q.ideal
        if not nxt.contains_ideal(J):
            break
        power = nxt
        v += 1
    return v - e_q * v_den


def factor_ideal(I: IdealK) -> Dict[PrimeOfK, int]:
    """Prime factorization of a fractional ideal of O_K."""
    n = I.abs_norm()
    qs = set(factorint(n.numerator)) | set(factorint(n.denominator)) | set(factorint(I.den))
    out = {}
    for q in sorted(qs):
        if q == 1:
            continue
        for Q in primes_of_K_above(I.K, q):
            v = ideal_valuation(I, Q)
            if v:
                out[Q] = v
    return out


# ---------------------------------------------------------------------------
# Lattice searches
# ---------------------------------------------------------------------------

def enumerate_elements_with_relative_norm(I: IdealK, target: FieldElem) -> List[ElemK]:
    """All gamma in I with gamma * gamma-bar = target (target totally positive)."""
    K = I.K
    if not target:
        return []
    if total_sign(target) != "totally_positive":
        return []
    G, s = I.gram()
    level = target.trace() * s
    if level.denominator != 1:
        return []
    basis_rows, den = I.M, I.den
    out = []
    for v in short_vectors(G, level, exact_level=True):
        c = [sum(v[i] * basis_rows[i][j] for i in range(4)) for j in range(4)]
        g = ElemK.from_coords(K, c, den)
        if g.rel_norm() == target:
            out.append(g)
    return out


def is_principal(I: IdealK) -> Optional[ElemK]:
    """A generator of I, or None if I is not principal."""
    nu = I.rel_norm().generator
    for g in enumerate_elements_with_relative_norm(I, nu):
        return g
    return None


@lru_cache(maxsize=None)
def roots_of_unity_count(K: CMField) -> int:
    """w_K: elements of O_K with gamma gamma-bar = 1 (all conjugates of modulus one)."""
    return len(enumerate_elements_with_relative_norm(IdealK.unit(K), K.base.one))


@lru_cache(maxsize=None)
def unit_index(K: CMField) -> int:
    """Q_K = [O_K^x : mu_K O_L^x]. Totally positive units of L that are norms
    from K but not squares in L would make it 2."""
    eta = K.base.tp_unit
    if K.base.fundamental_unit.norm() == -1:
        return 1  # eta = eps^2 is already a square
    return 2 if enumerate_elements_with_relative_norm(IdealK.unit(K), eta) else 1


def unit_quotient_order(K: CMField) -> int:
    """#(O_K^x / O_L^x) = w_K * Q_K / 2."""
    return roots_of_unity_count(K) * unit_index(K) // 2


def minkowski_bound(K: CMField) -> float:
    # n = 4, r2 = 2: (4!/4^4) (4/pi)^2 sqrt|disc|
    return (24 / 256) * (4 / math.pi) ** 2 * math.sqrt(K.disc_abs)


# ---------------------------------------------------------------------------
# Class group
# ---------------------------------------------------------------------------

@dataclass
class ClassGroup:
    K: CMField
    structure: List[int]
    factor_base: List[PrimeOfK]
    fb_classes: List[Tuple[int, ...]]
    representatives: List[IdealK] = field(default_factory=list)
    rep_classes: List[Tuple[int, ...]] = field(default_factory=list)
    discrete_log: Dict[PrimeOfK, Tuple[int, ...]] = field(default_factory=dict)
    avoid: Optional[IdealL] = None

    @property
    def order(self) -> int:
        return math.prod(self.structure)

    @property
    def identity(self) -> Tuple[int, ...]:
        return tuple(0 for _ in self.structure)

    def add(self, x, y):
        return tuple((a + b) % s for a, b, s in zip(x, y, self.structure))

    def scale(self, x, k: int):
        return tuple((a * k) % s for a, s in zip(x, self.structure))

    def neg(self, x):
        return self.scale(x, -1)

    def elements(self) -> List[Tuple[int, ...]]:
        return [tuple(e) for e in itertools.product(*[range(s) for s in self.structure])]

    def representative(self, c) -> IdealK:
        return self.representatives[self.rep_classes.index(tuple(c))]


def _prime_classes_from_relations(n: int, rels: List[List[int]]):
    diag, U, V = smith(rels)
    # exponent vector e maps to (e V)_i mod diag_i
    keep = [i for i in range(n) if i >= len(diag) or diag[i] != 1]
    structure = []
    for i in keep:
        if i >= len(diag) or diag[i] == 0:
            return None
        structure.append(diag[i])
    classes = []
    for j in range(n):
        row = V[j]
        classes.append(tuple(row[i] % diag[i] for i in keep))
    return structure, classes


def _short_elements(I: IdealK, bound_factor: int, limit: int) -> List[ElemK]:
    """Nonzero elements of I of small Tr(gamma gamma-bar), smallest first."""
    G, s = I.gram()
    T = lll_gram(G)
    mins = min(sum(T[i][a] * G[a][b] * T[i][b] for a in range(4) for b in range(4)) for i in range(4))
    out = []
    for v in sorted(short_vectors(G, mins * bound_factor), key=lambda v: sum(
            v[i] * G[i][j] * v[j] for i in range(4) for j in range(4))):
        c = [sum(v[i] * I.M[i][j] for i in range(4)) for j in range(4)]
        out.append(ElemK.from_coords(I.K, c, I.den))
        if len(out) >= limit:
            break
    return out


def _smooth_vector(I: IdealK, fb_index: Dict[PrimeOfK, int], n: int) -> Optional[List[int]]:
    fac = factor_ideal(I)
    vec = [0] * n
    for Q, e in fac.items():
        if Q not in fb_index:
            return None
        vec[fb_index[Q]] += e
    return vec


def class_group(K: CMField, avoid: Optional[IdealL] = None, relation_budget: int = 4000) -> ClassGroup:
    """Class group from a Minkowski factor base, relations from short
    elements, Smith normal form, and a final non-principality certificate."""
    M = minkowski_bound(K)
    fb: List[PrimeOfK] = []
    for q in range(2, int(M) + 1):
        if isprime(q):
            fb.extend(Q for Q in primes_of_K_above(K, q) if Q.norm <= M)
    n = len(fb)
    if n == 0:
        G = ClassGroup(K, [], [], [])
        return _finish(G, avoid)
    idx = {Q: i for i, Q in enumerate(fb)}
    rels: List[List[int]] = []
    tried = 0
    lattices = [IdealK.unit(K)] + [Q.ideal for Q in fb]
    lattices += [fb[i].ideal * fb[j].ideal for i in range(n) for j in range(i, n)]
    factor = 4
    result = None
    while result is None:
        for I in lattices:
            base_vec = _smooth_vector(I, idx, n)
            for g in _short_elements(I, factor, 40):
                tried += 1
                J = IdealK.from_gens(K, [g])
                vec = _smooth_vector(J, idx, n)
                if vec is not None and any(vec):
                    rels.append(vec)
        if rels:
            result = _prime_classes_from_relations(n, rels)
        if tried > relation_budget:
            raise RelationSearchIncomplete(f"relation rank deficient after {tried} elements")
        factor *= 2
    structure, classes = result
    # certify: no non-identity class is principal
    while True:
        G = ClassGroup(K, structure, fb, classes)
        orders = [_element_order(G, c) for c in classes]
        extra = None
        for c in G.elements():
            if c == G.identity:
                continue
            e = _exponents_for(G, c, orders)
            I = IdealK.unit(K)
            for Q, k in zip(fb, e):
                if k:
                    I = I * Q.ideal ** k
            if is_principal(I) is not None:
                extra = e
                break
        if extra is None:
            break
        rels.append(extra)
        structure, classes = _prime_classes_from_relations(n, rels)
    G = ClassGroup(K, structure, fb, classes)
    G.discrete_log = {Q: c for Q, c in zip(fb, classes)}
    return _finish(G, avoid)


def _element_order(G: ClassGroup, c) -> int:
    k, x = 1, tuple(c)
    while x != G.identity:
        x = G.add(x, c)
        k += 1
    return k


def _exponents_for(G: ClassGroup, target, orders) -> Optional[List[int]]:
    """Nonnegative exponents on the factor base realizing a class (BFS)."""
    n = len(G.factor_base)
    best = {G.identity: [0] * n}
    frontier = [G.identity]
    while frontier and tuple(target) not in best:
        nxt = []
        for c in frontier:
            for j in range(n):
                e = list(best[c])
                if e[j] + 1 >= orders[j] and orders[j] > 1:
                    continue
                e[j] += 1
                c2 = G.add(c, G.fb_classes[j])
                if c2 not in best:
                    best[c2] = e
                    nxt.append(c2)
        frontier = nxt
    return best.get(tuple(target))


def _finish(G: ClassGroup, avoid: Optional[IdealL]) -> ClassGroup:
    G.avoid = avoid
    choose_representatives(G, avoid)
    return G


def _avoid_primes(K: CMField, avoid: Optional[IdealL]) -> set:
    if avoid is None or avoid.generator == K.base.one:
        return set()
    return {P.p for P in factor_element(avoid.generator)[1]}


def prime_class(G: ClassGroup, Q: PrimeOfK):
    if Q in G.discrete_log:
        return G.discrete_log[Q]
    c = class_of(Q.ideal, G)
    G.discrete_log[Q] = c
    return c


def choose_representatives(G: ClassGroup, avoid: Optional[IdealL]) -> None:
    """Integral representatives of every class, coprime to avoid, built from
    products of small primes outside the avoided set."""
    K = G.K
    bad = _avoid_primes(K, avoid) | {2}
    reps = {G.identity: IdealK.unit(K)}
    q = 2
    while len(reps) < G.order:
        q += 1
        if not isprime(q) or q in bad:
            continue
        for Q in primes_of_K_above(K, q):
            c = prime_class(G, Q)
            for c0, I0 in list(reps.items()):
                c2 = G.add(c0, c)
                if c2 not in reps:
                    reps[c2] = I0 * Q.ideal
    order = sorted(reps)
    G.rep_classes = order
    G.representatives = [reps[c] for c in order]


def class_of(I: IdealK, G: ClassGroup):
    """Class of a fractional ideal in the coordinates of G."""
    K = G.K
    if G.order == 1:
        return G.identity
    idx = {Q: i for i, Q in enumerate(G.factor_base)}
    n = len(G.factor_base)
    vec = _smooth_vector(I, idx, n)
    if vec is not None:
        return _vec_class(G, vec)
    Iinv = I.inv()
    for g in _short_elements(Iinv, 8, 60):
        J = I * g
        vec = _smooth_vector(J, idx, n)
        if vec is not None:
            return _vec_class(G, vec)
    for c, R in zip(G.rep_classes, G.representatives):
        if is_principal(I * R.inv()) is not None:
            return c
    raise RuntimeError("class_of failed: no representative matched")


def _vec_class(G: ClassGroup, vec: Sequence[int]):
    c = G.identity
    for k, cj in zip(vec, G.fb_classes):
        c = G.add(c, G.scale(cj, k))
    return c


# ---------------------------------------------------------------------------
# Ideals with prescribed relative norm
# ---------------------------------------------------------------------------

def ideals_of_relative_norm(K: CMField, n: IdealL) -> List[Dict[PrimeOfK, int]]:
    """All integral ideals of O_K with N_{K/L} = n, as exponent dictionaries."""
    _, fac = factor_element(n.generator)
    choices: List[List[Dict[PrimeOfK, int]]] = []
    for P, e in fac.items():
        if e < 0:
            return []
        kind, prs = splitting_in_K(P, K)
        if kind == "split":
            Q1, Q2 = prs
            choices.append([{Q1: i, Q2: e - i} for i in range(e + 1)])
        elif kind == "inert":
            if e % 2:
                return []
            choices.append([{prs[0]: e // 2}])
        else:
            choices.append([{prs[0]: e}])
    out = []
    for combo in itertools.product(*choices):
        dct: Dict[PrimeOfK, int] = {}
        for part in combo:
            for Q, k in part.items():
                if k:
                    dct[Q] = k
        out.append(dct)
    return out


def ideal_from_exponents(K: CMField, exps: Dict[PrimeOfK, int]) -> IdealK:
    I = IdealK.unit(K)
    for Q, k in exps.items():
        I = I * Q.ideal ** k
    return I


def count_ideals_norm_in_class(n: IdealL, c, K: CMField, G: ClassGroup,
                               want_witnesses: bool = False):
    """Number of integral ideals with N_{K/L} = n in the class c (and witnesses)."""
    count, wit = 0, []
    for exps in ideals_of_relative_norm(K, n):
        cls = G.identity
        for Q, k in exps.items():
            cls = G.add(cls, G.scale(prime_class(G, Q), k))
        if cls == tuple(c):
            count += 1
            if want_witnesses:
                wit.append(exps)
    return (count, wit) if want_witnesses else count
