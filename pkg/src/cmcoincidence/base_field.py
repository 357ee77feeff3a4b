"""Exact arithmetic in a real quadratic field L = Q(sqrt D) and its ring of
integers O_L = Z[omega].

omega is (1 + sqrt D)/2 when D = 1 mod 4 and sqrt D otherwise, so that
omega^2 = s*omega + c with (s, c) = (1, (D-1)/4) or (0, D). Elements are
stored as (x + y*omega)/den in lowest terms. The first real embedding sends
sqrt D to the positive root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, getcontext, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import factorint, isprime, legendre_symbol, sqrt_mod

from .errors import HypothesisViolation
from .intlat import hnf, hnf_transform, solve_in_span

Number = Union[int, Fraction]


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(n).values())


@dataclass(frozen=True)
class RealQuadraticField:
    """The field Q(sqrt D) together with its unit and class number data."""

    D: int
    omega_kind: str = field(init=False, compare=False)
    disc_L: int = field(init=False, compare=False)
    s: int = field(init=False, compare=False, repr=False)
    c: int = field(init=False, compare=False, repr=False)
    _unit: Tuple[int, int] = field(init=False, compare=False, repr=False)
    strict_class_number_one: bool = field(init=False, compare=False)

    def __post_init__(self):
        D = self.D
        if D <= 1 or not _squarefree(D):
            raise HypothesisViolation("D squarefree > 1", f"D={D}")
        if D % 4 == 1:
            kind, s, c, disc = "half", 1, (D - 1) // 4, D
        else:
            kind, s, c, disc = "sqrt", 0, D, 4 * D
        object.__setattr__(self, "omega_kind", kind)
        object.__setattr__(self, "disc_L", disc)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "_unit", _fundamental_unit(D, s))
        object.__setattr__(self, "strict_class_number_one", _strict_h1(self))

    # -- constructors -------------------------------------------------
    def elem(self, x: Number, y: Number = 0, den: int = 1) -> "FieldElem":
        return FieldElem.make(self, x, y, den)

    @property
    def zero(self) -> "FieldElem":
        return self.elem(0)

    @property
    def one(self) -> "FieldElem":
        return self.elem(1)

    @property
    def omega(self) -> "FieldElem":
        return self.elem(0, 1)

    @property
    def sqrtD(self) -> "FieldElem":
        # sqrt D = 2*omega - s
        return self.elem(-self.s, 2) if self.omega_kind == "half" else self.elem(0, 1)

    @property
    def fundamental_unit(self) -> "FieldElem":
        return self.elem(*self._unit)

    @property
    def tp_unit(self) -> "FieldElem":
        """Generator of the totally positive units (eps^2 when N(eps) = -1)."""
        e = self.fundamental_unit
        if e.norm() == -1:
            return e * e
        return e if e.trace() > 0 else -e

    def from_sqrt(self, a: Number, b: Number) -> "FieldElem":
        """The element a + b*sqrt(D)."""
        a, b = Fraction(a), Fraction(b)
        if self.omega_kind == "half":
            # a + b(2w - 1) = (a - b) + 2b w
            X, Y = a - b, 2 * b
        else:
            X, Y = a, b
        den = math.lcm(X.denominator, Y.denominator)
        return self.elem(int(X * den), int(Y * den), den)

    def require_strict(self) -> None:
        if not self.strict_class_number_one:
            raise HypothesisViolation("strict class number one", f"fails for D={self.D}")

    def to_json(self) -> dict:
        return {"D": self.D}


@lru_cache(maxsize=None)
def real_quadratic_field(D: int) -> RealQuadraticField:
    return RealQuadraticField(D)


@dataclass(frozen=True)
class FieldElem:
    """(x + y*omega)/den with gcd(x, y, den) = 1 and den > 0."""

    x: int
    y: int
    den: int
    F: RealQuadraticField = field(repr=False)

    @staticmethod
    def make(F: RealQuadraticField, x: Number, y: Number = 0, den: int = 1) -> "FieldElem":
        if isinstance(x, Fraction) or isinstance(y, Fraction):
            x, y = Fraction(x), Fraction(y)
            m = math.lcm(x.denominator, y.denominator)
            x, y, den = int(x * m), int(y * m), den * m
        x, y, den = int(x), int(y), int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            x, y, den = -x, -y, -den
        g = math.gcd(math.gcd(x, y), den)
        if g > 1:
            x, y, den = x // g, y // g, den // g
        return FieldElem(x, y, den, F)

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.F != self.F:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            o = Fraction(other)
            return FieldElem.make(self.F, o.numerator, 0, o.denominator)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem.make(self.F, self.x * o.den + o.x * self.den,
                              self.y * o.den + o.y * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(-self.x, -self.y, self.den, self.F)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        s, c = self.F.s, self.F.c
        a, b, u, v = self.x, self.y, o.x, o.y
        return FieldElem.make(self.F, a * u + c * b * v, a * v + b * u + s * b * v,
                              self.den * o.den)

    __rmul__ = __mul__

    def conj(self) -> "FieldElem":
        return FieldElem.make(self.F, self.x + self.F.s * self.y, -self.y, self.den)

    def inverse(self) -> "FieldElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        cj = self.conj()
        return FieldElem.make(self.F, Fraction(cj.x) / n, Fraction(cj.y) / n, cj.den)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.F.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __bool__(self):
        return self.x != 0 or self.y != 0

    # -- invariants ----------------------------------------------------
    def norm(self) -> Fraction:
        s, c = self.F.s, self.F.c
        return Fraction(self.x * self.x + s * self.x * self.y - c * self.y * self.y,
                        self.den * self.den)

    def trace(self) -> Fraction:
        return Fraction(2 * self.x + self.F.s * self.y, self.den)

    def norm_trace(self) -> Tuple[Fraction, Fraction]:
        return self.norm(), self.trace()

    def is_integral(self) -> bool:
        return self.den == 1

    def is_rational(self) -> bool:
        return self.y == 0

    def rational(self) -> Fraction:
        if self.y:
            raise ValueError("not rational")
        return Fraction(self.x, self.den)

    def sqrt_coords(self) -> Tuple[Fraction, Fraction]:
        """(A, B) with self = A + B*sqrt(D)."""
        if self.F.omega_kind == "half":
            return Fraction(2 * self.x + self.y, 2 * self.den), Fraction(self.y, 2 * self.den)
        return Fraction(self.x, self.den), Fraction(self.y, self.den)

    def embedding_signs(self) -> Tuple[int, int]:
        """Exact signs of sigma_1 and sigma_2 (sigma_1(sqrt D) > 0)."""
        A, B = self.sqrt_coords()
        return _sign_a_b_sqrt(A, B, self.F.D), _sign_a_b_sqrt(A, -B, self.F.D)

    def embeddings(self) -> Tuple[float, float]:
        """Float images (diagnostics and enumeration boxes only)."""
        A, B = self.sqrt_coords()
        r = math.sqrt(self.F.D)
        return float(A) + float(B) * r, float(A) - float(B) * r

    def total_sign(self) -> str:
        return total_sign(self)

    def to_json(self) -> List[str]:
        return [str(self.x), str(self.y), str(self.den)]

    def __str__(self):
        A, B = self.sqrt_coords()
        if B == 0:
            return str(A)
        if A == 0:
            return f"{B}*sqrt({self.F.D})"
        return f"{A}{'+' if B > 0 else '-'}{abs(B)}*sqrt({self.F.D})"


def _sign_a_b_sqrt(A: Fraction, B: Fraction, D: int) -> int:
    """Sign of A + B*sqrt(D), exactly."""
    sa = (A > 0) - (A < 0)
    sb = (B > 0) - (B < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare A^2 with B^2 D
    diff = A * A - B * B * D
    if diff == 0:
        return 0
    return sa if diff > 0 else sb


def elem_from_json(F: RealQuadraticField, data: Sequence) -> FieldElem:
    if isinstance(data, (int, str)):
        return F.elem(int(data))
    if len(data) == 2:
        return F.elem(int(data[0]), int(data[1]))
    return F.elem(int(data[0]), int(data[1]), int(data[2]))


def arith(a: FieldElem, b: Optional[FieldElem], op: str) -> FieldElem:
    """Functional front end over the operator overloads."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise ZeroDivisionError("division by zero")
        return a / b
    if op == "conj":
        return a.conj()
    raise ValueError(f"unknown op {op}")


def norm_trace(a: FieldElem) -> Tuple[Fraction, Fraction]:
    return a.norm(), a.trace()


def total_sign(a: FieldElem) -> str:
    """Sign type decided from N and Tr only."""
    n, t = a.norm(), a.trace()
    if n == 0:
        return "zero" if not a else "mixed"
    if n < 0:
        return "mixed"
    return "totally_positive" if t > 0 else "totally_negative"


# ---------------------------------------------------------------------------
# Units and class number
# ---------------------------------------------------------------------------

def _pell_fundamental(D: int) -> Tuple[int, int]:
    """Smallest x + y sqrt D > 1 with x^2 - D y^2 = +-1 (continued fraction of sqrt D)."""
    a0 = math.isqrt(D)
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while p * p - D * q * q not in (1, -1):
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


def _fundamental_unit(D: int, s: int) -> Tuple[int, int]:
    """omega-coordinates of the fundamental unit > 1."""
    px, py = _pell_fundamental(D)
    if D % 8 == 5:
        # the fundamental unit may be (u + v sqrt D)/2 with u, v odd; then its cube is in Z[sqrt D]
        digits = len(str(px)) + 30
        with localcontext() as ctx:
            ctx.prec = digits
            eta = Decimal(px) + Decimal(py) * Decimal(D).sqrt()
            root = eta ** (Decimal(1) / Decimal(3))
            for nrm in (1, -1):
                conj = Decimal(nrm) / root
                u = int((root + conj).to_integral_value())
                v = int(((root - conj) / Decimal(D).sqrt()).to_integral_value())
                if u % 2 and v % 2 and u * u - D * v * v == 4 * nrm:
                    # cube of (u + v sqrt D)/2 should equal px + py sqrt D
                    A, B = Fraction(u, 2), Fraction(v, 2)
                    A2, B2 = A * A + B * B * D, 2 * A * B
                    A3, B3 = A2 * A + B2 * B * D, A2 * B + B2 * A
                    if (A3, B3) == (px, py):
                        # (u + v sqrt D)/2 = (u - v)/2 + v omega
                        return (u - v) // 2, v
    if s == 1:
        return px - py, 2 * py
    return px, py


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    return Fraction(a, b) if a * a == q.numerator and b * b == q.denominator else None


def sqrt_in_L(r: FieldElem) -> Optional[FieldElem]:
    """A square root of r in L, or None. From u^2 = r: N(u) = +-n with
    n^2 = N(r), and Tr(u)^2 = Tr(r) + 2 N(u)."""
    F = r.F
    if not r:
        return r
    n = _rational_sqrt(Fraction(r.norm()))
    if n is None:
        return None
    for s in (n, -n):
        T = _rational_sqrt(Fraction(r.trace()) + 2 * s)
        if T is None:
            continue
        if T:
            u = (r + F.elem(s)) / F.elem(T)
        else:
            y = _rational_sqrt(r.rational() / F.D) if r.is_rational() else None
            if y is None:
                continue
            u = F.sqrtD * F.elem(y)
        if u * u == r:
            return u
    return None


def tp_elements_of_norm(F: RealQuadraticField, n: int) -> List[FieldElem]:
    """All totally positive x in O_L with N(x) = n, up to multiplication by
    totally positive units (one representative per orbit is guaranteed to be
    among the output; the list may contain several members of an orbit)."""
    if n <= 0:
        return []
    eta = F.tp_unit.embeddings()[0]
    T = int(2 * math.sqrt(n * eta)) + 2
    Delta = F.s * F.s + 4 * F.c
    out = []
    for t in range(1, T + 1):
        num = t * t - 4 * n
        if num < 0 or num % Delta:
            continue
        y2 = num // Delta
        y = math.isqrt(y2)
        if y * y != y2:
            continue
        for yy in {y, -y}:
            if (t - F.s * yy) % 2 == 0:
                out.append(F.elem((t - F.s * yy) // 2, yy))
    return out


def _strict_h1(F: RealQuadraticField) -> bool:
    eps = F.fundamental_unit
    if eps.norm() != -1:
        return False
    bound = math.isqrt(F.disc_L) // 2 + 1
    for q in range(2, bound + 1):
        if not isprime(q):
            continue
        if q > math.sqrt(F.disc_L) / 2:
            break
        if F.disc_L % q and _split_kind(F, q) == "inert":
            continue
        if not tp_elements_of_norm(F, q):
            return False
    return True


def _split_kind(F: RealQuadraticField, q: int) -> str:
    if F.disc_L % q == 0:
        return "ramified"
    if q == 2:
        return "split" if F.c % 2 == 0 else "inert"
    return "split" if legendre_symbol(F.disc_L % q, q) == 1 else "inert"


# ---------------------------------------------------------------------------
# Canonical totally positive generators
# ---------------------------------------------------------------------------

def _log_abs_embeddings(a: FieldElem) -> Tuple[float, float]:
    A, B = a.sqrt_coords()
    with localcontext() as ctx:
        ctx.prec = 60
        r = Decimal(a.F.D).sqrt()
        Ad = Decimal(A.numerator) / Decimal(A.denominator)
        Bd = Decimal(B.numerator) / Decimal(B.denominator)
        s1, s2 = abs(Ad + Bd * r), abs(Ad - Bd * r)
        return float(s1.ln()), float(s2.ln())


def make_totally_positive(a: FieldElem) -> FieldElem:
    """A totally positive unit multiple of a (a != 0)."""
    F = a.F
    if not a:
        raise ZeroDivisionError("zero has no totally positive associate")
    if a.norm() < 0:
        a = a * F.fundamental_unit
        if a.norm() < 0:
            raise HypothesisViolation("strict class number one", "no unit of norm -1")
    if a.trace() < 0:
        a = -a
    return a


def totally_positive_generator(a: FieldElem) -> FieldElem:
    """Canonical totally positive generator of the ideal (a).

    Among a*u for totally positive units u, take the element of least trace;
    the trace is convex in the unit exponent, so a small window around the
    balancing exponent suffices. Ties go to the larger omega-coordinate.
    """
    a = make_totally_positive(a)
    eta = a.F.tp_unit
    l1, l2 = _log_abs_embeddings(a)
    L = math.log(eta.embeddings()[0])
    k0 = round((l2 - l1) / (2 * L))
    best = None
    base = a * eta ** (k0 - 2)
    for _ in range(5):
        key = (base.trace(), -base.y * base.den, base.x)
        if best is None or key < best[0]:
            best = (key, base)
        base = base * eta
    return best[1]


# ---------------------------------------------------------------------------
# Ideals of O_L
# ---------------------------------------------------------------------------

def _coords_lattice(g: FieldElem) -> List[List[int]]:
    """Integer rows spanning g*O_L in omega coordinates (g integral)."""
    w = g.F.omega
    gw = g * w
    return [[g.x, g.y], [gw.x, gw.y]]


@dataclass(frozen=True)
class IdealL:
    """A nonzero fractional ideal of O_L, stored by its canonical totally
    positive generator (zero ideal: generator 0)."""

    generator: FieldElem

    @staticmethod
    def of(a: Union[FieldElem, int], F: Optional[RealQuadraticField] = None) -> "IdealL":
        if isinstance(a, int):
            a = F.elem(a)
        if not a:
            return IdealL(a)
        return IdealL(totally_positive_generator(a))

    @property
    def F(self) -> RealQuadraticField:
        return self.generator.F

    def norm(self) -> Fraction:
        return abs(self.generator.norm())

    def __mul__(self, other: "IdealL") -> "IdealL":
        return IdealL.of(self.generator * other.generator)

    def __pow__(self, k: int) -> "IdealL":
        return IdealL.of(self.generator ** k)

    def is_integral(self) -> bool:
        return self.generator.is_integral()

    def is_one(self) -> bool:
        return self.generator == self.F.one

    def contains(self, a: FieldElem) -> bool:
        if not self.generator:
            return not a
        return (a / self.generator).is_integral()

    def divides(self, other: "IdealL") -> bool:
        return self.contains(other.generator)

    def hnf(self) -> List[List[int]]:
        if not self.generator.is_integral():
            raise ValueError("hnf of a fractional ideal")
        return hnf(_coords_lattice(self.generator))

    def factor(self) -> Dict["PrimeOfL", int]:
        return factor_element(self.generator)[1]

    def __str__(self):
        return f"({self.generator})"


def ideal_sum_split(I: IdealL, J: IdealL) -> Optional[Tuple[FieldElem, FieldElem]]:
    """(a, b) with a in I, b in J and a + b = 1, or None if I + J != O_L."""
    F = I.F
    rows = _coords_lattice(I.generator) + _coords_lattice(J.generator)
    H, U = hnf_transform(rows)
    Hn = [h for h in H if any(h)]
    if Hn != [[1, 0], [0, 1]]:
        return None
    # row 0 of H is (1, 0) = sum_k U[0][k] rows[k]
    ca = U[0][:2]
    a = F.elem(ca[0] * rows[0][0] + ca[1] * rows[1][0], ca[0] * rows[0][1] + ca[1] * rows[1][1])
    return a, F.one - a


def coprime(I: IdealL, J: IdealL) -> bool:
    return ideal_sum_split(I, J) is not None


def reduce_mod(a: FieldElem, m: IdealL) -> FieldElem:
    """Canonical representative of a modulo m (a must be m-integral)."""
    F = a.F
    if m.is_one():
        return F.zero
    H = m.hnf()
    nm = int(m.norm())
    if a.den != 1:
        if math.gcd(a.den, nm) != 1:
            raise ValueError("denominator not invertible modulo the ideal")
        inv = pow(a.den, -1, nm)
        a = F.elem(a.x * inv, a.y * inv)
    x, y = a.x, a.y
    (h11, h12), (_, h22) = H
    q = x // h11
    x, y = x - q * h11, y - q * h12
    y %= h22
    return F.elem(x, y)


def congruent(a: FieldElem, b: FieldElem, m: IdealL) -> bool:
    return m.contains(a - b)


def crt_solve(congruences: Sequence[Tuple[FieldElem, IdealL]]) -> FieldElem:
    """x in O_L with x = r_i mod m_i for pairwise coprime m_i."""
    if not congruences:
        raise ValueError("no congruences")
    F = congruences[0][0].F
    M = IdealL.of(F.one)
    for _, m in congruences:
        M = M * m
    x = F.zero
    for r, m in congruences:
        rest = IdealL.of(M.generator / m.generator)
        split = ideal_sum_split(m, rest)
        if split is None:
            raise ValueError("moduli not pairwise coprime")
        e = split[1]  # = 1 mod m, 0 mod rest
        x = x + r * e
    return reduce_mod(x, M)


# ---------------------------------------------------------------------------
# Primes of L
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeOfL:
    p: int
    generator: FieldElem
    residue_degree: int
    ramified: bool
    root: Optional[int] = field(default=None, compare=False)  # omega mod P for degree 1

    @property
    def F(self) -> RealQuadraticField:
        return self.generator.F

    @property
    def norm(self) -> int:
        return self.p ** self.residue_degree

    @property
    def e(self) -> int:
        return 2 if self.ramified else 1

    def ideal(self) -> IdealL:
        return IdealL(self.generator)

    def is_dyadic(self) -> bool:
        return self.p == 2

    def __str__(self):
        return f"P({self.p}; {self.generator})"


@lru_cache(maxsize=None)
def factor_rational_prime(F: RealQuadraticField, q: int) -> Tuple[Tuple[PrimeOfL, int], ...]:
    """Primes of O_L above q with exponents."""
    kind = _split_kind(F, q)
    if kind == "inert":
        return ((PrimeOfL(q, F.elem(q), 2, False), 1),)
    # roots of X^2 - sX - c mod q
    if q == 2:
        roots = [r for r in (0, 1) if (r * r - F.s * r - F.c) % 2 == 0]
    else:
        disc = (F.s * F.s + 4 * F.c) % q
        inv2 = pow(2, -1, q)
        if disc == 0:
            roots = [F.s * inv2 % q]
        else:
            sq = sqrt_mod(disc, q)
            roots = sorted({(F.s + sq) * inv2 % q, (F.s - sq) * inv2 % q})
    cands = tp_elements_of_norm(F, q)
    out = []
    for r in roots:
        gen = next((g for g in cands if (g.x + g.y * r) % q == 0), None)
        if gen is None:
            raise HypothesisViolation("strict class number one",
                                      f"no totally positive generator above {q} for D={F.D}")
        out.append(PrimeOfL(q, totally_positive_generator(gen), 1, kind == "ramified", r))
    if kind == "ramified":
        return ((out[0], 2),)
    return tuple((P, 1) for P in out)


def primes_above(F: RealQuadraticField, q: int) -> List[PrimeOfL]:
    return [P for P, _ in factor_rational_prime(F, q)]


def prime_of_generator(g: FieldElem) -> PrimeOfL:
    """The PrimeOfL generated by a prime element g."""
    n = abs(g.norm())
    fac = factorint(int(n))
    q = next(iter(fac))
    for P in primes_above(g.F, q):
        if IdealL.of(g) == P.ideal():
            return P
    raise ValueError(f"{g} is not a prime element")


def primes_up_to_norm(F: RealQuadraticField, bound: int) -> List[PrimeOfL]:
    out = []
    for q in range(2, bound + 1):
        if isprime(q):
            out.extend(P for P in primes_above(F, q) if P.norm <= bound)
    return out


def in_prime(a: FieldElem, P: PrimeOfL) -> bool:
    """a in P, for a integral at P."""
    return P.ideal().contains(a)


def valuation(a: FieldElem, P: PrimeOfL) -> int:
    if not a:
        raise ValueError("valuation of zero")
    v = 0
    den = a.den
    while den % P.p == 0:
        den //= P.p
        v -= P.e
    num = a.F.elem(a.x, a.y)
    g = P.generator
    while True:
        q = num / g
        if not q.is_integral():
            break
        num = q
        v += 1
    return v


def factor_element(a: FieldElem) -> Tuple[FieldElem, Dict[PrimeOfL, int]]:
    """a = unit * prod pi_P^e_P with pi_P the canonical generators."""
    if not a:
        raise ValueError("factor of zero")
    n = a.norm()
    primes = set(factorint(abs(n.numerator))) | set(factorint(n.denominator)) | set(factorint(a.den))
    fac: Dict[PrimeOfL, int] = {}
    rest = a
    for q in sorted(primes):
        if q == 1:
            continue
        for P in primes_above(a.F, q):
            v = valuation(a, P)
            if v:
                fac[P] = v
                rest = rest / P.generator ** v
    return rest, fac


# ---------------------------------------------------------------------------
# Residue fields
# ---------------------------------------------------------------------------

class ResidueField:
    """O_L / P. Elements are ints mod p (degree 1) or pairs (u, v) meaning
    u + v*omega (degree 2)."""

    def __init__(self, P: PrimeOfL):
        self.P = P
        self.p = P.p
        self.f = P.residue_degree
        self.q = P.norm
        self.F = P.F

    def reduce(self, a: FieldElem):
        p = self.p
        if a.den % p == 0:
            raise ValueError("element not integral at P")
        inv = pow(a.den, -1, p)
        if self.f == 1:
            return (a.x + a.y * self.P.root) * inv % p
        return (a.x * inv % p, a.y * inv % p)

    def lift(self, e) -> FieldElem:
        if self.f == 1:
            return self.F.elem(e)
        return self.F.elem(e[0], e[1])

    @property
    def zero(self):
        return 0 if self.f == 1 else (0, 0)

    @property
    def one(self):
        return 1 if self.f == 1 else (1, 0)

    def add(self, a, b):
        if self.f == 1:
            return (a + b) % self.p
        return ((a[0] + b[0]) % self.p, (a[1] + b[1]) % self.p)

    def neg(self, a):
        if self.f == 1:
            return -a % self.p
        return (-a[0] % self.p, -a[1] % self.p)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        p = self.p
        if self.f == 1:
            return a * b % p
        s, c = self.F.s, self.F.c
        return ((a[0] * b[0] + c * a[1] * b[1]) % p,
                (a[0] * b[1] + a[1] * b[0] + s * a[1] * b[1]) % p)

    def pow(self, a, k: int):
        if k < 0:
            return self.pow(self.inv(a), -k)
        r = self.one
        while k:
            if k & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            k >>= 1
        return r

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero in residue field")
        return self.pow(a, self.q - 2)

    def is_zero(self, a) -> bool:
        return a == self.zero

    def elements(self) -> Iterable:
        if self.f == 1:
            return range(self.p)
        return ((u, v) for u in range(self.p) for v in range(self.p))

    def legendre(self, a) -> int:
        """Quadratic character (odd characteristic)."""
        if self.is_zero(a):
            return 0
        if self.p == 2:
            return 1
        r = self.pow(a, (self.q - 1) // 2)
        return 1 if r == self.one else -1

    def sqrt(self, a):
        """A square root of a (Tonelli-Shanks), or None."""
        if self.is_zero(a):
            return self.zero
        if self.p == 2:
            return self.pow(a, self.q // 2)
        if self.legendre(a) != 1:
            return None
        Q, S = self.q - 1, 0
        while Q % 2 == 0:
            Q //= 2
            S += 1
        z = next(e for e in self.elements() if self.legendre(e) == -1)
        M, c, t, R = S, self.pow(z, Q), self.pow(a, Q), self.pow(a, (Q + 1) // 2)
        while t != self.one:
            i, tt = 0, t
            while tt != self.one:
                tt = self.mul(tt, tt)
                i += 1
            b = self.pow(c, 1 << (M - i - 1))
            M, c = i, self.mul(b, b)
            t, R = self.mul(t, c), self.mul(R, b)
        return R


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def enumerate_totally_bounded(bound: FieldElem, r: Optional[FieldElem] = None,
                              m: Optional[IdealL] = None) -> List[FieldElem]:
    """All x in O_L with x = r mod m and sigma_i(x)^2 < sigma_i(bound) for
    both embeddings. The float box is padded; membership is decided exactly
    by total positivity of bound - x^2."""
    F = bound.F
    b1, b2 = bound.embeddings()
    if b1 <= 0 or b2 <= 0:
        return []
    R1, R2 = math.sqrt(b1) + 1e-6, math.sqrt(b2) + 1e-6
    w1, w2 = F.omega.embeddings()
    # x = X + Y w, sigma_1 - sigma_2 = Y (w1 - w2)
    ymax = int((R1 + R2) / abs(w1 - w2)) + 1
    out = []
    for Y in range(-ymax, ymax + 1):
        lo = max(-R1 - Y * w1, -R2 - Y * w2)
        hi = min(R1 - Y * w1, R2 - Y * w2)
        for X in range(math.floor(lo) - 1, math.ceil(hi) + 2):
            x = F.elem(X, Y)
            if total_sign(bound - x * x) != "totally_positive":
                continue
            if m is not None and r is not None and not m.contains(x - r):
                continue
            out.append(x)
    return out
