"""The eleven acceptance criteria. Each test prints one PASS/FAIL line; the
lines are collected again in the terminal summary."""
import functools
import io
import json
import random
import sys
import time
from fractions import Fraction

import pytest

from cmcoincidence import cli
from cmcoincidence.base_field import IdealL, primes_above, real_quadratic_field
from cmcoincidence.bounds import CASE_TABLE, BoundInput, ceilings, crude_bound, prime_bound_for_case
from cmcoincidence.cm_field import (IdealK, class_group, ramified_prime_above, roots_of_unity_count)
from cmcoincidence.counting import (ConditionCParams, brute_force_total, coincidence_total,
                                    count_S2_weighted, s1_elements, s2_count)
from cmcoincidence.orders import (build_R_prime, build_order, discriminant_ideal, predict_equal_orders,
                                  make_context, order_discriminant, orders_equal, solve_lambda)
from cmcoincidence.reciprocity import Place, hilbert_symbol, legendre, product_formula_check, real_negative_count

from conftest import cm
from instances import ORACLE, fields, label
from test_counting import s1_s2_instances
from test_orders import coprime_primes, random_integral_ideal
from test_reciprocity import dyadic_product, odd_prime_elements
from cmcoincidence.base_field import prime_of_generator

RESULTS = {}


def criterion(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kw):
            t0 = time.perf_counter()
            try:
                fn(*args, **kw)
            except BaseException as e:
                msg = (str(e).splitlines() or [""])[0][:160]
                line = f"criterion {n:2d} FAIL ({time.perf_counter() - t0:.1f}s) {title}: {type(e).__name__}: {msg}"
                RESULTS[n] = line
                print(line, file=sys.__stdout__, flush=True)
                raise
            line = f"criterion {n:2d} PASS ({time.perf_counter() - t0:.1f}s) {title}"
            RESULTS[n] = line
            print(line, file=sys.__stdout__, flush=True)
        return inner
    return wrap


F = real_quadratic_field(5)


def zeta5():
    return cm(5, -5, -1, 2)


def k85():
    return cm(5, -85, 34)


@criterion(1, "class numbers h(Q(zeta5)) = 1, h(K') = 2, each under 60 s")
def test_c01_class_numbers():
    for K, h in ((zeta5(), 1), (k85(), 2)):
        t0 = time.perf_counter()
        G = class_group(K)
        assert G.order == h, f"h = {G.order}, expected {h}"
        assert time.perf_counter() - t0 < 60


@criterion(2, "((dd' - x^2)/4) = p2^2 p19,1 p19,2 at x = 3 sqrt5 - 3")
def test_c02_factorization():
    P = ConditionCParams.of(zeta5(), k85(), 19)
    x = F.from_sqrt(-3, 3)
    v = (P.dd - x * x) / 4
    assert v.is_integral(), f"(dd' - x^2)/4 = {v} is not in O_L"
    P2, = primes_above(F, 2)
    want = {P2: 2}
    want.update({Q: 1 for Q in primes_above(F, 19)})
    assert IdealL.of(v).factor() == want


@criterion(3, "total at 19 positive; scan flags 3 not superspecial and 5 ramified in L; scan under 10 min")
def test_c03_coincidence_at_19():
    rep = coincidence_total(zeta5(), k85(), 19)
    assert rep.eligible and rep.total > 0
    t0 = time.perf_counter()
    job = cli.parse_job({"K": {"D": 5, "a": [1, -1], "b": [1, 0]},
                         "Kprime": {"D": 5, "radicand": [-119, 68]}}, "coincide")
    buf = io.StringIO()
    cli.scan(job, buf)
    assert time.perf_counter() - t0 < 600
    lines = {l["p"]: l for l in map(json.loads, buf.getvalue().splitlines())}
    assert lines["19"]["positive"] is True
    assert lines["3"]["eligible"] is False and "not superspecial" in lines["3"]["reason"]
    assert lines["5"]["covered"] is False and "ramified in L" in lines["5"]["reason"]


@criterion(4, "p = 521 gives total 0 or ineligible")
def test_c04_521():
    for K, Kp in ((zeta5(), k85()), (k85(), zeta5())):
        rep = coincidence_total(K, Kp, 521)
        assert (not rep.eligible) or rep.total == 0


@criterion(5, "oracle equivalence on >= 5 instances, each under 5 min")
def test_c05_oracle():
    assert len(ORACLE) >= 5
    for entry in ORACLE:
        t0 = time.perf_counter()
        K, Kp, p = fields(entry)
        ctx = make_context(K, p)
        G = class_group(K, avoid=IdealL.of(ctx.alpha0 * K.d * p))
        for a in G.representatives:
            lhs = brute_force_total(ctx, a, Kp.t)
            rhs = count_S2_weighted(K, Kp, ctx, a, G)
            assert lhs == rhs, f"{label(entry)}: brute {lhs} != formula {rhs}"
        assert time.perf_counter() - t0 < 300


@criterion(6, "#S1 = w_K #S2 on >= 20 (a, x) instances")
def test_c06_s1_s2():
    cases = s1_s2_instances()
    assert len(cases) >= 20
    for K, ctx, a, x, P, G in cases:
        assert len(s1_elements(ctx, a, x, P)) == roots_of_unity_count(K) * s2_count(ctx, a, x, P, G)


@criterion(7, "disc R = (p l) and disc R' = (l alpha0 p d)^2 on every constructed instance")
def test_c07_discriminants():
    failures = []
    for K in (zeta5(), k85()):
        for n in (1, 2):
            ctx = make_context(K, 19, n)
            G = class_group(K, avoid=IdealL.of(ctx.alpha0 * K.d * 19))
            for a in G.representatives:
                got = order_discriminant(build_order(ctx, a))
                want = IdealL.of(ctx.ell * 19)
                if got != want:
                    failures.append(f"d={K.d} n={n}: disc R = {got}, expected {want}")
                got = discriminant_ideal(build_R_prime(ctx, a))
                want = IdealL.of(ctx.ell * ctx.alpha0 * 19 * K.d) ** 2
                if got != want:
                    failures.append(f"d={K.d} n={n}: disc R' = {got}, expected {want}")
    assert not failures, "; ".join(failures)


@criterion(8, "lambda independence and alpha0 / A-swap invariance")
def test_c08_invariance():
    for K, Kp in ((zeta5(), k85()), (k85(), zeta5())):
        ctx = make_context(K, 19)
        rng = random.Random(0)
        for _ in range(3):
            a = random_integral_ideal(ctx, rng)
            R1 = build_order(ctx, a)
            R2 = build_order(ctx, a, lam=solve_lambda(ctx, a, shift=1))
            assert R1.lam != R2.lam and orders_equal(R1, R2)
        totals = {coincidence_total(K, Kp, 19, seed=s, swap=sw).total
                  for s in (0, 1, 2) for sw in (False, True)}
        assert len(totals) == 1, f"totals vary: {totals}"


@criterion(9, "product formula and reciprocity identities on 200 random instances")
def test_c09_reciprocity():
    rng = random.Random(2024)
    fields_ = [real_quadratic_field(D) for D in (2, 5, 13, 17)]
    count = 0
    while count < 200:
        L = rng.choice(fields_)
        g = L.elem(rng.randint(-50, 50), rng.randint(-50, 50))
        h = L.elem(rng.randint(-50, 50), rng.randint(-50, 50))
        if g and h:
            assert product_formula_check(g, h)
            count += 1
    count = 0
    while count < 200:
        L = rng.choice(fields_)
        g, h = odd_prime_elements(L, rng, 2)
        Pg, Ph = prime_of_generator(g), prime_of_generator(h)
        if Pg == Ph:
            continue
        assert legendre(g, Ph) * legendre(h, Pg) == (-1) ** real_negative_count(g, h) * dyadic_product(g, h)
        assert legendre(L.elem(-1), Pg) * dyadic_product(L.elem(-1), g) == (-1) ** real_negative_count(g)
        count += 1


@criterion(10, "bound 400 for Q(zeta5)^2, ceilings 20 / 4, 19 and 3 under the pair's ceilings")
def test_c10_bounds():
    B = BoundInput(zeta5(), zeta5())
    assert crude_bound(B) == 400
    c = ceilings(B)
    assert c["r2"] == 20 and c["r4"] == 4
    B2 = BoundInput(zeta5(), k85())
    ceil = {row.r_prime: prime_bound_for_case(B2, row) for row in CASE_TABLE}
    assert 19 <= ceil[2] and 3 <= ceil[4]


@criterion(11, "K' class orders unequal; equal-order criterion exact on 20 random pairs")
def test_c11_classification():
    K = k85()
    ctx = make_context(K, 19)
    G = class_group(K, avoid=IdealL.of(ctx.alpha0 * K.d * 19))
    b1, b2 = G.representatives
    assert not orders_equal(build_order(ctx, b1), build_order(ctx, b2))
    rng = random.Random(11)
    qts = [ramified_prime_above(K, Q).ideal for Q in ctx.d_primes]
    primes = coprime_primes(ctx)
    for _ in range(20):
        a = random_integral_ideal(ctx, rng, k=1)
        kind = rng.randrange(3)
        if kind == 0:
            f = IdealK.extend(K, IdealL.of(F.elem(rng.choice([2, 3, 7]))))
        elif kind == 1:
            f = qts[rng.randrange(len(qts))] ** rng.randint(1, 2)
        else:
            f = primes[rng.randrange(len(primes))].ideal
        b = a * f
        assert predict_equal_orders(ctx, a, b) == orders_equal(build_order(ctx, a), build_order(ctx, b))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
