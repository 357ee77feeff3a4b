import random

import pytest
from hypothesis import given, settings, strategies as st

from cmcoincidence.base_field import IdealL
from cmcoincidence.cm_field import IdealK, ElemK, primes_of_K_above, ramified_prime_above
from cmcoincidence.errors import NonCoprimeIdeal
from cmcoincidence.orders import (QuaternionElem, all_sign_vectors, beta_twist, brute_force_S,
                                  build_R_prime, build_order, conjugate_order, default_signs,
                                  discriminant_ideal, predict_equal_orders, make_context,
                                  order_discriminant, order_from_json, orders_equal, pairing,
                                  solve_lambda)


@pytest.fixture(scope="module")
def ctx5(K5):
    return make_context(K5, 19)


@pytest.fixture(scope="module")
def ctx85(K85):
    return make_context(K85, 19)


def coprime_primes(ctx, qs=(3, 7, 11, 13, 29, 31)):
    bad = set(p.p for p in ctx.d_primes) | {ctx.p}
    out = []
    for q in qs:
        if q in bad:
            continue
        for Q in primes_of_K_above(ctx.K, q):
            if not ctx.A.conj().coprime_to(Q.ideal) or not ctx.A.coprime_to(Q.ideal):
                continue
            out.append(Q)
    return out


def random_integral_ideal(ctx, rng, k=2):
    I = IdealK.unit(ctx.K)
    for Q in rng.sample(coprime_primes(ctx), k):
        I = I * Q.ideal ** rng.randint(0, 2)
    return I


def random_elem(K, rng, r=3):
    F = K.base
    return K.elem(F.elem(rng.randint(-r, r), rng.randint(-r, r)), F.elem(rng.randint(-r, r), rng.randint(-r, r)))


class TestQuaternion:
    @given(st.lists(st.integers(-4, 4), min_size=16, max_size=16))
    @settings(max_examples=40)
    def test_matrix_model(self, cs):
        from conftest import cm
        K = cm(5, -85, 34)
        q = K.base.elem(-7, 3)
        x = QuaternionElem.from_coords(K, q, cs[:8])
        y = QuaternionElem.from_coords(K, q, cs[8:])
        X, Y = x.matrix(), y.matrix()
        XY = [[X[i][0] * Y[0][j] + X[i][1] * Y[1][j] for j in range(2)] for i in range(2)]
        assert (x * y).matrix() == XY
        assert K.elem(x.trd()) == X[0][0] + X[1][1]
        assert K.elem(x.nrd()) == X[0][0] * X[1][1] - X[0][1] * X[1][0]
        assert pairing(x, x) == 2 * x.nrd()
        assert (x * x.conj()).alpha == K.elem(x.nrd()) and not (x * x.conj()).beta


class TestBuild:
    @pytest.mark.parametrize("which", ["ctx5", "ctx85"])
    def test_basic_invariants(self, which, request):
        ctx = request.getfixturevalue(which)
        R = build_order(ctx, IdealK.unit(ctx.K))
        assert R.is_closed() and R.contains_OK()
        assert all(R.contains_by_predicate(x) for x in R.basis())

    def test_predicate_agrees_with_lattice(self, ctx85):
        rng = random.Random(0)
        R = build_order(ctx85, IdealK.unit(ctx85.K))
        K = ctx85.K
        sd_inv = K.sqrt_d().inverse()
        for _ in range(40):
            # elements of the ambient D^-1 x B, some inside, most outside
            a = random_elem(K, rng) * sd_inv
            b = R.beta_ideal.basis()[rng.randrange(4)] * rng.randint(-2, 2)
            x = QuaternionElem(a, b, ctx85.q)
            assert R.contains(x) == R.contains_by_predicate(x)
        for b in R.beta_ideal.basis():
            assert R.contains(QuaternionElem(K.elem(R.lam) * b, b, ctx85.q))

    def test_different_inverse_excluded(self, ctx5):
        K = ctx5.K
        R = build_order(ctx5, IdealK.unit(K))
        x = QuaternionElem(K.sqrt_d().inverse(), K.zero, ctx5.q)
        assert not R.contains(x)

    def test_json_round_trip(self, ctx85):
        R = build_order(ctx85, IdealK.unit(ctx85.K))
        assert orders_equal(order_from_json(ctx85, R.to_json()), R)


class TestDiscriminant:
    @pytest.mark.parametrize("which", ["ctx5", "ctx85"])
    def test_level_one(self, which, request):
        ctx = request.getfixturevalue(which)
        F = ctx.K.base
        for a in [IdealK.unit(ctx.K)] + [Q.ideal for Q in coprime_primes(ctx)[:2]]:
            R = build_order(ctx, a)
            assert order_discriminant(R) == IdealL.of(F.elem(ctx.p))
            Rp = build_R_prime(ctx, a)
            assert discriminant_ideal(Rp) == IdealL.of(ctx.alpha0 * ctx.p * ctx.K.d) ** 2

    def test_higher_level(self, K5, ctx5):
        # with l = p the beta-ideal is scaled by l in K, so the discriminant
        # picks up N_{K/L}(l) = l^2
        ctx = make_context(K5, 19, n=2, alpha=None)
        F = K5.base
        R = build_order(ctx, IdealK.unit(K5))
        assert order_discriminant(R) == IdealL.of(F.elem(19 ** 3))
        Rp = build_R_prime(ctx, IdealK.unit(K5))
        assert discriminant_ideal(Rp) == IdealL.of(ctx.alpha0 * 19 * K5.d * 19 ** 2) ** 2

    def test_ell_meeting_alpha0_d_rejected(self, K5, ctx5):
        with pytest.raises(NonCoprimeIdeal):
            make_context(K5, 19, ell=K5.d)


class TestLambda:
    def test_defining_congruences(self, ctx85):
        a = IdealK.unit(ctx85.K)
        for signs in all_sign_vectors(ctx85):
            lam = solve_lambda(ctx85, a, signs)
            for Q, s in zip(ctx85.d_primes, signs):
                assert Q.ideal().contains(lam - ctx85.lambda_q[Q] * s)
                assert Q.ideal().contains(lam * lam - ctx85.q)
            assert (beta_twist(ctx85, a) * ctx85.K.elem(lam)).is_integral()

    def test_flip_changes_one_residue(self, ctx85):
        a = IdealK.unit(ctx85.K)
        l1 = solve_lambda(ctx85, a, (1, 1))
        l2 = solve_lambda(ctx85, a, (-1, 1))
        q0, q1 = ctx85.d_primes
        assert not q0.ideal().contains(l1 - l2)
        assert q1.ideal().contains(l1 - l2)

    def test_ramified_prime_gets_minus_sign(self, ctx85):
        for i, Q in enumerate(ctx85.d_primes):
            qt = ramified_prime_above(ctx85.K, Q)
            s = default_signs(ctx85, qt.ideal)
            assert s[i] == -1 and all(x == 1 for j, x in enumerate(s) if j != i)

    @pytest.mark.parametrize("which", ["ctx5", "ctx85"])
    def test_independent_of_lambda(self, which, request):
        ctx = request.getfixturevalue(which)
        rng = random.Random(4)
        for _ in range(5):
            a = random_integral_ideal(ctx, rng)
            R1 = build_order(ctx, a)
            shift = rng.choice([1, -1, 2, 3])
            lam2 = solve_lambda(ctx, a, shift=shift)
            assert lam2 != R1.lam
            R2 = build_order(ctx, a, lam=lam2)
            assert orders_equal(R1, R2)


class TestClassification:
    def test_class_representatives_unequal(self, ctx85, G85):
        b1, b2 = G85.representatives
        assert not orders_equal(build_order(ctx85, b1), build_order(ctx85, b2))

    def test_ramified_square_equal_single_unequal(self, ctx85):
        K = ctx85.K
        qt = ramified_prime_above(K, ctx85.d_primes[0]).ideal
        a = coprime_primes(ctx85)[0].ideal
        R = build_order(ctx85, a)
        assert orders_equal(R, build_order(ctx85, a * qt * qt))
        assert not orders_equal(R, build_order(ctx85, a * qt))

    def test_predict_equal_ordersion(self, ctx85):
        K = ctx85.K
        rng = random.Random(9)
        qts = [ramified_prime_above(K, Q).ideal for Q in ctx85.d_primes]
        outcomes = set()
        for _ in range(20):
            a = random_integral_ideal(ctx85, rng, k=1)
            kind = rng.randrange(3)
            if kind == 0:
                f = IdealK.extend(K, IdealL.of(K.base.elem(rng.choice([2, 3, 7]))))
            elif kind == 1:
                f = qts[rng.randrange(2)] ** rng.randint(1, 2)
            else:
                f = coprime_primes(ctx85)[rng.randrange(3)].ideal
            b = a * f
            pred = predict_equal_orders(ctx85, a, b)
            assert pred == orders_equal(build_order(ctx85, a), build_order(ctx85, b))
            outcomes.add(pred)
        assert outcomes == {True, False}

    def test_conjugation(self, ctx85):
        rng = random.Random(12)
        K = ctx85.K
        done = 0
        while done < 4:
            mu = random_elem(K, rng, 2)
            if not mu:
                continue
            a = coprime_primes(ctx85)[rng.randrange(3)].ideal
            try:
                R_mu = build_order(ctx85, a * mu)
            except NonCoprimeIdeal:
                continue
            assert orders_equal(conjugate_order(build_order(ctx85, a), mu), R_mu)
            done += 1


class TestBruteForce:
    def test_identity_invariants(self, ctx5):
        K = ctx5.K
        R = build_order(ctx5, IdealK.unit(K))
        sols = brute_force_S(R, K.base.elem(2), K.base.one)
        assert sols == [QuaternionElem(K.one, K.zero, ctx5.q)]

    def test_not_definite_target(self, ctx5):
        R = build_order(ctx5, IdealK.unit(ctx5.K))
        assert brute_force_S(R, ctx5.K.base.zero, ctx5.K.base.elem(-1)) == []

    def test_roots_of_unity_of_trace(self, ctx5):
        K = ctx5.K
        R = build_order(ctx5, IdealK.unit(K))
        zeta = K.t
        # zeta_5 = t up to the chosen generator; count elements with its invariants
        sols = brute_force_S(R, zeta.rel_trace(), zeta.rel_norm())
        assert QuaternionElem(zeta, K.zero, ctx5.q) in sols
        assert all(x.trd() == zeta.rel_trace() and x.nrd() == zeta.rel_norm() for x in sols)
