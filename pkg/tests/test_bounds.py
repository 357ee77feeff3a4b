from fractions import Fraction

import pytest

from cmcoincidence.bounds import (CASE_TABLE, BoundInput, behavior_in_L, candidate_primes, ceilings,
                                  crude_bound, odd_ef_count, prime_bound_for_case, root_floor)

from conftest import cm


@pytest.fixture(scope="module")
def pair(K5, K85):
    return BoundInput(K5, K85)


def test_zeta5_self_bound(K5):
    B = BoundInput(K5, K5)
    assert B.disc_O1 == 125
    assert crude_bound(B) == 400
    assert ceilings(B) == {"r1": 400, "r2": 20, "r4": 4}


def test_pair_bound(pair):
    assert pair.disc_O2 == 25 * 1445
    assert crude_bound(pair) == 115600
    assert ceilings(pair) == {"r1": 115600, "r2": 340, "r4": 18}
    rows = {row.r_prime: prime_bound_for_case(pair, row) for row in CASE_TABLE}
    assert 19 <= rows[2] and 3 <= rows[4]


def test_conductor(F5, K5):
    B = BoundInput(K5, K5, c1=F5.elem(2))
    assert B.disc_O1 == 2000 and B.disc_O2 == 125
    assert crude_bound(B) == 16 * 2000 * 125 / Fraction(5 ** 4)


def test_conductor_zero_rejected(F5, K5):
    with pytest.raises(ValueError):
        BoundInput(K5, K5, c1=F5.zero)


def test_different_base_rejected(K5):
    with pytest.raises(ValueError):
        BoundInput(K5, cm(2, -9, -2))


def test_table_rows():
    assert [(r.p_behavior, r.reduction, r.rapoport, r.r_prime) for r in CASE_TABLE] == [
        ("unramified", "superspecial", True, 2),
        ("inert", "supersingular_not_ssp", True, 4),
        ("ramified", "superspecial", True, 2),
        ("ramified", "superspecial", False, 1),
    ]
    assert CASE_TABLE[0].applies_to("split") and CASE_TABLE[0].applies_to("inert")
    assert not CASE_TABLE[1].applies_to("split")


def test_root_floor():
    assert root_floor(Fraction(400), 2) == 20
    assert root_floor(Fraction(399), 2) == 19
    assert root_floor(Fraction(81), 4) == 3
    assert root_floor(Fraction(801, 2), 2) == 20


def test_behavior(F5):
    assert behavior_in_L(F5, 19) == "split"
    assert behavior_in_L(F5, 3) == "inert"
    assert behavior_in_L(F5, 5) == "ramified"
    assert odd_ef_count(F5, 19) == 2 and odd_ef_count(F5, 3) == 0 and odd_ef_count(F5, 5) == 0


def test_candidates(pair):
    cands = {c.p: c for c in candidate_primes(pair)}
    assert 19 in cands and 3 in cands and 5 in cands and 2 in cands
    assert any("ramified in L" in n for n in cands[5].notes)
    assert any("dyadic" in n for n in cands[2].notes)
    assert any("ramified in K1 or K2" in n for n in cands[17].notes)
    assert not cands[19].notes and cands[19].superspecial_possible
    assert max(cands) <= 340
    # an inert prime above the r'=4 ceiling survives only through the superspecial row
    c = cands[23]
    assert c.behavior == "inert" and [ok for _, _, ok in c.rows] == [True, False]


def test_candidates_zeta5(K5):
    cands = candidate_primes(BoundInput(K5, K5))
    assert max(c.p for c in cands) <= 20
    assert [c.p for c in cands] == [2, 3, 5, 7, 11, 13, 17, 19]
