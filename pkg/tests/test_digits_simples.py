from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from phimod.digits import DigitRational as D, enumerate_rationals
from phimod.errors import AdmissibilityMismatch, BadRange
from phimod.field import get_field
from phimod.objects import is_connected, is_etale, is_multiplicative, is_unipotent, validate
from phimod.series import SeriesRing
from phimod.simples import (ExtContext, admissible_pairs, build_simple, character_of_simple,
                            check_pair_constants, cr_admissible, ramification_bounds,
                            sp_admissible, st_admissible)


def test_from_fraction_examples():
    assert D.from_fraction(1, 1, 3).digits == (1,) and D.from_fraction(1, 1, 3).value == Fraction(1, 2)
    assert D.from_fraction(0, 1, 3).value == 0
    assert D.from_fraction(2, 1, 3).digits == (2,) and D.from_fraction(2, 1, 3).value == 1
    with pytest.raises(BadRange):
        D.from_fraction(3, 2, 3)


def test_digit_operations():
    assert D(3, (1,)).complement().digits == (1,)
    assert D(3, (0,)).complement().digits == (2,)
    assert D(3, (1, 2)).complement().digits == (1, 0)
    assert D(3, (1, 2)).shift(0).digits == (1, 2)
    assert D(3, (1, 2)).shift(1).digits == (2, 1)
    assert D(3, (1, 1)).period == 1
    assert D(3, (1, 2, 1, 2)).period == 2
    assert D(3, (1, 2)).iso_class_equal(D(3, (1, 2))) == (True, 0)
    assert D(3, (1, 2)).iso_class_equal(D(3, (2, 1))) == (True, 1)
    assert D(3, (1,)).iso_class_equal(D(3, (2,)))[0] is False


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.data())
def test_fraction_round_trip(p, s, data):
    m = data.draw(st.integers(0, p ** s - 1).filter(lambda m: m % p or m in (0, p ** s - 1)))
    r = D.from_fraction(m, s, p)
    assert r.value == Fraction(m, p ** s - 1)
    # value recomputed from the digit word
    word = r.word(s)
    assert sum(Fraction(a, p ** (k + 1)) for k, a in enumerate(word)) * p ** s / (p ** s - 1) == r.value
    assert D.from_value(r.value, p) == r
    assert r.shift(r.period) == r
    assert r.complement().value == 1 - r.value


def test_simple_examples():
    R = SeriesRing(get_field(3, 1), 9)
    L0, L1, Lh = (build_simple(D.from_value(v, 3), R) for v in (0, 1, Fraction(1, 2)))
    for L in (L0, L1, Lh):
        assert validate(L).ok
    assert L0.filtration_exponents() == [2] and is_etale(L0)
    assert L1.filtration_exponents() == [0] and is_multiplicative(L1)
    assert Lh.filtration_exponents() == [1] and is_connected(Lh) and is_unipotent(Lh)


def test_admissibility_examples():
    h, one = D(3, (1,)), D(3, (2,))
    ctx = ExtContext(3, h, one, s=1)
    assert cr_admissible(ctx, 0, 0) == (True, 1)
    assert sp_admissible(ctx, 0)
    ctx = ExtContext(3, h, h, s=1)
    assert cr_admissible(ctx, 0, 0)[0] is False
    assert st_admissible(ctx, 0, 0) == (True, 1)
    ctx = ExtContext(3, one, one, s=1)
    assert admissible_pairs(ctx) == {"cr": [], "st": [], "sp": []}


def test_pair_constant_examples():
    h, one = D(3, (1,)), D(3, (2,))
    pc = check_pair_constants(ExtContext(3, h, one), "cr", 0, 0)
    assert pc.C == 1 and pc.bounds_ok
    pc = check_pair_constants(ExtContext(3, h, h), "st", 0, 0)
    assert pc.C == 2 and pc.bounds_ok
    assert check_pair_constants(ExtContext(3, h, one), "sp", 0, 0).checks["weight_equality"]
    with pytest.raises(AdmissibilityMismatch):
        check_pair_constants(ExtContext(3, h, h), "cr", 0, 0)


def _reference_constants(ctx, kind, i0, j0):
    """The bounds evaluated with Fraction arithmetic on shifted rationals."""
    p, q = ctx.p, ctx.q
    r1, r2 = ctx.r1.shift(i0).value, ctx.r2.shift(j0).value
    e = Fraction(1, p - 1)
    if kind == "cr":
        C = -(q - 1) * (r1 - r2)
        return C.denominator == 1 and int(C) % p != 0 and 1 <= C <= q - 1 and r1 < r2
    if kind == "st":
        C = -(q - 1) * (r1 - r2 - 1)
        return C.denominator == 1 and int(C) % p != 0 and 1 <= C < (q - 1) * (1 + e) and r1 + e > r2
    return r1 + e == r2


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.data())
def test_constants_match_fraction_reference(p, data):
    pool = enumerate_rationals(p, 2 if p == 7 else 3)
    r1, r2 = data.draw(st.sampled_from(pool)), data.draw(st.sampled_from(pool))
    ctx = ExtContext(p, r1, r2)
    if ctx.s > 4:
        return
    adm = admissible_pairs(ctx)
    for kind in ("cr", "st"):
        for i, j, _ in adm[kind]:
            pc = check_pair_constants(ctx, kind, i, j, strict=False)
            assert pc.bounds_ok == _reference_constants(ctx, kind, i, j) is True
    for j in adm["sp"]:
        assert check_pair_constants(ctx, "sp", 0, j, strict=False).bounds_ok
        assert _reference_constants(ctx, "sp", 0, j)


def test_characters():
    assert character_of_simple(D(3, (0,)))["exponent"] == 0
    assert character_of_simple(D(3, (0,)))["etale"]
    assert character_of_simple(D(3, (1,))) == {"field_degree": 1, "exponent": 1, "etale": False}
    assert character_of_simple(D(3, (2,)))["exponent"] == 2


def test_ramification_formulas():
    assert ramification_bounds(3)["upper_v"] == Fraction(5, 3)
    assert ramification_bounds(3)["different_bound"] == Fraction(8, 3)
    assert ramification_bounds(5)["upper_v"] == Fraction(9, 5)
    assert ramification_bounds(5)["different_bound"] == Fraction(14, 5)
    assert ramification_bounds(7)["upper_v"] == Fraction(13, 7)
    # 3^(8/3) evaluated independently in floating point
    assert abs(float(ramification_bounds(3)["disc_bound"]) - 3 ** (8 / 3)) < 1e-5
