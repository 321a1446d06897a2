import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from phimod.checks import random_decomposition, weight_one_presentation
from phimod.digits import DigitRational as D, enumerate_rationals
from phimod.errors import AdmissibilityMismatch, FieldTooSmall, InvalidObject, NotCrystallineSystem
from phimod.extensions import (ExtDecomposition, FactorSystem, build_E_cr, build_E_sp, build_E_st,
                               build_from_decomposition, decompose_cr, decompose_extension,
                               decompose_full, normalize, normalize_C1, q_rational_ext_count,
                               read_extension, reduce_C2, replay, st_kappa, validate_st)
from phimod.field import get_field
from phimod.objects import (direct_sum, find_isomorphism, is_crystalline, is_unipotent,
                            validate)
from phimod.oracles import is_coboundary
from phimod.simples import ExtContext, admissible_pairs, build_simple

HALF, ZERO, ONE = D(3, (1,)), D(3, (0,)), D(3, (2,))
F3, F9, F27 = get_field(3, 1), get_field(3, 2), get_field(3, 3)


def ctx_of(r1, r2, F=F3, prec=9, s=None):
    return ExtContext(3, r1, r2, s=s, field=F, prec=prec)


def test_C1_noop():
    ctx = ctx_of(HALF, HALF)
    fs = FactorSystem(ctx, {(0, 0, 0): 1, (0, 0, 2): 2})
    out, tr = normalize_C1(fs)
    assert out == fs and tr == []


@pytest.mark.parametrize("F,ok", [(F3, False), (F9, False), (F27, True)])
def test_C1_period_case_needs_degree_three(F, ok):
    ctx = ctx_of(HALF, HALF, F, prec=6)
    fs = FactorSystem(ctx, {(0, 0, 1): 1})
    if not ok:
        with pytest.raises(FieldTooSmall):
            normalize_C1(fs)
        return
    out, tr = normalize_C1(fs)
    assert out.satisfies_C1()
    assert replay(fs, tr) == out
    assert is_coboundary(out - fs, F, 6)


def test_C2_forward_elimination():
    ctx = ctx_of(HALF, HALF, F3, prec=9)
    fs = FactorSystem(ctx, {(0, 0, 2): 1})
    out, tr = reduce_C2(fs)
    assert out.is_zero() and len(tr) >= 1
    assert is_coboundary(out - fs, F3, 9)


def test_C2_exceptional_branch():
    ctx = ctx_of(ZERO, ONE, F27, prec=6)
    fs = FactorSystem(ctx, {(0, 0, 3): 1})
    out, tr = reduce_C2(fs)
    assert out.satisfies_C2()
    assert is_coboundary(out - fs, F27, 6)
    with pytest.raises(FieldTooSmall):
        reduce_C2(FactorSystem(ctx_of(ZERO, ONE, F9, prec=6), {(0, 0, 3): 1}))


VALUES = [ZERO, HALF, ONE]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(VALUES), st.sampled_from(VALUES), st.sampled_from([F3, F9]),
       st.integers(4, 6), st.data())
def test_normalization_is_coboundary_equivalent(r1, r2, F, prec, data):
    ctx = ctx_of(r1, r2, F, prec=prec, s=1)
    terms = data.draw(st.dictionaries(st.tuples(st.just(0), st.just(0), st.integers(0, prec - 1)),
                                      st.integers(1, F.q - 1), max_size=4))
    fs = FactorSystem(ctx, terms)
    try:
        out, tr = normalize(fs)
    except FieldTooSmall:
        assume(False)
    assert out.satisfies_C1() and out.satisfies_C2()
    assert replay(fs, tr) == out
    assert is_coboundary(out - fs, F, prec)


def test_decompose_cr_examples():
    ctx = ctx_of(HALF, ONE)
    assert decompose_cr(FactorSystem(ctx))[0].is_zero()
    dec, _ = decompose_cr(FactorSystem(ctx, {(0, 0, 1): 2}))
    assert dec == ExtDecomposition(cr_terms=[(0, 0, 2)])
    with pytest.raises(NotCrystallineSystem):
        decompose_cr(FactorSystem(ctx, {(0, 0, 0): 1}))
    # no cr pairs: every crystalline system is a coboundary
    ctx = ctx_of(ONE, HALF, F27, prec=6)
    for t in range(0, 6):
        fs = FactorSystem(ctx, {(0, 0, t): 1})
        assert decompose_cr(fs)[0].is_zero()
        assert is_coboundary(fs, F27, 6)


def test_validate_st_examples():
    ctx = ctx_of(HALF, HALF)
    assert validate_st(FactorSystem(ctx))["ok"]
    assert validate_st(FactorSystem(ctx, {(0, 0, 0): 1}))["ok"]
    ctx = ctx_of(ZERO, HALF)
    rep = validate_st(FactorSystem(ctx, {(0, 0, 0): 1}))
    assert not rep["ok"] and rep["failures"][0]["condition"] == "b"


def test_decompose_full_examples():
    ctx = ctx_of(HALF, HALF, F9)
    g = 5
    E = build_E_st(ctx, 0, 0, g)
    assert decompose_extension(E, ctx)[0] == ExtDecomposition(st_terms=[(0, 0, g)])
    ctx = ctx_of(HALF, ONE, F9)
    E = build_E_sp(ctx, 0, 2)
    fs, kappa = read_extension(E, ctx)
    assert fs.is_zero() and kappa == {(0, 0): 2}
    assert decompose_full(fs, kappa) == ExtDecomposition(sp_terms=[(0, 2)])
    both = ExtDecomposition(cr_terms=[(0, 0, 1)], sp_terms=[(0, 2)])
    assert decompose_extension(build_from_decomposition(ctx, both), ctx)[0] == both
    # an N-residue outside F_{p^s} is not explained by any special extension
    g = next(x for x in F9.elements() if F9.frob(x) != x)
    with pytest.raises(InvalidObject):
        decompose_full(FactorSystem(ctx), {(0, 0): g})


def test_sp_coefficient_must_be_rational_over_period_field():
    ctx = ctx_of(HALF, ONE, F9)
    g = next(x for x in F9.elements() if F9.frob(x) != x)
    with pytest.raises(AdmissibilityMismatch):
        build_E_sp(ctx, 0, g)


def test_standard_extension_properties():
    rng = random.Random(11)
    for p in (3, 5):
        F = get_field(p, 1)
        for r1 in enumerate_rationals(p, 2):
            for r2 in enumerate_rationals(p, 2):
                ctx = ExtContext(p, r1, r2, field=F)
                if ctx.s > 2:
                    continue
                adm = admissible_pairs(ctx)
                for i, j, _ in adm["cr"]:
                    E = build_E_cr(ctx, i, j, rng.randrange(1, p))
                    assert validate(E).ok and is_crystalline(E, cross_check=True)
                for i, j, _ in adm["st"]:
                    E = build_E_st(ctx, i, j, rng.randrange(1, p))
                    assert validate(E).ok
                    if not (r1.is_zero() or r1.is_one() or r2.is_zero() or r2.is_one()):
                        assert is_unipotent(E)
                for j in adm["sp"]:
                    assert is_crystalline(build_E_sp(ctx, j, 0))
                    E = build_E_sp(ctx, j, 1)
                    assert validate(E).ok and not is_crystalline(E, cross_check=True)
                    assert E.B == build_E_sp(ctx, j, 0).B


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(1, 2), st.integers(0, 10 ** 6))
def test_build_decompose_round_trip(p, m, seed):
    rng = random.Random(seed)
    pool = enumerate_rationals(p, 2)
    r1, r2 = rng.choice(pool), rng.choice(pool)
    ctx = ExtContext(p, r1, r2, field=get_field(p, m))
    assume(ctx.s <= 2)
    dec = random_decomposition(ctx, rng)
    E = build_from_decomposition(ctx, dec)
    assert validate(E).ok
    got, _ = decompose_extension(E, ctx)
    assert got == dec


def test_st_kappa_formula():
    ctx = ctx_of(HALF, HALF)
    assert st_kappa(ctx, 0, 0, 1) == {(0, 0): 1}


def test_weight_one_scenario():
    ctx = ctx_of(HALF, HALF)
    R = ctx.ring()
    E = build_E_st(ctx, 0, 0, 1, R)
    # E has the same presentation as the rank two object, entry by entry
    pres = weight_one_presentation(R)
    assert E.B == pres.B and E.n_table == pres.n_table
    assert find_isomorphism(E, pres) is not None
    L = build_simple(HALF, R)
    assert find_isomorphism(build_E_st(ctx, 0, 0, 0, R), direct_sum(L, L)) is not None
    assert find_isomorphism(E, direct_sum(L, L)) is None
    count, classes = q_rational_ext_count(ctx)
    assert count == 3 and sorted(classes.values()) == [0, 1, 2]
