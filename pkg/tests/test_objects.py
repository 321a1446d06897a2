import random
from fractions import Fraction

import pytest

from phimod.digits import DigitRational as D
from phimod.errors import NotAMorphism
from phimod.extensions import build_E_cr, build_E_st
from phimod.field import get_field
from phimod.objects import (FLModule, ModuleMorphism, PhiNModule, cokernel, direct_sum,
                            etale_split, find_isomorphism, fl_normalize, fl_to_module, identity,
                            is_crystalline, is_strict_epi, is_strict_mono, kernel, lift_N,
                            morphism, rebase, special_basis, splitting_section, unipotent_split,
                            validate)
from phimod.series import SeriesRing, mat_truncate
from phimod.simples import ExtContext, build_simple

P = 3
R = SeriesRing(get_field(P, 1), 9)
HALF, ZERO, ONE = D(3, (1,)), D(3, (0,)), D(3, (2,))


def simple(r):
    return build_simple(r, R)


def test_validate_flags():
    L = simple(HALF)
    assert validate(L).ok
    bad = PhiNModule(R, [[R.zero()]], [[R.zero()]])
    assert "det" in validate(bad).axioms()
    E = build_E_st(ExtContext(3, HALF, HALF), 0, 0, 1, R)
    T = [list(r) for r in E.n_table]
    T[0][1] = T[0][1] + R.u(P)
    rep = validate(E.with_n_table(T))
    assert rep.failures == [{"axiom": "N-compat", "column": 1}]


def test_lift_N_round_trip():
    E = build_E_st(ExtContext(3, HALF, HALF), 0, 0, 1, R)
    low = E.with_n_table(mat_truncate(E.n_table, P))
    assert lift_N(low).n_table == E.n_table


def test_kernel_cokernel_trivial():
    L = direct_sum(simple(HALF), simple(ZERO))
    zero = ModuleMorphism(L, L, R.zeros(2, 2))
    K, _ = kernel(zero)
    C, _ = cokernel(zero)
    assert K.rank == C.rank == 2
    K, _ = kernel(identity(L))
    C, _ = cokernel(identity(L))
    assert K.rank == C.rank == 0
    assert is_strict_mono(identity(L)) and is_strict_epi(identity(L))


def test_kernel_of_projection():
    E = build_E_st(ExtContext(3, HALF, HALF), 0, 0, 1, R)
    proj = morphism(E, simple(HALF), [[R.zero(), R.one()]])
    assert is_strict_epi(proj)
    K, emb = kernel(proj)
    assert find_isomorphism(K, simple(HALF)) is not None
    assert is_strict_mono(emb)


def test_non_morphism_rejected():
    L = simple(ZERO)
    with pytest.raises(NotAMorphism):
        morphism(L, L, [[R.u(1)]])


def test_sub_of_cr_extension_is_strict():
    E = build_E_cr(ExtContext(3, HALF, ONE), 0, 0, 1, R)
    emb = morphism(simple(HALF), E, [[R.one()], [R.zero()]])
    assert is_strict_mono(emb)


def test_crystalline_examples():
    for r in (ZERO, HALF, ONE, D(3, (1, 2))):
        assert is_crystalline(simple(r), cross_check=True)
    assert is_crystalline(build_E_cr(ExtContext(3, HALF, ONE), 0, 0, 1, R), cross_check=True)
    assert not is_crystalline(build_E_st(ExtContext(3, HALF, HALF), 0, 0, 1, R), cross_check=True)


def test_special_basis_examples():
    for r in (ZERO, HALF, ONE, D(3, (1, 2)), D(3, (0, 1, 2))):
        P_, c = special_basis(simple(r))
        assert c == [r.co_digit(i) for i in range(r.period)]
        assert P_ == R.identity(r.period)
    assert sorted(special_basis(direct_sum(simple(ZERO), simple(ONE)))[1]) == [0, 2]
    rng = random.Random(5)
    for r in (D(3, (1, 2)), D(3, (0, 1, 2)), D(3, (0, 2))):
        s = r.period
        Q = [[R.one() if i == j else (R.from_coeffs([rng.randrange(3) for _ in range(9)])
                                      if i < j else R.zero()) for j in range(s)] for i in range(s)]
        L2, _ = rebase(simple(r), Q)
        assert sorted(special_basis(L2)[1]) == sorted(r.co_digit(i) for i in range(s))


def test_fl_examples():
    F = R.field
    assert find_isomorphism(fl_to_module(FLModule(F, [0], [[1]]), R), simple(ZERO)) is not None
    assert find_isomorphism(fl_to_module(FLModule(F, [2], [[1]]), R), simple(ONE)) is not None
    both = fl_to_module(FLModule(F, [0, 2], [[1, 0], [0, 1]]), R)
    assert find_isomorphism(both, direct_sum(simple(ZERO), simple(ONE))) is not None


def test_fl_normalize_examples():
    F = R.field
    L = fl_to_module(FLModule(F, [1], [[1]]), R)
    res = fl_normalize(L)
    assert all(x.is_zero() for v in res.residual for x in (v if isinstance(v, list) else [v]))
    assert res.module.jumps == [1]
    # perturb the phi-matrix by u^p terms through a base change congruent to 1
    rng = random.Random(0)
    for r in (HALF, D(3, (1, 2)), D(3, (0, 1))):
        s = r.period
        Q = [[(R.one() if i == j else R.zero()) + R.monomial(rng.randrange(1, 3), P)
              for j in range(s)] for i in range(s)]
        L2, _ = rebase(simple(r), Q)
        res = fl_normalize(L2)
        assert find_isomorphism(fl_to_module(res.module, R), simple(r)) is not None


def test_etale_split_examples():
    sp = etale_split(simple(ZERO))
    assert sp.sub.rank == 1 and sp.quotient.rank == 0
    sp = etale_split(simple(HALF))
    assert sp.sub.rank == 0
    sp = etale_split(direct_sum(simple(ZERO), simple(HALF)))
    assert find_isomorphism(sp.sub, simple(ZERO)) is not None
    assert find_isomorphism(sp.quotient, simple(HALF)) is not None


def test_unipotent_split_examples():
    sp = unipotent_split(simple(ONE))
    assert sp.quotient.rank == 1 and sp.sub.rank == 0
    assert unipotent_split(simple(HALF)).quotient.rank == 0
    E = build_E_st(ExtContext(3, HALF, HALF), 0, 0, 1, R)
    sp = unipotent_split(E)
    assert sp.sub.rank == 2 and sp.quotient.rank == 0


def test_section_examples():
    sec = splitting_section(simple(ONE))
    assert sec.g == [[]] and len(sec.S) == 1
    assert splitting_section(simple(HALF)).S == []
    E = build_E_cr(ExtContext(3, ZERO, ONE), 0, 0, 1, R)
    sec = splitting_section(E)
    assert any(not x.is_zero() for v in sec.g for x in v)
    assert all(x.valuation() >= 1 for v in sec.g for x in v)
