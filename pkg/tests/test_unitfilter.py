import cmath
import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from phimod.checks import cube_root_units
from phimod.errors import NoProgress, UndefinedValuation
from phimod.oracles import FILTRATION_Q_4_10
from phimod.unitfilter import (NumberField, a_val, filtrate, load_units, norm,
                               replay_filtration, resultant, shifted_norm)

Q = NumberField([0, 1])
K = NumberField([-3, 0, 0, 1])
a = K.gen()


def _norm_by_conjugates(coeffs):
    """Product of the three complex embeddings of sum c_k 3^(k/3)."""
    r = 3 ** (1 / 3)
    out = 1
    for k in range(3):
        z = r * cmath.exp(2j * math.pi * k / 3)
        out *= sum(float(c) * z ** e for e, c in enumerate(coeffs))
    return out.real


def test_norm_examples():
    assert norm(K([1])) == 1
    assert norm(a) == 3
    assert norm(a + 1) == 4
    assert abs(_norm_by_conjugates([1, 1]) - 4) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=3, max_size=3),
       st.lists(st.integers(-6, 6), min_size=3, max_size=3))
def test_norm_multiplicative_and_matches_sympy(x, y):
    X, Y = K(x), K(y)
    assert norm(X * Y) == norm(X) * norm(Y)
    t = sympy.Symbol("t")
    ref = sympy.resultant(t ** 3 - 3, sum(c * t ** k for k, c in enumerate(x)), t)
    assert norm(X) == Fraction(int(ref))


def test_resultant_rational_scaling():
    # Res(t^2 - 2, t/2 + 1) = (1/2)^2 Res(t^2 - 2, t + 2) = 2/4
    assert resultant([-2, 0, 1], [1, Fraction(1, 2)]) == Fraction(1, 2)


def test_shifted_norm_examples():
    sn = shifted_norm(Q([4]), 3)
    assert (sn.i, sn.n, sn.fell_through) == (1, 3, False)
    assert shifted_norm(Q([0]), 3).i == 0
    sn = shifted_norm(a + 1, 3)
    assert (sn.i, sn.n) == (1, 3)
    # 5 - 2 = 3 has positive valuation
    assert shifted_norm(Q([5]), 3).i == 2


def test_fall_through_flagged():
    # norm(i - k) = k^2 + 1 is prime to 3 for every k, so the loop runs out
    x = NumberField([1, 0, 1])([0, 1])
    sn = shifted_norm(x, 3)
    assert sn.fell_through and sn.i == 2 and sn.n == 5


def test_a_val_examples():
    assert a_val(Q([4]), 3) == 1
    assert a_val(a + 1, 3) == 1
    assert a_val(Q([10]), 3) == 2
    assert a_val(Q([1]), 3) == math.inf
    with pytest.raises(UndefinedValuation):
        a_val(Q([1]), 3, finite=True)


def test_filtration_single_unit():
    res = filtrate([Q([4])], 3)
    assert res.af == [1] and res.transcript == [] and res.basis == [Q([4])]


def test_filtration_hand_trace():
    res = filtrate([Q([4]), Q([10])], 3)
    assert res.af == FILTRATION_Q_4_10["af"]
    assert [[int(c) for c in b.c] for b in res.basis] == FILTRATION_Q_4_10["basis"]
    assert [list(h) for h in res.transcript] == FILTRATION_Q_4_10["transcript"]


def test_cube_root_filtration_replays():
    _, units = cube_root_units()
    res = filtrate(units, 3)
    assert res.af == [2, 3, math.inf]
    assert res.transcript == [(2, 0, 0)]
    assert replay_filtration(units, 3, res.transcript) == res.basis
    e = units[0]
    assert norm(e) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 3 ** 6).filter(lambda x: x % 3), min_size=2, max_size=4),
       st.randoms(use_true_random=False))
def test_filtration_permutation_invariance(xs, rnd):
    units = [Q([x]) for x in xs]
    vals = [a_val(x, 3) for x in units]
    assume(len(set(vals)) == len(vals))
    base = sorted(filtrate(units, 3).af, key=str)
    perm = list(units)
    rnd.shuffle(perm)
    assert sorted(filtrate(perm, 3).af, key=str) == base


def test_permutation_dependence_with_tied_values():
    # e and e^2 share a-value 2, so the order decides which one is reduced to 1
    _, units = cube_root_units()
    afs = {tuple(sorted(filtrate(list(perm), 3).af, key=str))
           for perm in itertools.permutations(units)}
    assert afs == {(2, 3, math.inf), (11, 2, 3)}


def test_filtration_no_progress_surfaced():
    # 10 and 10: the duplicate matches the basis element but no multiplier in
    # 0..(p-1)^2 raises its valuation past the match except i = 1, which gives 1
    res = filtrate([Q([10]), Q([10])], 3)
    assert res.transcript == [(1, 0, 0)]
    with pytest.raises(NoProgress):
        filtrate([Q([4]), Q([4 * 4 * 4 * 4])], 3, max_steps=0)


def test_load_units():
    Kx, units, p = load_units({"minpoly": ["-3", "0", "0", "1"], "units": [["-2", "0", "1"]], "p": 3})
    assert Kx == K and p == 3 and units[0] == a * a - 2
