import pytest
from hypothesis import given, settings, strategies as st

from phimod.errors import FieldTooSmall
from phimod.field import get_field
from phimod.oracles import solve_exhaustive
from phimod.semilinear import (SemilinearOp, fitting_split, sigma_block_residual,
                               solve_id_minus_A, solve_sigma_block)


def test_zero_operator():
    F = get_field(5, 1)
    assert solve_id_minus_A(SemilinearOp(F, [[0, 0], [0, 0]]), [3, 4]) == [3, 4]


@pytest.mark.parametrize("m,solvable", [(1, False), (2, False), (3, True)])
def test_artin_schreier_x_minus_x_cubed(m, solvable):
    F = get_field(3, m)
    A = SemilinearOp(F, [[1]], 1)
    brute = solve_exhaustive(A, [1])
    assert bool(brute) == solvable
    if solvable:
        assert solve_id_minus_A(A, [1]) in brute
    else:
        with pytest.raises(FieldTooSmall):
            solve_id_minus_A(A, [1])


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([(3, 1), (3, 2), (5, 1), (7, 1), (3, 3)]), st.integers(1, 2),
       st.sampled_from([1, -1]), st.data())
def test_solver_matches_exhaustive(pm, n, twist, data):
    F = get_field(*pm)
    el = st.integers(0, F.q - 1)
    A = SemilinearOp(F, [[data.draw(el) for _ in range(n)] for _ in range(n)], twist)
    b = [data.draw(el) for _ in range(n)]
    brute = solve_exhaustive(A, b)
    if brute:
        assert solve_id_minus_A(A, b) in brute
    else:
        with pytest.raises(FieldTooSmall):
            solve_id_minus_A(A, b)


def test_sigma_block_trivial_cases():
    F = get_field(3, 2)
    a = [[1, 2], [3, 4]]
    sig = SemilinearOp(F, [[0, 0], [0, 0]])
    g = solve_sigma_block([[1, 0], [0, 1]], a, sig, 2)
    assert g == [[F.neg(x) for x in v] for v in a]
    g = solve_sigma_block([[1, 0], [0, 1]], a, sig, 0)
    assert g == [[F.neg(x) for x in v] for v in a]


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_sigma_block_residual_zero(data):
    F = get_field(3, 2)
    el = st.integers(0, F.q - 1)
    n, s, dv = 2, 1, data.draw(st.integers(1, 2))
    C = data.draw(st.lists(st.lists(el, min_size=n, max_size=n), min_size=n, max_size=n)
                  .filter(lambda C: F.sub(F.mul(C[0][0], C[1][1]), F.mul(C[0][1], C[1][0])) != 0))
    sig = SemilinearOp(F, [[data.draw(el) for _ in range(dv)] for _ in range(dv)])
    a = [[data.draw(el) for _ in range(dv)] for _ in range(n)]
    try:
        g = solve_sigma_block(C, a, sig, s)
    except FieldTooSmall:
        return
    assert all(x == 0 for v in sigma_block_residual(C, a, sig, s, g) for x in v)


def test_fitting_examples():
    F = get_field(3, 1)
    inv, nil = fitting_split(SemilinearOp(F, [[1, 0], [0, 0]]))
    assert inv == [[1, 0]] and nil == [[0, 1]]
    inv, nil = fitting_split(SemilinearOp(F, [[0, 0], [0, 0]]))
    assert inv == [] and len(nil) == 2
    inv, nil = fitting_split(SemilinearOp(F, [[1, 1], [0, 1]]))
    assert len(inv) == 2 and nil == []
