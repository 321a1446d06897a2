"""Brute-force references for small instances.

Nothing here calls the normalization or decomposition code; the
coboundary space is generated straight from its definition
{w_j - u^{b̃_j} phi(w_{j-1})} with phi taken from the sub-object itself.
"""
from __future__ import annotations

import itertools

from .field import GF
from .linalg import nullspace_mod, rank_mod, rref_mod
from .objects import PhiNModule
from .semilinear import SemilinearOp
from .series import SeriesRing


def sub_object(ctx, ring: SeriesRing) -> PhiNModule:
    s = ctx.s
    B = ring.zeros(s, s)
    for i in range(s):
        B[i][(i + 1) % s] = ring.u(ctx.A(i))
    return PhiNModule(ring, B, ring.zeros(s, s))


def _index(ctx, F, n):
    """Coordinate layout (i, j, t, k) -> position in a flat F_p vector."""
    s, m = ctx.s, F.m
    return lambda i, j, t, k: ((((i % s) * s + j % s) * n + t) * m) + k


def system_vector(fs, F: GF, n):
    ctx = fs.ctx
    idx = _index(ctx, F, n)
    v = [0] * (ctx.s * ctx.s * n * F.m)
    for (i, j, t), g in fs.terms.items():
        if t < n:
            for k, c in enumerate(F.to_coords(g)):
                v[idx(i, j, t, k)] = c
    return v


def coboundary_generators(ctx, F: GF, n):
    """F_p-spanning set of the coboundaries, as flat vectors.

    w_j runs over c u^t l_i with t >= ã_i and c an F_p-basis element of F.
    """
    ring = SeriesRing(F, n)
    L1 = sub_object(ctx, ring)
    s = ctx.s
    idx = _index(ctx, F, n)
    size = s * s * n * F.m
    basis = [F.from_coords([1 if k == e else 0 for k in range(F.m)]) for e in range(F.m)]
    gens = []
    for j in range(s):
        for i in range(s):
            for t in range(ctx.A(i), n):
                for c in basis:
                    v = [0] * size
                    x = [ring.zero()] * s
                    x[i] = ring.monomial(c, t)
                    # + w_j in slot j
                    for k, a in enumerate(F.to_coords(c)):
                        v[idx(i, j, t, k)] = (v[idx(i, j, t, k)] + a) % F.p
                    # - u^{b̃_{j+1}} phi(w_j) in slot j+1
                    y = L1.phi(x)
                    for r in range(s):
                        z = y[r].shift(ctx.Bt(j + 1))
                        for tt in range(n):
                            g = z.coeff(tt)
                            if g:
                                for k, a in enumerate(F.to_coords(g)):
                                    pos = idx(r, j + 1, tt, k)
                                    v[pos] = (v[pos] - a) % F.p
                    gens.append(v)
    return gens


def is_coboundary(fs, F: GF, n=None):
    """True when fs lies in the F_p-span of the coboundaries over F."""
    ctx = fs.ctx
    n = n or ctx.prec
    gens = coboundary_generators(ctx, F, n)
    v = system_vector(fs, F, n)
    if not any(v):
        return True
    return rank_mod(gens + [v], F.p) == rank_mod(gens, F.p)


def rational_class_count(ctx, big: GF, n):
    """Classes of crystalline systems with F_p-coefficients modulo coboundaries over big.

    Returns (number of classes, {coefficient tuple: class label}, [(i, j, t)])
    where the coefficient tuple is read along the (i, j, t) list.  Classes are
    computed by enumerating every rational system and reducing it modulo
    the rational part of the coboundary space.
    """
    F = big
    p = F.p
    s = ctx.s
    idx = _index(ctx, F, n)
    size = s * s * n * F.m
    # rational crystalline coordinates: F_p-coordinate 0 of t >= ã_i
    keys = [(i, j, t) for i in range(s) for j in range(s) for t in range(ctx.A(i), n)]
    rat = [idx(i, j, t, 0) for i, j, t in keys]
    gens = coboundary_generators(ctx, F, n)
    outside = [k for k in range(size) if k not in set(rat)]
    # combinations y with G^T y vanishing outside the rational coordinates
    M = [[g[k] for g in gens] for k in outside]
    ys = nullspace_mod(M, p, len(gens)) if M else [[int(a == b) for a in range(len(gens))]
                                                   for b in range(len(gens))]
    D = []
    for y in ys:
        vec = [0] * len(rat)
        for c, g in zip(y, gens):
            c = int(c)
            if c:
                for a, k in enumerate(rat):
                    vec[a] = (vec[a] + c * g[k]) % p
        D.append(vec)
    if D:
        Rm, pivots = rref_mod(D, p)
        R = [[int(x) for x in Rm[k]] for k in range(len(pivots))]
    else:
        R, pivots = [], []

    def reduce(vec):
        vec = list(vec)
        for r, c in zip(R, pivots):
            a = vec[c]
            if a:
                vec = [(x - a * y) % p for x, y in zip(vec, r)]
        return tuple(vec)

    labels = {}
    for vals in itertools.product(range(p), repeat=len(rat)):
        labels[vals] = reduce(vals)
    return len(set(labels.values())), labels, keys


def solve_exhaustive(A: SemilinearOp, b):
    """All x in F_q^n with x - A(x) = b."""
    F = A.field
    out = []
    for x in itertools.product(range(F.q), repeat=A.dim):
        ax = A(list(x))
        if all(F.sub(xi, yi) == bi for xi, yi, bi in zip(x, ax, b)):
            out.append(list(x))
    return out


# hand-executed trace of the greedy unit filtration on K = Q, units [4, 10], p = 3:
#   a(4):  shift 0 gives v3(4) = 0, shift 1 gives v3(3) = 1        -> a = 1
#   a(10): shift 0 gives v3(10) = 0, shift 1 gives v3(9) = 2       -> a = 2
#   seed f = [4]; candidate 10 has min a = 2; only k = 0 exists (degree 1)
#   and a(4) = 1 < 2 so no basis power matches -> 10 is appended.
FILTRATION_Q_4_10 = {"basis": [[4], [10]], "af": [1, 2], "transcript": []}
