"""
sigma-semilinear operators on F_q^n and the solvers built on them.

Every semilinear equation is solved by viewing it as an F_p-linear system
in the base-p coordinates of the unknowns.
"""
from __future__ import annotations

from .errors import FieldTooSmall
from .field import GF
from .linalg import (fq_column_space, fq_identity, fq_inverse, fq_matmul, fq_matvec,
                     fq_nullspace, linear_map_matrix, nullspace_mod, solve_mod)


class SemilinearOp:
    """x -> matrix . sigma^twist(x) on F_q^n."""

    def __init__(self, field: GF, matrix, twist: int = 1):
        self.field = field
        self.matrix = [list(r) for r in matrix]
        self.twist = twist
        self.dim = len(self.matrix)

    def __repr__(self):
        return f"SemilinearOp(dim={self.dim}, twist={self.twist}, matrix={self.matrix})"

    def __call__(self, x):
        F = self.field
        return fq_matvec(F, self.matrix, [F.frob(c, self.twist) for c in x])

    def frob_matrix(self, k):
        F = self.field
        return [[F.frob(a, k) for a in r] for r in self.matrix]

    def power(self, k):
        """A^k as a semilinear operator with twist k*e."""
        F = self.field
        M = fq_identity(self.dim)
        for t in range(k):
            # A^(t+1) = A^t o A : matrix M . sigma^(t e)(A)
            M = fq_matmul(F, M, self.frob_matrix(t * self.twist))
        return SemilinearOp(F, M, self.twist * k)

    def is_nilpotent(self):
        return all(c == 0 for r in self.power(self.dim).matrix for c in r)


def _flatten(F, vec):
    out = []
    for c in vec:
        out.extend(F.to_coords(c))
    return out


def _unflatten(F, bits):
    m = F.m
    return [F.from_coords(bits[k * m:(k + 1) * m]) for k in range(len(bits) // m)]


def solve_id_minus_A(A: SemilinearOp, b):
    """Solve x - A(x) = b over F_q.

    Raises FieldTooSmall when the F_p-linear system is inconsistent.  When
    A is nilpotent the solution is unique.
    """
    F = A.field
    n = A.dim
    if n == 0:
        return []

    def lin(bits):
        x = _unflatten(F, bits)
        ax = A(x)
        return _flatten(F, [F.sub(xi, yi) for xi, yi in zip(x, ax)])

    M = linear_map_matrix(lin, n * F.m, F.p)
    sol = solve_mod(M, _flatten(F, b), F.p)
    if sol is None:
        raise FieldTooSmall(
            f"x - A(x) = b has no solution over F_{F.q}",
            q=F.q, matrix=A.matrix, twist=A.twist, rhs=list(b))
    return _unflatten(F, [int(v) for v in sol])


def id_minus_A_kernel(A: SemilinearOp):
    """F_p-basis of the solutions of x = A(x)."""
    F = A.field
    n = A.dim

    def lin(bits):
        x = _unflatten(F, bits)
        ax = A(x)
        return _flatten(F, [F.sub(xi, yi) for xi, yi in zip(x, ax)])

    M = linear_map_matrix(lin, n * F.m, F.p)
    return [_unflatten(F, [int(v) for v in vec]) for vec in nullspace_mod(M, F.p, n * F.m)]


def solve_sigma_block(C, a, sigma0: SemilinearOp, s: int):
    """Find g = (g_1, g_2) with (sigma0 g_1, 0) = g C + a.

    C is an invertible n x n matrix over F_q, a is a list of n vectors of
    V = F_q^dim (sigma0 acts on V), and g_1 has the first s entries.
    """
    F = sigma0.field
    n = len(C)
    dv = sigma0.dim
    Cinv = fq_inverse(F, C)
    # a' = a C^{-1}, entry j = sum_i a_i Cinv[i][j]
    ap = [_lincomb(F, [Cinv[i][j] for i in range(n)], a, dv) for j in range(n)]
    if s == 0:
        return [[F.neg(x) for x in v] for v in ap]
    # g_1 = (sigma0 g_1) D11 - a'_1 ; unknown g_1 flattened into s*dv coordinates
    big = [[0] * (s * dv) for _ in range(s * dv)]
    for j in range(s):
        for i in range(s):
            d = Cinv[i][j]
            if d:
                for r in range(dv):
                    for c in range(dv):
                        big[j * dv + r][i * dv + c] = F.mul(d, sigma0.matrix[r][c])
    A = SemilinearOp(F, big, sigma0.twist)
    rhs = []
    for j in range(s):
        rhs.extend(F.neg(x) for x in ap[j])
    flat = solve_id_minus_A(A, rhs)
    g1 = [flat[k * dv:(k + 1) * dv] for k in range(s)]
    sg1 = [sigma0(v) for v in g1]
    g2 = []
    for j in range(s, n):
        t = _lincomb(F, [Cinv[i][j] for i in range(s)], sg1, dv)
        g2.append([F.sub(x, y) for x, y in zip(t, ap[j])])
    return g1 + g2


def _lincomb(F, coeffs, vecs, dv):
    out = [0] * dv
    for c, v in zip(coeffs, vecs):
        if c:
            for k in range(dv):
                if v[k]:
                    out[k] = F.add(out[k], F.mul(c, v[k]))
    return out


def sigma_block_residual(C, a, sigma0: SemilinearOp, s, g):
    """(sigma0 g_1, 0) - g C - a, entrywise."""
    F = sigma0.field
    n = len(C)
    dv = sigma0.dim
    out = []
    for j in range(n):
        lhs = sigma0(g[j]) if j < s else [0] * dv
        gc = _lincomb(F, [C[i][j] for i in range(n)], g, dv)
        out.append([F.sub(F.sub(x, y), z) for x, y, z in zip(lhs, gc, a[j])])
    return out


def fitting_split(A: SemilinearOp):
    """(V_inv, V_nil) = (image of A^n, kernel of A^n), as lists of basis vectors."""
    F = A.field
    n = A.dim
    if n == 0:
        return [], []
    An = A.power(n)
    M = An.matrix
    cols = [[M[i][j] for i in range(n)] for j in range(n)]
    image = fq_column_space(F, cols, n)
    ker = fq_nullspace(F, M, n)
    # A^n(x) = M sigma^k(x); kernel is sigma^{-k} of ker M
    k = An.twist
    kernel = [[F.frob(c, -k) for c in v] for v in ker]
    return image, kernel
