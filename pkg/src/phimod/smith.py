"""
Smith normal form over the truncated ring k[u]/(u^n) and the lattice
helpers built on it (span membership, containment, intersections).

k[u]/(u^n) is a local principal ideal ring, so every matrix M admits
invertible U, V with U M V = diag(u^e_1, u^e_2, ...), e_1 <= e_2 <= ...;
an exponent equal to n means the diagonal entry is zero modulo u^n.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import PrecisionLoss
from .series import SeriesRing, mat_mul, mat_vec


@dataclass
class Smith:
    U: list
    D: list
    V: list
    exps: list  # one per diagonal slot, min(rows, cols) of them
    rows: int
    cols: int

    @property
    def rank(self):
        """Number of elementary divisors that are nonzero mod u^n."""
        n = self.D[0][0].ring.prec if self.D and self.D[0] else 0
        return sum(1 for e in self.exps if e < n)


def u_smith_form(M, ring: SeriesRing, allow_zero=True, cols=None) -> Smith:
    rows = len(M)
    ncols = len(M[0]) if rows else (cols or 0)
    n = ring.prec
    A = [list(r) for r in M]
    U = ring.identity(rows)
    V = ring.identity(ncols)
    zero = ring.zero()
    exps = []
    for k in range(min(rows, ncols)):
        best, bi, bj = n, -1, -1
        for i in range(k, rows):
            Ai = A[i]
            for j in range(k, ncols):
                v = Ai[j].valuation()
                if v < best:
                    best, bi, bj = v, i, j
                    if v == 0:
                        break
            if best == 0:
                break
        if best >= n:
            exps.extend([n] * (min(rows, ncols) - k))
            break
        if bi != k:
            A[k], A[bi] = A[bi], A[k]
            U[k], U[bi] = U[bi], U[k]
        if bj != k:
            for r in A:
                r[k], r[bj] = r[bj], r[k]
            for r in V:
                r[k], r[bj] = r[bj], r[k]
        e, unit = A[k][k].unit_part()
        uinv = unit.inverse()
        # normalise the pivot to exactly u^e
        A[k] = [x * uinv for x in A[k]]
        U[k] = [x * uinv for x in U[k]]
        for i in range(k + 1, rows):
            x = A[i][k]
            if x.is_zero():
                continue
            f = x.shift(-e)
            A[i] = [a - f * b for a, b in zip(A[i], A[k])]
            U[i] = [a - f * b for a, b in zip(U[i], U[k])]
        for j in range(k + 1, ncols):
            x = A[k][j]
            if x.is_zero():
                continue
            f = x.shift(-e)
            for r in A:
                r[j] = r[j] - f * r[k]
            for r in V:
                r[j] = r[j] - f * r[k]
        exps.append(e)
    D = [[A[i][j] if i == j else zero for j in range(ncols)] for i in range(rows)]
    if not allow_zero and any(e >= n for e in exps):
        raise PrecisionLoss(
            "elementary divisor vanishes modulo the working precision",
            exponents=exps, prec=n)
    return Smith(U, D, V, exps, rows, ncols)


def elementary_exponents(M, ring):
    return u_smith_form(M, ring).exps


def inverse(M, ring):
    """Inverse of a matrix invertible over the truncated ring."""
    sm = u_smith_form(M, ring)
    if any(e != 0 for e in sm.exps) or sm.rows != sm.cols:
        raise ZeroDivisionError("matrix is not invertible over the truncated ring")
    return mat_mul(sm.V, sm.U, ring)


def is_invertible(M, ring):
    if not M:
        return True
    if len(M) != len(M[0]):
        return False
    return all(e == 0 for e in u_smith_form(M, ring).exps)


class Lattice:
    """Column span of a matrix X over k[u]/(u^n), with membership tests."""

    def __init__(self, X, ring, nrows=None):
        self.ring = ring
        self.nrows = len(X) if X else (nrows or 0)
        self.X = X if X else [[] for _ in range(self.nrows)]
        self.ncols = len(X[0]) if X and X[0] else 0
        self.sm = u_smith_form(self.X, ring, cols=self.ncols) if self.nrows and self.ncols else None

    def coords(self, y):
        """Some c with X c = y, or None if y is not in the span."""
        ring = self.ring
        n = ring.prec
        if self.sm is None:
            return [] if all(a.is_zero() for a in y) else None
        z = mat_vec(self.sm.U, y, ring)
        c = [ring.zero()] * self.ncols
        for i, zi in enumerate(z):
            e = self.sm.exps[i] if i < len(self.sm.exps) else n
            if zi.valuation() < e:
                return None
            if i < self.ncols and e < n:
                c[i] = zi.shift(-e)
        return mat_vec(self.sm.V, c, ring)

    def contains(self, y):
        return self.coords(y) is not None

    def contains_all(self, Y):
        if not Y or not Y[0]:
            return True
        return all(self.contains([r[j] for r in Y]) for j in range(len(Y[0])))
