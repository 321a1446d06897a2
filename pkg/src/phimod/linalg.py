"""Dense linear algebra over F_p (numpy backed) and over F_q (pure Python)."""
from __future__ import annotations

import numpy as np


# ---------------------------------------------------------------- F_p

def rref_mod(M, p):
    """Reduced row echelon form over F_p.  Returns (R, pivot_columns)."""
    R = np.array(M, dtype=np.int64) % p
    if R.ndim != 2 or R.size == 0:
        return R.reshape(R.shape if R.ndim == 2 else (0, 0)), []
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        inv = pow(int(R[r, c]), p - 2, p)
        R[r] = (R[r] * inv) % p
        col = R[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            R[nzr] = (R[nzr] - np.outer(col[nzr], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod(M, p):
    return len(rref_mod(M, p)[1])


def nullspace_mod(M, p, ncols=None):
    """Basis (list of int vectors) of {x : M x = 0} over F_p."""
    M = np.array(M, dtype=np.int64)
    if M.size == 0:
        n = ncols if ncols is not None else (M.shape[1] if M.ndim == 2 else 0)
        return [np.eye(n, dtype=np.int64)[k] for k in range(n)]
    R, piv = rref_mod(M, p)
    n = R.shape[1]
    free = [c for c in range(n) if c not in set(piv)]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = (-R[i, f]) % p
        basis.append(v)
    return basis


def solve_mod(M, b, p):
    """One solution of M x = b over F_p (free variables zero) or None."""
    M = np.array(M, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64).reshape(-1) % p
    rows = M.shape[0]
    n = M.shape[1] if M.ndim == 2 else 0
    if rows == 0:
        return np.zeros(n, dtype=np.int64)
    aug = np.concatenate([M, b.reshape(-1, 1)], axis=1)
    R, piv = rref_mod(aug, p)
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = R[i, n]
    return x


def linear_map_matrix(fn, n_in, p):
    """Matrix of an F_p-linear map given as a function on int vectors."""
    cols = []
    for k in range(n_in):
        e = [0] * n_in
        e[k] = 1
        cols.append([int(x) % p for x in fn(e)])
    if not cols:
        return np.zeros((len(fn([])), 0), dtype=np.int64)
    return np.array(cols, dtype=np.int64).T


# ---------------------------------------------------------------- F_q

def fq_matmul(F, A, B):
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    out = []
    for row in A:
        r = []
        for j in range(cols):
            acc = 0
            for k in range(inner):
                if row[k] and B[k][j]:
                    acc = F.add(acc, F.mul(row[k], B[k][j]))
            r.append(acc)
        out.append(r)
    return out


def fq_matvec(F, A, x):
    out = []
    for row in A:
        acc = 0
        for a, b in zip(row, x):
            if a and b:
                acc = F.add(acc, F.mul(a, b))
        out.append(acc)
    return out


def fq_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def fq_rref(F, M):
    R = [list(r) for r in M]
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        k = next((i for i in range(r, rows) if R[i][c]), None)
        if k is None:
            continue
        R[r], R[k] = R[k], R[r]
        inv = F.inv(R[r][c])
        R[r] = [F.mul(inv, x) for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def fq_rank(F, M):
    return len(fq_rref(F, M)[1])


def fq_inverse(F, M):
    n = len(M)
    aug = [list(M[i]) + fq_identity(n)[i] for i in range(n)]
    R, piv = fq_rref(F, aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix over F_q")
    return [row[n:] for row in R]


def fq_nullspace(F, M, ncols):
    """Basis of {x : M x = 0} as a list of column vectors."""
    if not M:
        return [[1 if i == k else 0 for i in range(ncols)] for k in range(ncols)]
    R, piv = fq_rref(F, M)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = F.neg(R[i][f])
        basis.append(v)
    return basis


def fq_column_space(F, vectors, n):
    """Echelon basis of the span of the given length-n vectors."""
    if not vectors:
        return []
    R, piv = fq_rref(F, [list(v) for v in vectors])
    return [R[i] for i in range(len(piv))]


def fq_solve(F, M, b):
    """One solution of M x = b or None."""
    n = len(M[0]) if M else 0
    aug = [list(M[i]) + [b[i]] for i in range(len(M))]
    R, piv = fq_rref(F, aug)
    if n in piv:
        return None
    x = [0] * n
    for i, c in enumerate(piv):
        x[c] = R[i][n]
    return x
