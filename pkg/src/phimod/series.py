"""
Truncated power series k[u]/(u^n) over a finite field, with the twisted
Frobenius sigma(u) = u^p and the derivation N(u) = -u.

The truncated ring is treated as an exact ring in its own right: every
operation here is exact modulo u^n.  Matrices are plain lists of rows.
"""
from __future__ import annotations

from .field import GF


class SeriesRing:
    def __init__(self, field: GF, prec: int | None = None):
        self.field = field
        self.p = field.p
        self.prec = prec if prec is not None else 3 * field.p
        if self.prec < 1:
            raise ValueError("precision must be positive")
        self._zero = TruncSeries(self, (0,) * self.prec)
        self._one = TruncSeries(self, (1,) + (0,) * (self.prec - 1))

    def __eq__(self, other):
        return isinstance(other, SeriesRing) and self.field == other.field and self.prec == other.prec

    def __hash__(self):
        return hash((self.field, self.prec))

    def __repr__(self):
        return f"SeriesRing({self.field!r}, prec={self.prec})"

    def zero(self):
        return self._zero

    def one(self):
        return self._one

    def const(self, c):
        if c == 0:
            return self._zero
        return TruncSeries(self, (c,) + (0,) * (self.prec - 1))

    def monomial(self, c, k):
        """c * u^k (zero when k >= prec)."""
        if c == 0 or k >= self.prec:
            return self._zero
        co = [0] * self.prec
        co[k] = c
        return TruncSeries(self, tuple(co))

    def u(self, k=1):
        return self.monomial(1, k)

    def from_coeffs(self, coeffs):
        co = [int(c) for c in coeffs][: self.prec]
        co += [0] * (self.prec - len(co))
        return TruncSeries(self, tuple(co))

    def from_dict(self, d):
        co = [0] * self.prec
        for k, c in d.items():
            if k < self.prec:
                co[k] = self.field.add(co[k], c)
        return TruncSeries(self, tuple(co))

    # matrices
    def zeros(self, rows, cols):
        return [[self._zero] * cols for _ in range(rows)]

    def identity(self, n):
        return [[self._one if i == j else self._zero for j in range(n)] for i in range(n)]

    def diag(self, entries):
        n = len(entries)
        return [[entries[i] if i == j else self._zero for j in range(n)] for i in range(n)]

    def with_prec(self, prec):
        return SeriesRing(self.field, prec)


class TruncSeries:
    __slots__ = ("ring", "c")

    def __init__(self, ring: SeriesRing, coeffs):
        self.ring = ring
        self.c = coeffs

    def __repr__(self):
        terms = [f"{c}*u^{i}" for i, c in enumerate(self.c) if c]
        return "(" + (" + ".join(terms) if terms else "0") + f" + O(u^{self.ring.prec}))"

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            return self.c == other.c
        if other == 0:
            return not any(self.c)
        return NotImplemented

    def __hash__(self):
        return hash(self.c)

    def __bool__(self):
        return any(self.c)

    def coeff(self, i):
        return self.c[i] if 0 <= i < len(self.c) else 0

    def valuation(self):
        for i, x in enumerate(self.c):
            if x:
                return i
        return self.ring.prec

    def is_zero(self):
        return not any(self.c)

    def __add__(self, other):
        F = self.ring.field
        if F.m == 1:
            p = F.p
            return TruncSeries(self.ring, tuple((a + b) % p for a, b in zip(self.c, other.c)))
        add = F.add
        return TruncSeries(self.ring, tuple(add(a, b) for a, b in zip(self.c, other.c)))

    def __neg__(self):
        neg = self.ring.field.neg
        return TruncSeries(self.ring, tuple(neg(a) for a in self.c))

    def __sub__(self, other):
        F = self.ring.field
        if F.m == 1:
            p = F.p
            return TruncSeries(self.ring, tuple((a - b) % p for a, b in zip(self.c, other.c)))
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        a, b = self.c, other.c
        n = len(a)
        F = self.ring.field
        out = [0] * n
        if F.m == 1:
            p = F.p
            for i in range(n):
                ai = a[i]
                if ai:
                    for j in range(n - i):
                        bj = b[j]
                        if bj:
                            out[i + j] += ai * bj
            return TruncSeries(self.ring, tuple(x % p for x in out))
        add, mul = F.add, F.mul
        for i in range(n):
            ai = a[i]
            if ai:
                for j in range(n - i):
                    bj = b[j]
                    if bj:
                        out[i + j] = add(out[i + j], mul(ai, bj))
        return TruncSeries(self.ring, tuple(out))

    def scale(self, c):
        """Multiply by a field element."""
        mul = self.ring.field.mul
        return TruncSeries(self.ring, tuple(mul(c, a) for a in self.c))

    def shift(self, k):
        """Multiply by u^k; for k < 0 divide, dropping the low terms.

        Division pads the unknown top coefficients with zeros, which picks
        one representative of the quotient modulo u^(n+k).
        """
        n = len(self.c)
        if k >= 0:
            return TruncSeries(self.ring, (0,) * min(k, n) + self.c[: max(n - k, 0)])
        k = -k
        return TruncSeries(self.ring, self.c[k:] + (0,) * min(k, n))

    def truncate(self, k):
        """Zero out every coefficient of degree >= k."""
        if k >= len(self.c):
            return self
        return TruncSeries(self.ring, self.c[:k] + (0,) * (len(self.c) - k))

    def frob(self, k=1):
        """sigma^k: sum c_i u^i -> sum c_i^(p^k) u^(p^k i)."""
        F = self.ring.field
        n = len(self.c)
        step = F.p ** k
        out = [0] * n
        for i, x in enumerate(self.c):
            if i * step >= n:
                break
            if x:
                out[i * step] = F.frob(x, k)
        return TruncSeries(self.ring, tuple(out))

    def deriv(self):
        """The derivation N with N(u) = -u, i.e. u^i -> -i u^i."""
        F = self.ring.field
        p = F.p
        out = []
        for i, x in enumerate(self.c):
            k = (-i) % p
            out.append(F.mul(k, x) if (k and x) else 0)
        return TruncSeries(self.ring, tuple(out))

    def inverse(self):
        """Inverse of a unit (nonzero constant term)."""
        F = self.ring.field
        a = self.c
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not a unit")
        n = len(a)
        inv0 = F.inv(a[0])
        b = [0] * n
        b[0] = inv0
        for k in range(1, n):
            s = 0
            for i in range(1, k + 1):
                if a[i] and b[k - i]:
                    s = F.add(s, F.mul(a[i], b[k - i]))
            b[k] = F.mul(F.neg(s), inv0)
        return TruncSeries(self.ring, tuple(b))

    def unit_part(self):
        """Split f = u^e * w with w a unit; returns (e, w).  Zero gives (prec, 0)."""
        e = self.valuation()
        if e >= len(self.c):
            return e, self.ring.zero()
        return e, self.shift(-e)

    def split_by_residue(self):
        """Write f = sum_{r<p} u^r sigma(g_r); returns the list of g_r.

        Each g_r is recovered only modulo the precision that survives the
        inverse Frobenius; unknown coefficients are zero.
        """
        F = self.ring.field
        p = F.p
        n = len(self.c)
        parts = []
        for r in range(p):
            g = [0] * n
            for i in range(r, n, p):
                x = self.c[i]
                if x:
                    g[(i - r) // p] = F.frob_inv(x)
            parts.append(TruncSeries(self.ring, tuple(g)))
        return parts

    def to_json(self):
        F = self.ring.field
        return [F.to_coords(x) for x in self.c]


# ---------------------------------------------------------------------------
# matrix helpers (lists of rows)

def mat_mul(A, B, ring=None):
    if not A:
        return []
    rows, inner = len(A), len(A[0])
    cols = len(B[0]) if B else 0
    if ring is None:
        ring = A[0][0].ring if inner else B[0][0].ring
    zero = ring.zero()
    out = []
    for i in range(rows):
        row = []
        Ai = A[i]
        for j in range(cols):
            acc = zero
            for k in range(inner):
                a = Ai[k]
                if a.c[0] or any(a.c):
                    b = B[k][j]
                    if any(b.c):
                        acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out


def mat_vec(A, v, ring):
    zero = ring.zero()
    out = []
    for row in A:
        acc = zero
        for a, x in zip(row, v):
            if any(a.c) and any(x.c):
                acc = acc + a * x
        out.append(acc)
    return out


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_neg(A):
    return [[-a for a in r] for r in A]


def mat_map(A, fn):
    return [[fn(a) for a in r] for r in A]


def mat_frob(A, k=1):
    return [[a.frob(k) for a in r] for r in A]


def transpose(A, cols=None):
    if not A:
        return [[] for _ in range(cols or 0)]
    return [list(r) for r in zip(*A)]


def column(A, j):
    return [r[j] for r in A]


def from_columns(cols, nrows):
    return [[c[i] for c in cols] for i in range(nrows)]


def mat_eq(A, B):
    if len(A) != len(B):
        return False
    return all(len(ra) == len(rb) and all(a == b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_truncate(A, k):
    return [[a.truncate(k) for a in r] for r in A]


def vec_truncate(v, k):
    return [a.truncate(k) for a in v]


def mat_min_valuation(A, ring):
    v = ring.prec
    for r in A:
        for a in r:
            v = min(v, a.valuation())
    return v


def mat_const(A, ring):
    """Reduce modulo u: matrix of field elements."""
    return [[a.c[0] for a in r] for r in A]


def lift_const(M, ring):
    return [[ring.const(x) for x in r] for r in M]
