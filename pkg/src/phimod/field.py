"""
Finite fields F_q, q = p^m, given by an explicit modulus over F_p.

Elements are plain Python ints in [0, q). The base-p digits of an element
are its coordinates in the power basis 1, x, ..., x^{m-1}, so the prime
field sits inside every extension as the ints 0..p-1.
"""
from __future__ import annotations

from functools import lru_cache

from .errors import BadInput

# above this size the addition table is skipped and digits are added on the fly
_ADD_TABLE_LIMIT = 729


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomials over F_p, little-endian lists ---------------------------

def _ptrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, f, p):
    a = [x % p for x in a]
    a = _ptrim(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= df and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        a = _ptrim(a)
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _ptrim(out)


def _psub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _ptrim([(x - y) % p for x, y in zip(a, b)])


def _pgcd(a, b, p):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _ppowmod(base, e, f, p):
    result = [1]
    base = _pmod(base, f, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), f, p)
        base = _pmod(_pmul(base, base, p), f, p)
        e >>= 1
    return result


def is_irreducible(modulus, p) -> bool:
    """Rabin's test for a polynomial over F_p (little-endian coefficients)."""
    f = _ptrim([c % p for c in modulus])
    m = len(f) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    x = [0, 1]
    if _psub(_ppowmod(x, p ** m, f, p), x, p):
        return False
    for r in _prime_factors(m):
        h = _psub(_ppowmod(x, p ** (m // r), f, p), x, p)
        g = _pgcd(f, h, p)
        if len(g) > 1:
            return False
    return True


def default_modulus(p: int, m: int):
    """Lexicographically least monic irreducible polynomial of degree m."""
    if m == 1:
        return [0, 1]
    for n in range(p ** m):
        low = [(n // p ** k) % p for k in range(m)]
        cand = low + [1]
        if low[0] and is_irreducible(cand, p):
            return cand
    raise BadInput(f"no irreducible polynomial of degree {m} over F_{p}")


class GF:
    """The field F_p[x]/(modulus)."""

    def __init__(self, p: int, modulus=None, m: int | None = None, check=True):
        if modulus is None:
            modulus = default_modulus(p, m or 1)
        modulus = [int(c) % p for c in modulus]
        modulus = _ptrim(modulus)
        if check:
            if not is_prime(p) or p == 2:
                raise BadInput(f"p must be an odd prime, got {p}")
            if not modulus or modulus[-1] != 1:
                raise BadInput("modulus must be monic")
            if not is_irreducible(modulus, p):
                raise BadInput(f"modulus {modulus} is reducible over F_{p}")
        self.p = p
        self.modulus = tuple(modulus)
        self.m = len(modulus) - 1
        self.q = p ** self.m
        self._build()

    # structural identity: same p and modulus means same field
    def __eq__(self, other):
        return isinstance(other, GF) and self.p == other.p and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        return f"GF({self.p}^{self.m}, modulus={list(self.modulus)})"

    def spec(self):
        return {"p": self.p, "m": self.m, "modulus": list(self.modulus)}

    # -- construction of tables
    def _slow_mul(self, a, b):
        pa, pb = self.to_coords(a), self.to_coords(b)
        r = _pmod(_pmul(pa, pb, self.p), list(self.modulus), self.p)
        return self.from_coords(r)

    def _build(self):
        p, q = self.p, self.q
        self._pw = [p ** k for k in range(self.m + 1)]
        if self.m == 1:
            self._add = None
        elif q <= _ADD_TABLE_LIMIT:
            self._add = [[self._add_digits(a, b) for b in range(q)] for a in range(q)]
        else:
            self._add = None
        # a primitive element, then exp/log tables
        order = q - 1
        factors = _prime_factors(order) if order > 1 else []
        gen = None
        for g in range(1, q):
            ok = True
            for r in factors:
                if self._slow_pow(g, order // r) == 1:
                    ok = False
                    break
            if ok:
                gen = g
                break
        self.generator = gen
        exp = [1] * max(order, 1)
        for k in range(1, order):
            exp[k] = self._slow_mul(exp[k - 1], gen)
        log = [0] * q
        for k in range(order):
            log[exp[k]] = k
        self._exp = exp + exp
        self._log = log
        self._frob = [self.pow(a, p) for a in range(q)]
        fi = [0] * q
        for a in range(q):
            fi[self._frob[a]] = a
        self._frob_inv = fi

    def _slow_pow(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self._slow_mul(r, a)
            a = self._slow_mul(a, a)
            e >>= 1
        return r

    # -- coordinates
    def to_coords(self, a):
        p = self.p
        out = []
        for _ in range(self.m):
            out.append(a % p)
            a //= p
        return out

    def from_coords(self, coords):
        p = self.p
        v = 0
        for k, c in enumerate(list(coords)[: self.m]):
            v += (int(c) % p) * self._pw[k]
        return v

    def _add_digits(self, a, b):
        p = self.p
        v, k = 0, 1
        while a or b:
            v += ((a % p + b % p) % p) * k
            a //= p
            b //= p
            k *= p
        return v

    # -- arithmetic
    def add(self, a, b):
        if self.m == 1:
            return (a + b) % self.p
        if self._add is not None:
            return self._add[a][b]
        return self._add_digits(a, b)

    def neg(self, a):
        if self.m == 1:
            return (-a) % self.p
        p = self.p
        v, k = 0, 1
        while a:
            v += ((-(a % p)) % p) * k
            a //= p
            k *= p
        return v

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self.m == 1:
            return a * b % self.p
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        if self.m == 1:
            return pow(a, self.p - 2, self.p)
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if a == 0:
            return 0 if e > 0 else 1
        if self.m == 1:
            return pow(a, e % (self.p - 1), self.p)
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def scalar(self, n):
        """Image of the integer n."""
        return int(n) % self.p

    def frob(self, a, k=1):
        """a -> a^(p^k); negative k applies the inverse Frobenius."""
        k %= self.m
        for _ in range(k):
            a = self._frob[a]
        return a

    def frob_inv(self, a):
        return self._frob_inv[a]

    def elements(self):
        return range(self.q)

    def in_subfield(self, a, d):
        """True when a lies in F_{p^d}."""
        return self.pow(a, self.p ** d) == a

    def trace(self, a):
        t, x = 0, a
        for _ in range(self.m):
            t = self.add(t, x)
            x = self._frob[x]
        return t


@lru_cache(maxsize=None)
def get_field(p: int, m: int = 1, modulus: tuple | None = None) -> GF:
    """Cached field constructor; fields are immutable so sharing is safe."""
    return GF(p, list(modulus) if modulus is not None else None, m=m)
