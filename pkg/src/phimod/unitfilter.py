"""
Greedy filtration of a list of number-field units by the p-adic valuation
of shifted norms.

Elements are rational polynomials modulo a monic minimal polynomial; norms
are resultants, computed with the subresultant PRS over Z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BadInput, NoProgress, UndefinedValuation


# ---------------------------------------------------------------- polynomials
# little-endian coefficient lists


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _deg(a):
    return len(a) - 1


def _content(a):
    g = 0
    for x in a:
        g = math.gcd(g, x)
    return g


def _pseudo_rem(a, b):
    """lc(b)^(deg a - deg b + 1) * a mod b over Z."""
    a = list(a)
    db, lb = _deg(b), b[-1]
    e = _deg(a) - db + 1
    while a and _deg(a) >= db:
        c = a[-1]
        shift = _deg(a) - db
        a = [x * lb for x in a]
        for i, y in enumerate(b):
            a[i + shift] -= c * y
        a = _trim(a)
        e -= 1
    return [x * lb ** e for x in a]


def resultant_int(A, B):
    """Res(A, B) for integer polynomials (subresultant algorithm, all divisions exact)."""
    A, B = _trim(A), _trim(B)
    if not A or not B:
        return 0
    a, b = _content(A), _content(B)
    A = [x // a for x in A]
    B = [x // b for x in B]
    t = a ** _deg(B) * b ** _deg(A)
    s = 1
    if _deg(A) < _deg(B):
        A, B = B, A
        if _deg(A) % 2 and _deg(B) % 2:
            s = -s
    if _deg(B) == 0:
        return s * t * B[0] ** _deg(A)
    g = h = 1
    while True:
        delta = _deg(A) - _deg(B)
        if _deg(A) % 2 and _deg(B) % 2:
            s = -s
        R = _pseudo_rem(A, B)
        if not R:
            return 0
        div = g * h ** delta
        A, B = B, [x // div for x in R]
        g = A[-1]
        h = g ** delta // h ** (delta - 1) if delta else h
        if _deg(B) == 0:
            dA = _deg(A)
            h = B[-1] ** dA // h ** (dA - 1)
            return s * t * h


def resultant(f, g):
    """Res(f, g) for rational polynomials."""
    f = [Fraction(x) for x in _trim(f)]
    g = [Fraction(x) for x in _trim(g)]
    if not f or not g:
        return Fraction(0)
    cf = math.lcm(*[x.denominator for x in f])
    cg = math.lcm(*[x.denominator for x in g])
    fi = [int(x * cf) for x in f]
    gi = [int(x * cg) for x in g]
    return Fraction(resultant_int(fi, gi), cf ** _deg(g) * cg ** _deg(f))


def vp(x, p):
    """p-adic valuation of a rational, math.inf for 0."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


# ---------------------------------------------------------------- number fields


def parse_rational(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError as exc:
            raise BadInput(f"not a rational: {x!r}") from exc
    raise BadInput(f"not a rational: {x!r}")


class NumberField:
    def __init__(self, minpoly):
        mp = _trim([parse_rational(c) for c in minpoly])
        if len(mp) < 2:
            raise BadInput("minimal polynomial must have degree >= 1")
        if mp[-1] != 1:
            raise BadInput("minimal polynomial must be monic")
        self.minpoly = mp
        self.degree = len(mp) - 1

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(tuple(self.minpoly))

    def __repr__(self):
        return f"NumberField({[str(c) for c in self.minpoly]})"

    def __call__(self, coeffs):
        return NFElement(self, coeffs)

    def gen(self):
        return self([0, 1])

    def reduce(self, a):
        a = list(a)
        d, mp = self.degree, self.minpoly
        for k in range(len(a) - 1, d - 1, -1):
            c = a[k]
            if c:
                for i in range(d + 1):
                    a[k - d + i] -= c * mp[i]
        a = a[:d]
        return a + [Fraction(0)] * (d - len(a))


class NFElement:
    __slots__ = ("K", "c")

    def __init__(self, K: NumberField, coeffs):
        self.K = K
        co = [parse_rational(x) for x in coeffs]
        self.c = tuple(K.reduce(co))

    def _wrap(self, other):
        if isinstance(other, NFElement):
            return other
        return NFElement(self.K, [other])

    def __add__(self, other):
        o = self._wrap(other)
        return NFElement(self.K, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return NFElement(self.K, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        o = self._wrap(other)
        out = [Fraction(0)] * (2 * self.K.degree)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        out[i + j] += a * b
        return NFElement(self.K, out)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        # extended Euclid in Q[t]: s * x + t * m = 1
        r0, r1 = list(self.K.minpoly), _trim(list(self.c))
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while _deg(r1) > 0:
            q, r = _divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
        if not r1:
            raise ZeroDivisionError("element is a zero divisor; minimal polynomial is reducible")
        c = r1[0]
        return NFElement(self.K, [x / c for x in s1])

    def __truediv__(self, other):
        return self * self._wrap(other).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = NFElement(self.K, [1])
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, NFElement):
            return self.K == other.K and self.c == other.c
        return self == self._wrap(other)

    def __hash__(self):
        return hash(self.c)

    def is_zero(self):
        return not any(self.c)

    def norm(self) -> Fraction:
        return norm(self)

    def __repr__(self):
        return f"NFElement({[str(x) for x in self.c]})"

    def to_json(self):
        return [_fstr(x) for x in self.c]


def _fstr(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _psub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def _divmod(a, b):
    a = [Fraction(x) for x in a]
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lb = b[-1]
    while a and _deg(a) >= _deg(b):
        c = a[-1] / lb
        k = _deg(a) - _deg(b)
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        a = _trim(a)
    return _trim(q), a


def norm(x: NFElement) -> Fraction:
    """N_{K/Q}(x) = Res(minpoly, rep(x)) (minpoly monic)."""
    rep = _trim(list(x.c))
    if not rep:
        return Fraction(0)
    return resultant(x.K.minpoly, rep)


# ---------------------------------------------------------------- valuations


@dataclass
class ShiftedNorm:
    i: int
    n: Fraction
    fell_through: bool


def shifted_norm(x: NFElement, p) -> ShiftedNorm:
    """First i in 0..p-1 with v_p(norm(x - i)) != 0; the last i if none."""
    for i in range(p):
        n = norm(x - i)
        if vp(n, p) != 0:
            return ShiftedNorm(i, n, False)
    return ShiftedNorm(p - 1, n, True)


def a_val(x: NFElement, p, finite=False):
    sn = shifted_norm(x, p)
    v = vp(sn.n, p)
    if v == math.inf and finite:
        raise UndefinedValuation("shifted norm vanishes", shift=sn.i)
    return v


# ---------------------------------------------------------------- filtration


@dataclass
class FiltrationResult:
    basis: list
    af: list
    transcript: list = field(default_factory=list)
    appended: list = field(default_factory=list)  # input positions in basis order

    def to_json(self):
        return {"af": [_vstr(a) for a in self.af],
                "basis": [b.to_json() for b in self.basis],
                "transcript": [list(h) for h in self.transcript]}


def _vstr(v):
    return "inf" if v == math.inf else int(v)


def _match(f, cand_min, p, d, a_cache):
    """Search (j, k) with a_(f_j^(p^k)) == min(a), as in the source loop."""
    for j in range(len(f)):
        s = 0
        k = 0
        for k in range(d):
            s = 0
            v = a_cache(j, k)
            if v > cand_min:
                break
            if v == cand_min:
                s = 1
                break
        if s == 1:
            return j, k
    return None


def filtrate(units, p, max_steps=100000) -> FiltrationResult:
    """Greedy basis extraction: each candidate is either reduced by a power of an
    existing basis element (raising its valuation) or appended to the basis."""
    if not units:
        raise BadInput("need at least one unit")
    K = units[0].K
    d = K.degree
    e = list(units)
    pos = list(range(len(units)))
    a = [a_val(x, p) for x in e]
    k0 = a.index(min(a))
    f = [e.pop(k0)]
    appended = [pos.pop(k0)]
    h = []
    powcache = {}

    def fpow(j, k):
        key = (j, k)
        if key not in powcache:
            powcache[key] = f[j] ** (p ** k)
        return powcache[key]

    vcache = {}

    def a_cache(j, k):
        if (j, k) not in vcache:
            vcache[(j, k)] = a_val(fpow(j, k), p)
        return vcache[(j, k)]

    steps = 0
    while e:
        steps += 1
        if steps > max_steps:
            raise NoProgress("step limit reached", steps=steps)
        a = [a_val(x, p) for x in e]
        amin = min(a)
        i0 = a.index(amin)
        m = _match(f, amin, p, d, a_cache)
        if m is None:
            f.append(e.pop(i0))
            appended.append(pos.pop(i0))
            continue
        j, k = m
        base = fpow(j, k)
        for i in range((p - 1) ** 2 + 1):
            cand = e[i0] / base ** i
            if amin < a_val(cand, p):
                e[i0] = cand
                h.append((i, j, k))
                break
        else:
            raise NoProgress("no multiplier raises the valuation",
                             candidate=i0, j=j, k=k, value=_vstr(amin))
    af = [a_val(x, p) for x in f]
    return FiltrationResult(f, af, h, appended)


def replay_filtration(units, p, transcript):
    """Re-run the loop taking every reduction from the transcript instead of searching."""
    K = units[0].K
    d = K.degree
    e = list(units)
    a = [a_val(x, p) for x in e]
    f = [e.pop(a.index(min(a)))]
    moves = list(transcript)
    pc = {}

    def a_cache(j, k):
        if (j, k) not in pc:
            pc[(j, k)] = a_val(f[j] ** (p ** k), p)
        return pc[(j, k)]

    while e:
        a = [a_val(x, p) for x in e]
        amin = min(a)
        i0 = a.index(amin)
        if _match(f, amin, p, d, a_cache) is None:
            f.append(e.pop(i0))
            continue
        if not moves:
            raise NoProgress("transcript exhausted before the loop finished")
        i, j, k = moves.pop(0)
        e[i0] = e[i0] / f[j] ** (i * p ** k)
    if moves:
        raise NoProgress("unused transcript entries", left=len(moves))
    return f


def load_units(data):
    """Parse {"minpoly": [...], "units": [[...]], "p": int}; coefficients little-endian."""
    try:
        K = NumberField(data["minpoly"])
        units = [K(u) for u in data["units"]]
        p = int(data["p"])
    except (KeyError, TypeError) as exc:
        raise BadInput(f"malformed unit file: {exc}") from exc
    return K, units, p
