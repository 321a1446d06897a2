"""
Simple objects L(r), admissible index pairs and the numerical constants
attached to them (Kummer-type constants, Galois characters, ramification).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext
from fractions import Fraction

from .digits import DigitRational
from .errors import AdmissibilityMismatch, BadInput
from .field import GF, get_field
from .objects import PhiNModule, lift_N
from .series import SeriesRing


def build_simple(r: DigitRational, ring: SeriesRing) -> PhiNModule:
    """L(r): F = sum u^{ã_i} l_i and phi(u^{ã_i} l_i) = l_{i+1}, N crystalline."""
    if r.p != ring.p:
        raise BadInput("digit base and field characteristic differ", p=r.p, field_p=ring.p)
    s = r.period
    B = ring.zeros(s, s)
    for i in range(s):
        B[i][(i + 1) % s] = ring.u(r.co_digit(i))
    L = PhiNModule(ring, B, ring.zeros(s, s), name=f"L({r})")
    return lift_N(L, ring.zeros(s, s))


def simple_exponents(r: DigitRational, s=None):
    """ã_0..ã_{s-1} (ã_0 = ã_s)."""
    s = s or r.period
    return [r.co_digit(i) for i in range(s)]


class ExtContext:
    """Two simples r1 (sub) and r2 (quotient) read with a common period s."""

    def __init__(self, p, r1: DigitRational, r2: DigitRational, s=None, field: GF = None,
                 prec=None):
        if r1.p != p or r2.p != p:
            raise BadInput("digit rationals must use the base p", p=p)
        lcm = r1.period * r2.period // math.gcd(r1.period, r2.period)
        if s is None:
            s = lcm
        if s % lcm:
            raise BadInput(f"s={s} is not a multiple of both periods", s=s, periods=[r1.period, r2.period])
        self.p = p
        self.r1, self.r2 = r1, r2
        self.s = s
        self.field = field or get_field(p, 1)
        if self.field.p != p:
            raise BadInput("field characteristic must equal p")
        self.prec = prec or 3 * p
        self.a = [r1.digit(i) for i in range(s)]
        self.b = [r2.digit(j) for j in range(s)]
        self.at = [p - 1 - x for x in self.a]
        self.bt = [p - 1 - x for x in self.b]
        self._scaled = {}

    def __repr__(self):
        return f"ExtContext(p={self.p}, r1={self.r1}, r2={self.r2}, s={self.s})"

    @property
    def q(self):
        return self.p ** self.s

    def ring(self, prec=None):
        return SeriesRing(self.field, prec or max(self.prec, 2 * self.p))

    def A(self, i):
        return self.at[i % self.s]

    def Bt(self, j):
        return self.bt[j % self.s]

    def scaled(self, which, i):
        """(q-1) * r(i) as an integer, r = r1 or r2 shifted by i."""
        key = (which, i % self.s)
        if key not in self._scaled:
            r = self.r1 if which == 1 else self.r2
            # base-p integer read off the digits a_{i+1} .. a_{i+s}
            v = 0
            for k in range(1, self.s + 1):
                v = v * self.p + r.digit(i + k)
            self._scaled[key] = v
        return self._scaled[key]

    def to_json(self):
        return {"p": self.p, "r1": self.r1.to_json(), "r2": self.r2.to_json(), "s": self.s,
                "field": self.field.spec(), "prec": self.prec}


def _first_break(ctx, i0, j0, shift):
    """Least m in 1..s with ã_{i0+m} - shift != b̃_{j0+m}, or None."""
    for m in range(1, ctx.s + 1):
        if ctx.A(i0 + m) - shift != ctx.Bt(j0 + m):
            return m
    return None


def cr_admissible(ctx: ExtContext, i0, j0):
    if ctx.A(i0) == ctx.Bt(j0):
        return False, None
    m0 = _first_break(ctx, i0, j0, 0)
    if m0 is not None and ctx.A(i0 + m0) > ctx.Bt(j0 + m0):
        return True, m0
    return False, None


def st_admissible(ctx: ExtContext, i0, j0):
    p = ctx.p
    if ctx.Bt(j0) == p - 1 or ctx.A(i0) == 0:
        return False, None
    if ctx.A(i0) - 1 == ctx.Bt(j0):
        return False, None
    m0 = _first_break(ctx, i0, j0, 1)
    if m0 is not None and ctx.A(i0 + m0) - 1 < ctx.Bt(j0 + m0):
        return True, m0
    return False, None


def sp_admissible(ctx: ExtContext, j0, i0=0):
    if i0 % ctx.s != 0:
        return False
    return all(ctx.A(m) - 1 == ctx.Bt(j0 + m) for m in range(ctx.s))


def admissible_pairs(ctx: ExtContext):
    """{"cr": [(i, j, m0)], "st": [(i, j, m0)], "sp": [j]} sorted lexicographically."""
    out = {"cr": [], "st": [], "sp": []}
    for i in range(ctx.s):
        for j in range(ctx.s):
            ok, m0 = cr_admissible(ctx, i, j)
            if ok:
                out["cr"].append((i, j, m0))
            ok, m0 = st_admissible(ctx, i, j)
            if ok:
                out["st"].append((i, j, m0))
    out["sp"] = [j for j in range(ctx.s) if sp_admissible(ctx, j)]
    return out


@dataclass
class PairConstants:
    kind: str
    i0: int
    j0: int
    C: Fraction | None
    bounds_ok: bool
    checks: dict

    def to_json(self):
        return {"kind": self.kind, "i0": self.i0, "j0": self.j0,
                "C": None if self.C is None else _frac_str(self.C),
                "bounds_ok": self.bounds_ok, "checks": self.checks}


def _frac_str(x: Fraction):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def check_pair_constants(ctx: ExtContext, kind, i0, j0, strict=True) -> PairConstants:
    """Constants attached to an admissible pair, with their bounds checked exactly."""
    p, q = ctx.p, ctx.q
    # scaled values (q-1) r(i) are integers because the periods divide s,
    # so every comparison below is exact integer arithmetic
    n1, n2 = ctx.scaled(1, i0), ctx.scaled(2, j0)
    checks = {}
    C = None
    if kind == "cr":
        ok_adm = cr_admissible(ctx, i0, j0)[0]
        c = n2 - n1
        checks["integer"] = True
        checks["coprime"] = math.gcd(c, p) == 1
        checks["range"] = 1 <= c <= q - 1
        checks["r1_below_r2"] = n1 < n2
        C = Fraction(c)
    elif kind == "st":
        ok_adm = st_admissible(ctx, i0, j0)[0]
        c = n2 - n1 + (q - 1)
        checks["integer"] = True
        checks["coprime"] = math.gcd(c, p) == 1
        # c < (q-1)(1 + 1/(p-1))  <=>  c (p-1) < (q-1) p
        checks["range"] = 1 <= c and c * (p - 1) < (q - 1) * p
        # r1 + 1/(p-1) > r2  <=>  (n1 - n2)(p-1) + (q-1) > 0
        checks["weight_gap"] = (n1 - n2) * (p - 1) + (q - 1) > 0
        C = Fraction(c)
    elif kind == "sp":
        ok_adm = sp_admissible(ctx, j0, i0)
        checks["weight_equality"] = (n2 - n1) * (p - 1) == q - 1
    else:
        raise BadInput(f"unknown pair kind {kind!r}")
    if not ok_adm:
        raise AdmissibilityMismatch(f"({i0},{j0}) is not {kind}-admissible", kind=kind, i0=i0, j0=j0)
    ok = all(checks.values())
    if strict and not ok:
        raise AdmissibilityMismatch(f"constant bounds fail for {kind} pair ({i0},{j0})",
                                    checks=checks, C=None if C is None else str(C))
    return PairConstants(kind, i0, j0, C, ok, checks)


def character_of_simple(r: DigitRational):
    s = r.period
    m = (r.p ** s - 1) * r.value
    assert m.denominator == 1
    rec = {"field_degree": s, "exponent": int(m), "etale": r.is_zero()}
    if r.is_zero():
        rec["marker"] = "co-filtered"
    return rec


def ramification_bounds(p, places=5):
    """Upper ramification bound 2-1/p, different bound 3-1/p and p^(3-1/p)."""
    upper = 2 - Fraction(1, p)
    diff = 3 - Fraction(1, p)
    getcontext().prec = 30
    val = Decimal(p) ** (Decimal(diff.numerator) / Decimal(diff.denominator))
    disc = val.quantize(Decimal(1).scaleb(-places))
    return {"upper_v": upper, "different_bound": diff, "disc_bound": disc}
