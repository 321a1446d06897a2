"""Rationals in [0,1] with purely periodic base-p expansions."""
from __future__ import annotations

from fractions import Fraction

from .errors import BadInput, BadRange


def _least_period(word):
    s = len(word)
    for d in range(1, s + 1):
        if s % d == 0 and all(word[i] == word[i % d] for i in range(s)):
            return d
    return s


class DigitRational:
    """r = sum_{i>=1} a_i p^-i with a_{i+s} = a_i.

    The word is kept in minimal-period form; digit(i) reads a_i for any
    integer i, so index 0 is a_s.
    """

    __slots__ = ("p", "digits", "_least_rotation")

    def __init__(self, p: int, digits):
        digits = tuple(int(a) for a in digits)
        if not digits:
            raise BadInput("digit word must be nonempty")
        if any(a < 0 or a >= p for a in digits):
            raise BadRange(f"digits must lie in [0, {p})", digits=list(digits))
        d = _least_period(digits)
        self.p = p
        self.digits = digits[:d]
        rots = [self.digits[k:] + self.digits[:k] for k in range(d)]
        self._least_rotation = min(rots)

    @classmethod
    def from_fraction(cls, m: int, s: int, p: int) -> "DigitRational":
        top = p ** s - 1
        if not 0 <= m <= top:
            raise BadRange(f"m must lie in [0, {top}]", m=m, s=s, p=p)
        if m % p == 0 and m not in (0, top):
            raise BadRange(f"{m}/{top} has positive {p}-adic valuation", m=m, s=s, p=p)
        # repeated multiply-by-p on the fraction m/(p^s - 1)
        r = Fraction(m, top)
        digits = []
        for _ in range(s):
            r *= p
            a = int(r) if r < p else p - 1
            digits.append(a)
            r -= a
        return cls(p, digits)

    @classmethod
    def from_value(cls, value, p: int) -> "DigitRational":
        """Parse a rational (Fraction or "num/den") lying in [0,1]_p."""
        r = Fraction(value)
        if r < 0 or r > 1:
            raise BadRange(f"{r} is outside [0, 1]")
        den = r.denominator
        if den % p == 0:
            raise BadRange(f"{r} has no purely periodic base-{p} expansion")
        s = 1
        while (p ** s - 1) % den:
            s += 1
        return cls.from_fraction(int(r * (p ** s - 1)), s, p)

    # -- basic data
    @property
    def period(self):
        return len(self.digits)

    def minimal_period(self):
        return len(self.digits)

    @property
    def numerator(self):
        """m with r = m / (p^s - 1), s the minimal period."""
        s = self.period
        return sum(a * self.p ** (s - 1 - i) for i, a in enumerate(self.digits))

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.p ** self.period - 1)

    def digit(self, i: int) -> int:
        return self.digits[(i - 1) % self.period]

    def co_digit(self, i: int) -> int:
        """The complementary digit p - 1 - a_i."""
        return self.p - 1 - self.digit(i)

    def word(self, s: int):
        """(a_1, ..., a_s) for a multiple s of the period."""
        return tuple(self.digit(i) for i in range(1, s + 1))

    # -- operations
    def complement(self) -> "DigitRational":
        return DigitRational(self.p, [self.p - 1 - a for a in self.digits])

    def shift(self, n: int) -> "DigitRational":
        """r(n) = sum a_{i+n} p^-i."""
        k = n % self.period
        return DigitRational(self.p, self.digits[k:] + self.digits[:k])

    def iso_class_equal(self, other: "DigitRational"):
        """(True, n) with self = other(n) for the least such n >= 0, else (False, None)."""
        if self.p != other.p or self.period != other.period:
            return False, None
        if self._least_rotation != other._least_rotation:
            return False, None
        for n in range(other.period):
            if other.shift(n).digits == self.digits:
                return True, n
        return False, None  # pragma: no cover

    def class_key(self):
        return (self.p, self._least_rotation)

    def is_zero(self):
        return all(a == 0 for a in self.digits)

    def is_one(self):
        return all(a == self.p - 1 for a in self.digits)

    def __eq__(self, other):
        return isinstance(other, DigitRational) and self.p == other.p and self.digits == other.digits

    def __hash__(self):
        return hash((self.p, self.digits))

    def __repr__(self):
        return f"DigitRational(p={self.p}, digits={list(self.digits)})"

    def __str__(self):
        v = self.value
        return f"{v.numerator}/{v.denominator}"

    def to_json(self):
        return {"p": self.p, "digits": list(self.digits)}

    @classmethod
    def from_json(cls, d):
        try:
            return cls(int(d["p"]), d["digits"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInput(f"malformed digit rational: {d!r}") from exc


def from_fraction(m, s, p):
    return DigitRational.from_fraction(m, s, p)


def complement(r):
    return r.complement()


def shift(r, n):
    return r.shift(n)


def minimal_period(r):
    return r.minimal_period()


def iso_class_equal(r1, r2):
    return r1.iso_class_equal(r2)


def enumerate_rationals(p, max_period):
    """Every element of [0,1]_p with minimal period at most max_period."""
    seen = set()
    out = []
    for s in range(1, max_period + 1):
        top = p ** s - 1
        for m in range(top + 1):
            if m % p == 0 and m not in (0, top):
                continue
            r = DigitRational.from_fraction(m, s, p)
            if r.period == s and r not in seen:
                seen.add(r)
                out.append(r)
    return out
