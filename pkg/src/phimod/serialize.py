"""JSON readers and writers for fields, series, modules and FL data."""
from __future__ import annotations

from fractions import Fraction

from .errors import BadInput
from .field import GF, get_field, is_prime
from .objects import FLModule, PhiNModule
from .series import SeriesRing


def frac_str(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def field_from_json(d, default_m=None) -> GF:
    try:
        p = int(d["p"])
        m = int(d.get("m", default_m or 1))
        modulus = d.get("modulus")
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"malformed field spec: {d!r}") from exc
    if not is_prime(p) or p == 2:
        raise BadInput(f"p must be an odd prime, got {p}")
    try:
        return get_field(p, m, tuple(int(c) for c in modulus) if modulus else None)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc


def elem_from_json(F: GF, x):
    if isinstance(x, int):
        if not 0 <= x < F.q:
            raise BadInput(f"field element out of range: {x}")
        return x
    if isinstance(x, list) and len(x) <= F.m and all(isinstance(c, int) for c in x):
        return F.from_coords([c % F.p for c in x] + [0] * (F.m - len(x)))
    raise BadInput(f"malformed field element: {x!r}")


def series_from_json(ring: SeriesRing, data):
    if not isinstance(data, list):
        raise BadInput(f"series must be a list, got {data!r}")
    if len(data) > ring.prec and any(data[ring.prec:]):
        raise BadInput("series has nonzero terms beyond the working precision")
    return ring.from_coeffs([elem_from_json(ring.field, x) for x in data[:ring.prec]])


def matrix_from_json(ring, rows, shape=None):
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise BadInput("matrix must be a list of rows")
    M = [[series_from_json(ring, x) for x in r] for r in rows]
    if shape is not None and (len(M) != shape[0] or any(len(r) != shape[1] for r in M)):
        raise BadInput(f"matrix shape mismatch, expected {shape}")
    return M


def module_from_json(d, prec=None, fq_degree=None) -> PhiNModule:
    try:
        F = field_from_json(d["field"], fq_degree)
        s = int(d["rank"])
        ring = SeriesRing(F, int(prec or d.get("prec") or 3 * F.p))
        B = matrix_from_json(ring, d["filt_matrix"], (s, s)) if s else []
        N = matrix_from_json(ring, d["n_table"], (s, s)) if s else []
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"malformed module spec: {exc}") from exc
    return PhiNModule(ring, B, N)


def module_to_json(L: PhiNModule):
    return L.to_json()


def matrix_to_json(M):
    return [[a.to_json() for a in r] for r in M]


def fl_from_json(d, fq_degree=None) -> FLModule:
    try:
        F = field_from_json(d["field"], fq_degree)
        dim = int(d["dim"])
        jumps = [int(j) for j in d["jumps"]]
        phi = [[elem_from_json(F, x) for x in r] for r in d["phi_blocks"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"malformed FL spec: {exc}") from exc
    M = FLModule(F, jumps, phi)
    if len(jumps) != dim:
        raise BadInput("dim does not match the number of jumps")
    probs = M.validate()
    if probs:
        raise BadInput(f"invalid FL module: {probs}")
    return M
