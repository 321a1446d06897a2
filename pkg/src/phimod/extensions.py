"""
Factor systems for extensions of L2 by L1 (sums of simples on a common
period s), their normalisation by coboundaries, and the decomposition of an
extension into standard crystalline, semistable and special pieces.

Layout of an extension object: basis l^(1)_0..l^(1)_{s-1} of L1 followed by
l_0..l_{s-1}; its F-basis is

    u^{ã_i} l^(1)_i               (phi -> l^(1)_{i+1})
    u^{b̃_j} l_j + v_j             (phi -> l_{j+1})

with v_j = sum_{i,t} gamma_{ijt} u^t l^(1)_i.  Changing the section by w in
F(L1) replaces v_j with v_j + w_j - u^{b̃_j} phi(w_{j-1}).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (AdmissibilityMismatch, BadInput, FieldTooSmall, InvalidObject,
                     IterationCap, NotCrystallineSystem, ScopeError)
from .objects import PhiNModule, lift_N
from .semilinear import SemilinearOp, solve_id_minus_A
from .simples import ExtContext, cr_admissible, sp_admissible, st_admissible


class FactorSystem:
    def __init__(self, ctx: ExtContext, terms=None):
        self.ctx = ctx
        self.terms = {}
        for key, g in (terms or {}).items():
            self.add(*key, g)

    def copy(self):
        fs = FactorSystem(self.ctx)
        fs.terms = dict(self.terms)
        return fs

    def add(self, i, j, t, gamma):
        ctx = self.ctx
        if t < 0:
            raise BadInput("negative u-exponent in factor system", t=t)
        if t >= ctx.prec or gamma == 0:
            return
        key = (i % ctx.s, j % ctx.s, t)
        g = ctx.field.add(self.terms.get(key, 0), gamma)
        if g:
            self.terms[key] = g
        else:
            self.terms.pop(key, None)

    def get(self, i, j, t):
        return self.terms.get((i % self.ctx.s, j % self.ctx.s, t), 0)

    def items(self):
        return sorted(self.terms.items())

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, FactorSystem) and self.terms == other.terms

    def __add__(self, other):
        out = self.copy()
        for (i, j, t), g in other.terms.items():
            out.add(i, j, t, g)
        return out

    def __neg__(self):
        F = self.ctx.field
        return FactorSystem(self.ctx, {k: F.neg(g) for k, g in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"FactorSystem({self.items()})"

    # normalisation predicates
    def c1_violations(self):
        return [(i, j, t) for (i, j, t) in sorted(self.terms) if t == self.ctx.Bt(j)]

    def satisfies_C1(self):
        return not self.c1_violations()

    def satisfies_C2(self):
        return all(t <= self.ctx.A(i) for (i, j, t) in self.terms)

    def satisfies_C3(self):
        return all(t < self.ctx.A(i) for (i, j, t) in self.terms)

    def is_crystalline(self):
        """All v_j in F(L1)."""
        return all(t >= self.ctx.A(i) for (i, j, t) in self.terms)

    def to_json(self):
        F = self.ctx.field
        return {"context": self.ctx.to_json(),
                "terms": [{"i": i, "j": j, "t": t, "gamma": F.to_coords(g)}
                          for (i, j, t), g in self.items()]}

    @classmethod
    def from_json(cls, ctx, data):
        F = ctx.field
        fs = cls(ctx)
        for rec in data:
            g = rec["gamma"]
            g = F.from_coords(g) if isinstance(g, list) else int(g)
            fs.add(int(rec["i"]), int(rec["j"]), int(rec["t"]), g)
        return fs


def apply_coboundary(fs: FactorSystem, w) -> FactorSystem:
    """v'_j = v_j + w_j - u^{b̃_j} phi(w_{j-1}); w maps j -> {(i, t): c} with t >= ã_i."""
    ctx = fs.ctx
    F = ctx.field
    p = ctx.p
    out = fs.copy()
    for j, comps in w.items():
        for (i, t), c in comps.items():
            if c == 0:
                continue
            if t < ctx.A(i):
                raise InvalidObject("coboundary element is not in F(L1)", i=i, j=j, t=t)
            out.add(i, j, t, c)
            # phi(c u^t l_i) = sigma(c) u^{p(t - ã_i)} l_{i+1}
            out.add(i + 1, j + 1, ctx.Bt(j + 1) + p * (t - ctx.A(i)), F.neg(F.frob(c, 1)))
    return out


def _w_json(ctx, w):
    F = ctx.field
    return {str(j % ctx.s): [{"i": i % ctx.s, "t": t, "c": F.to_coords(c)}
                              for (i, t), c in sorted(comps.items())]
            for j, comps in sorted(w.items())}


def _w_add(w, j, i, t, c, F, s):
    d = w.setdefault(j % s, {})
    key = (i % s, t)
    d[key] = F.add(d.get(key, 0), c)


def replay(fs: FactorSystem, transcript) -> FactorSystem:
    """Apply the coboundaries recorded in a transcript."""
    out = fs
    for move in transcript:
        out = apply_coboundary(out, move["w"])
    return out


def normalize_C1(fs: FactorSystem):
    """Equivalent system with no term at t = b̃_j.  Returns (system, transcript)."""
    ctx = fs.ctx
    F, s = ctx.field, ctx.s
    transcript = []
    cap = s * (len(fs.terms) + 1) + 1
    cur = fs
    while True:
        bad = cur.c1_violations()
        if not bad:
            return cur, transcript
        if len(transcript) >= cap:
            raise IterationCap("C1 normalisation did not terminate", moves=len(transcript))
        i0, j0, t0 = bad[0]
        gamma = cur.terms[(i0, j0, t0)]
        n = next((k for k in range(1, s + 1) if ctx.A(i0 - k) != ctx.Bt(j0 - k)), None)
        w = {}
        if n is not None:
            # move the term backwards n steps, landing at t = ã_{i0-n}
            for k in range(1, n + 1):
                _w_add(w, j0 - k, i0 - k, ctx.A(i0 - k), F.frob(gamma, -k), F, s)
            rule = "transfer"
        else:
            # full period: beta - sigma^s(beta) = -gamma
            op = SemilinearOp(F, [[1]], s)
            beta = solve_id_minus_A(op, [F.neg(gamma)])[0]
            for k in range(s):
                _w_add(w, j0 + k, i0 + k, ctx.Bt(j0 + k), F.frob(beta, k), F, s)
            rule = "period"
        transcript.append({"rule": rule, "at": (i0, j0, t0), "w": w})
        cur = apply_coboundary(cur, w)


def _exceptional(ctx, t):
    return t == ctx.p and all(b == 0 for b in ctx.bt) and all(a == ctx.p - 1 for a in ctx.at)


def reduce_C2(fs: FactorSystem):
    """Remove every term with t > ã_i by forward propagation.  Returns (system, transcript)."""
    ctx = fs.ctx
    F, s = ctx.field, ctx.s
    transcript = []
    cur = fs
    cap = (len(fs.terms) + 1) * s * ctx.prec * 4
    while True:
        high = sorted((t, i, j) for (i, j, t) in cur.terms if t > ctx.A(i))
        if not high:
            return cur, transcript
        if len(transcript) >= cap:
            raise IterationCap("C2 reduction did not terminate", moves=len(transcript))
        t0, i0, j0 = high[0]
        gamma = cur.terms[(i0, j0, t0)]
        w = {}
        if _exceptional(ctx, t0):
            op = SemilinearOp(F, [[1]], s)
            kappa = solve_id_minus_A(op, [F.neg(gamma)])[0]
            for k in range(s):
                _w_add(w, j0 + k, i0 + k, ctx.p, F.frob(kappa, k), F, s)
            rule = "cycle"
        else:
            _w_add(w, j0, i0, t0, F.neg(gamma), F, s)
            rule = "forward"
        transcript.append({"rule": rule, "at": (i0, j0, t0), "w": w})
        cur = apply_coboundary(cur, w)


def normalize(fs: FactorSystem):
    """C1 followed by C2; returns (system, transcript)."""
    a, t1 = normalize_C1(fs)
    b, t2 = reduce_C2(a)
    return b, t1 + t2


@dataclass
class ExtDecomposition:
    cr_terms: list = field(default_factory=list)   # (i, j, gamma)
    st_terms: list = field(default_factory=list)   # (i, j, gamma)
    sp_terms: list = field(default_factory=list)   # (j, gamma)

    def normalized(self):
        return ExtDecomposition(sorted(t for t in self.cr_terms if t[2]),
                                sorted(t for t in self.st_terms if t[2]),
                                sorted(t for t in self.sp_terms if t[1]))

    def __eq__(self, other):
        if not isinstance(other, ExtDecomposition):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return (a.cr_terms, a.st_terms, a.sp_terms) == (b.cr_terms, b.st_terms, b.sp_terms)

    def is_zero(self):
        n = self.normalized()
        return not (n.cr_terms or n.st_terms or n.sp_terms)

    def key(self):
        n = self.normalized()
        return (tuple(n.cr_terms), tuple(n.st_terms), tuple(n.sp_terms))

    def to_json(self, F):
        n = self.normalized()
        return {"cr_terms": [{"i": i, "j": j, "gamma": F.to_coords(g)} for i, j, g in n.cr_terms],
                "st_terms": [{"i": i, "j": j, "gamma": F.to_coords(g)} for i, j, g in n.st_terms],
                "sp_terms": [{"j": j, "gamma": F.to_coords(g)} for j, g in n.sp_terms]}

    @classmethod
    def from_json(cls, data, F):
        def g(x):
            return F.from_coords(x) if isinstance(x, list) else int(x)
        return cls([(int(d["i"]), int(d["j"]), g(d["gamma"])) for d in data.get("cr_terms", [])],
                   [(int(d["i"]), int(d["j"]), g(d["gamma"])) for d in data.get("st_terms", [])],
                   [(int(d["j"]), g(d["gamma"])) for d in data.get("sp_terms", [])])


def decompose_cr(fs: FactorSystem):
    """Unique coefficients over cr-admissible pairs of a crystalline system.

    Returns (ExtDecomposition with cr_terms only, transcript).
    """
    ctx = fs.ctx
    F, s, p = ctx.field, ctx.s, ctx.p
    if not fs.is_crystalline():
        bad = [k for k in fs.terms if k[2] < ctx.A(k[0])]
        raise NotCrystallineSystem("some v_j is not in F(L1)", terms=bad)
    cur, transcript = normalize(fs)
    for _ in range(s * s + 1):
        drop = []
        for (i, j, t), g in sorted(cur.terms.items()):
            assert t == ctx.A(i)
            if not cr_admissible(ctx, i, j)[0]:
                drop.append((i, j, g))
        if not drop:
            break
        i, j, g = drop[0]
        m0 = next(m for m in range(1, s + 1) if ctx.A(i + m) != ctx.Bt(j + m))
        w = {}
        for m in range(m0):
            _w_add(w, j + m, i + m, ctx.A(i + m), F.neg(F.frob(g, m)), F, s)
        transcript.append({"rule": "drop", "at": (i, j, ctx.A(i)), "w": w})
        cur = apply_coboundary(cur, w)
        cur, t2 = reduce_C2(cur)
        transcript += t2
    else:
        raise IterationCap("non-admissible terms keep reappearing")
    terms = [(i, j, g) for (i, j, t), g in sorted(cur.terms.items())]
    return ExtDecomposition(cr_terms=terms), transcript


def validate_st(fs: FactorSystem):
    """Conditions for a (C1)+(C3) system to define an extension; report-style."""
    ctx = fs.ctx
    p = ctx.p
    failures = []
    for (i, j, t), g in fs.items():
        a, b = ctx.A(i), ctx.Bt(j)
        if t == b:
            failures.append({"condition": "C1", "term": [i, j, t]})
        if t >= a:
            failures.append({"condition": "C3", "term": [i, j, t]})
            continue
        if t < a - 1:
            failures.append({"condition": "b", "term": [i, j, t]})
            continue
        # t = ã_i - 1
        if b == p - 1 or a == 0:
            failures.append({"condition": "a", "term": [i, j, t]})
            continue
        m0 = next((m for m in range(1, ctx.s + 1) if ctx.A(i + m) - 1 != ctx.Bt(j + m)), None)
        if m0 is None:
            failures.append({"condition": "d", "term": [i, j, t]})
        elif ctx.A(i + m0) - 1 > ctx.Bt(j + m0):
            failures.append({"condition": "c", "term": [i, j, t]})
    return {"ok": not failures, "failures": failures}


def st_kappa(ctx: ExtContext, i0, j0, gamma):
    """N(l_j) mod u^p of E_st(i0, j0, gamma) as {(i, j): coefficient}."""
    F, p = ctx.field, ctx.p
    ok, m0 = st_admissible(ctx, i0, j0)
    if not ok:
        raise AdmissibilityMismatch(f"({i0},{j0}) is not st-admissible", i0=i0, j0=j0)
    c = F.scalar(ctx.Bt(j0) - ctx.A(i0) + 1)
    out = {}
    for m in range(1, m0 + 1):
        key = ((i0 + m) % ctx.s, (j0 + m) % ctx.s)
        out[key] = F.add(out.get(key, 0), F.mul(c, F.frob(gamma, m)))
    return out


def sp_kappa(ctx: ExtContext, j0, gamma):
    F = ctx.field
    if not sp_admissible(ctx, j0):
        raise AdmissibilityMismatch(f"(0,{j0}) is not sp-admissible", j0=j0)
    if F.frob(gamma, ctx.s) != gamma:
        raise AdmissibilityMismatch("special coefficient must lie in F_{p^s}", s=ctx.s)
    return {(m % ctx.s, (j0 + m) % ctx.s): F.frob(gamma, m) for m in range(ctx.s)}


def _kappa_add(acc, other, F):
    for k, c in other.items():
        v = F.add(acc.get(k, 0), c)
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)
    return acc


def decompose_full(fs: FactorSystem, kappa):
    """st and sp coefficients of a (C1)+(C3) system with N(l_j) = sum kappa_ij l^(1)_i mod u^p.

    kappa is {(i, j): c}.  Returns ExtDecomposition (cr_terms empty).
    """
    ctx = fs.ctx
    F, s = ctx.field, ctx.s
    rep = validate_st(fs)
    if not rep["ok"]:
        raise InvalidObject("factor system fails the semistable conditions", **rep)
    st_terms = []
    resid = {k: v for k, v in kappa.items() if v}
    for (i, j, t), g in fs.items():
        st_terms.append((i, j, g))
        _kappa_add(resid, {k: F.neg(c) for k, c in st_kappa(ctx, i, j, g).items()}, F)
    sp_terms = []
    for j0 in range(s):
        if not sp_admissible(ctx, j0):
            continue
        g = resid.get((0, j0), 0)
        if g == 0:
            continue
        if F.frob(g, s) != g:
            raise InvalidObject("special coefficient is not in F_{p^s}", j0=j0)
        sp_terms.append((j0, g))
        _kappa_add(resid, {k: F.neg(c) for k, c in sp_kappa(ctx, j0, g).items()}, F)
    if resid:
        raise InvalidObject("N-table is not explained by standard extensions",
                            residual=[[i, j, F.to_coords(c)] for (i, j), c in sorted(resid.items())])
    return ExtDecomposition(st_terms=st_terms, sp_terms=sp_terms)


# ---------------------------------------------------------------------------
# objects


def build_extension(ctx: ExtContext, fs: FactorSystem, kappa=None, ring=None) -> PhiNModule:
    """The extension object with factor system fs and N(l_j) = sum kappa_ij l^(1)_i mod u^p."""
    ring = ring or ctx.ring()
    if ring.field != ctx.field:
        raise BadInput("ring and context use different fields")
    s = ctx.s
    B = ring.zeros(2 * s, 2 * s)
    for i in range(s):
        B[i][(i + 1) % s] = ring.u(ctx.A(i))
    for j in range(s):
        col = s + (j + 1) % s
        B[s + j][col] = ring.u(ctx.Bt(j))
    for (i, j, t), g in fs.terms.items():
        col = s + (j + 1) % s
        B[i][col] = B[i][col] + ring.monomial(g, t)
    N1 = ring.zeros(2 * s, 2 * s)
    for (i, j), c in (kappa or {}).items():
        N1[i % s][s + j % s] = ring.const(c)
    L = PhiNModule(ring, B, N1, name="E")
    return lift_N(L, N1)


def build_E_cr(ctx, i0, j0, gamma, ring=None):
    if not cr_admissible(ctx, i0, j0)[0]:
        raise AdmissibilityMismatch(f"({i0},{j0}) is not cr-admissible", i0=i0, j0=j0)
    fs = FactorSystem(ctx, {(i0, j0, ctx.A(i0)): gamma})
    return build_extension(ctx, fs, None, ring)


def build_E_st(ctx, i0, j0, gamma, ring=None):
    kappa = st_kappa(ctx, i0, j0, gamma)
    fs = FactorSystem(ctx, {(i0, j0, ctx.A(i0) - 1): gamma})
    return build_extension(ctx, fs, kappa, ring)


def build_E_sp(ctx, j0, gamma, ring=None):
    kappa = sp_kappa(ctx, j0, gamma)
    return build_extension(ctx, FactorSystem(ctx), kappa, ring)


def system_of(ctx: ExtContext, dec: ExtDecomposition):
    """Factor system and N-residues of the Baer sum of the standard pieces."""
    F = ctx.field
    fs = FactorSystem(ctx)
    kappa = {}
    for i, j, g in dec.cr_terms:
        if not cr_admissible(ctx, i, j)[0]:
            raise AdmissibilityMismatch(f"({i},{j}) is not cr-admissible", i0=i, j0=j)
        fs.add(i, j, ctx.A(i), g)
    for i, j, g in dec.st_terms:
        fs.add(i, j, ctx.A(i) - 1, g)
        _kappa_add(kappa, st_kappa(ctx, i, j, g), F)
    for j, g in dec.sp_terms:
        _kappa_add(kappa, sp_kappa(ctx, j, g), F)
    return fs, kappa


def build_from_decomposition(ctx, dec: ExtDecomposition, ring=None):
    fs, kappa = system_of(ctx, dec)
    return build_extension(ctx, fs, kappa, ring)


def read_extension(E: PhiNModule, ctx: ExtContext):
    """(factor system, kappa) of an extension object in the standard layout."""
    s, p = ctx.s, ctx.p
    ring = E.ring
    F = ring.field
    if E.rank != 2 * s or F != ctx.field:
        raise BadInput("object does not match the extension context", rank=E.rank)
    for i in range(2 * s):
        for j in range(s):
            want = ring.u(ctx.A(i)) if i < s and j == (i + 1) % s else ring.zero()
            if E.B[i][j] != want:
                raise BadInput("sub block is not in standard form", row=i, col=j)
    for r in range(s, 2 * s):
        for c in range(2 * s):
            want = ring.zero()
            if c >= s and r - s == (c - s - 1) % s:
                want = ring.u(ctx.Bt(r - s))
            if E.B[r][c] != want:
                raise BadInput("quotient block is not in standard form", row=r, col=c)
    fs = FactorSystem(ctx)
    for j in range(s):
        col = s + (j + 1) % s
        for i in range(s):
            for t, g in enumerate(E.B[i][col].c):
                if g:
                    fs.add(i, j, t, g)
    kappa = {}
    for i in range(s):
        for j in range(s):
            x = E.n_table[i][s + j].truncate(p)
            if any(x.c[1:p]):
                raise InvalidObject("N-residue is not constant modulo u^p", i=i, j=j)
            if x.c[0]:
                kappa[(i, j)] = x.c[0]
    return fs, kappa


def decompose_extension(E: PhiNModule, ctx: ExtContext):
    """Full decomposition of an extension object into E_cr, E_st and E_sp pieces."""
    fs, kappa = read_extension(E, ctx)
    return decompose_system(fs, kappa)


def decompose_system(fs: FactorSystem, kappa=None):
    ctx = fs.ctx
    cur, transcript = normalize(fs)
    cr_part = FactorSystem(ctx, {k: g for k, g in cur.terms.items() if k[2] >= ctx.A(k[0])})
    st_part = FactorSystem(ctx, {k: g for k, g in cur.terms.items() if k[2] < ctx.A(k[0])})
    dcr, t2 = decompose_cr(cr_part)
    dst = decompose_full(st_part, kappa or {})
    return ExtDecomposition(dcr.cr_terms, dst.st_terms, dst.sp_terms), transcript + t2


def q_rational_ext_count(ctx: ExtContext):
    """Classes of extensions of the weight-one simple by itself defined over Q (p = 3).

    Rationality forces the semistable coefficient into F_3; each such
    coefficient gives a distinct class.
    """
    if not (ctx.p == 3 and ctx.r1.digits == (1,) and ctx.r2.digits == (1,)):
        raise ScopeError("only available for p = 3 and r1 = r2 = 1/2",
                         p=ctx.p, r1=str(ctx.r1), r2=str(ctx.r2))
    F = ctx.field
    classes = {}
    for g in F.elements():
        if F.pow(g, 3) != g:
            continue
        dec = ExtDecomposition(st_terms=[(0, 0, g)]) if g else ExtDecomposition()
        E = build_from_decomposition(ctx, dec)
        got, _ = decompose_extension(E, ctx)
        classes.setdefault(got.key(), g)
    return len(classes), classes
