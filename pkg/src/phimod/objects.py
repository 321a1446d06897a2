"""
Filtered (phi, N)-modules over k[[u]] killed by p, at finite u-adic precision.

An object is stored on a basis l_1..l_s of L together with a basis m_1..m_s
of the filtration F(L), normalised so that phi(m_i) = l_i.  The matrix B
holds the m_j as columns in l-coordinates, and the N-table holds N(l_i)
modulo u^(2p).  With this normalisation

    phi(sum w_j m_j) = sum sigma(w_j) l_j,

so phi of x in F(L) is sigma applied to the coordinates B^-1 x.

All arithmetic is exact in k[u]/(u^n), n = ring.prec >= 2p.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import (FieldTooSmall, HypothesisFailed, InvalidObject, NotAMorphism,
                     NotCrystalline, NonConvergence)
from .field import GF
from .linalg import fq_inverse, fq_rank, linear_map_matrix, nullspace_mod
from .semilinear import SemilinearOp, fitting_split
from .series import (SeriesRing, column, from_columns, mat_add, mat_const, mat_frob, mat_mul,
                     mat_sub, mat_truncate, mat_vec, vec_truncate)
from .smith import Lattice, inverse, is_invertible, u_smith_form


def _vec_is_zero(v):
    return all(a.is_zero() for a in v)


def _vec_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _vec_sub(a, b):
    return [x - y for x, y in zip(a, b)]


def _vec_shift(v, k):
    return [a.shift(k) for a in v]


def _vec_deriv(v):
    return [a.deriv() for a in v]


def _vec_frob(v):
    return [a.frob() for a in v]


class PhiNModule:
    def __init__(self, ring: SeriesRing, B, n_table, name=None):
        self.ring = ring
        self.field: GF = ring.field
        self.p = ring.field.p
        self.rank = len(B)
        self.B = [list(r) for r in B]
        self.nprec = 2 * self.p
        self.n_table = mat_truncate([list(r) for r in n_table], self.nprec)
        self.name = name
        self._sm = None

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<PhiNModule{tag} rank={self.rank} over {self.field!r} prec={self.ring.prec}>"

    # -- filtration and phi
    @property
    def smith(self):
        if self._sm is None:
            self._sm = u_smith_form(self.B, self.ring) if self.rank else None
        return self._sm

    def filtration_exponents(self):
        return list(self.smith.exps) if self.rank else []

    def F_coords(self, x):
        """w with B w = x, or None when x is not in F(L)."""
        sm = self.smith
        if sm is None:
            return []
        n = self.ring.prec
        z = mat_vec(sm.U, x, self.ring)
        w = []
        for zi, e in zip(z, sm.exps):
            if e >= n:
                return None
            if zi.valuation() < e:
                return None
            w.append(zi.shift(-e))
        return mat_vec(sm.V, w, self.ring)

    def in_F(self, x):
        return self.F_coords(x) is not None

    def phi(self, x):
        w = self.F_coords(x)
        if w is None:
            raise InvalidObject("phi is only defined on F(L)", vector=[str(a) for a in x])
        return _vec_frob(w)

    def phi_hat(self, x):
        return self.phi(_vec_shift(x, self.p - 1))

    def N(self, x):
        """Leibniz extension of the N-table, modulo u^(2p)."""
        out = _vec_add(_vec_deriv(x), mat_vec(self.n_table, x, self.ring))
        return vec_truncate(out, self.nprec)

    def basis_vector(self, i):
        z, o = self.ring.zero(), self.ring.one()
        return [o if k == i else z for k in range(self.rank)]

    def m_vector(self, j):
        return column(self.B, j)

    def with_n_table(self, table):
        return PhiNModule(self.ring, self.B, table, self.name)

    def to_json(self):
        return {
            "field": self.field.spec(),
            "prec": self.ring.prec,
            "rank": self.rank,
            "filt_matrix": [[a.to_json() for a in r] for r in self.B],
            "n_table": [[a.to_json() for a in r] for r in self.n_table],
        }


def zero_object(ring):
    return PhiNModule(ring, [], [])


def from_phi_matrix(ring, B, A, n_table, name=None):
    """Object given by any basis l, an F(L)-basis B and phi(m_j) = l A_j.

    The basis is changed to l' = l A so that phi(m_j) = l'_j.
    """
    s = len(B)
    if s == 0:
        return zero_object(ring)
    Ainv = inverse(A, ring)
    B2 = mat_mul(Ainv, B, ring)
    dA = [[a.deriv() for a in r] for r in A]
    N2 = mat_mul(Ainv, mat_add(dA, mat_mul(n_table, A, ring)), ring)
    return PhiNModule(ring, B2, N2, name)


def rebase(L: PhiNModule, Q):
    """Same object presented on the F-basis m Q (so l becomes l sigma(Q)).

    Returns (new object, matrix of the isomorphism new -> L in l-coordinates).
    """
    ring = L.ring
    sQ = mat_frob(Q)
    sQinv = inverse(sQ, ring)
    B2 = mat_mul(sQinv, mat_mul(L.B, Q, ring), ring)
    N2 = mat_mul(sQinv, mat_mul(L.n_table, sQ, ring), ring)
    return PhiNModule(ring, B2, N2, L.name), sQ


def direct_sum(*mods):
    mods = [m for m in mods]
    ring = mods[0].ring
    s = sum(m.rank for m in mods)
    B = ring.zeros(s, s)
    Nt = ring.zeros(s, s)
    off = 0
    for m in mods:
        for i in range(m.rank):
            for j in range(m.rank):
                B[off + i][off + j] = m.B[i][j]
                Nt[off + i][off + j] = m.n_table[i][j]
        off += m.rank
    return PhiNModule(ring, B, Nt, "+".join(m.name or "?" for m in mods))


# ---------------------------------------------------------------------------
# validation


@dataclass
class Report:
    ok: bool = True
    failures: list = field(default_factory=list)

    def fail(self, axiom, **witness):
        self.ok = False
        self.failures.append({"axiom": axiom, **witness})

    def axioms(self):
        return [f["axiom"] for f in self.failures]

    def to_json(self):
        return {"ok": self.ok, "failures": self.failures}


def validate(L: PhiNModule) -> Report:
    rep = Report()
    ring, p, n = L.ring, L.p, L.ring.prec
    s = L.rank
    if any(len(r) != s for r in L.B) or len(L.n_table) != s or any(len(r) != s for r in L.n_table):
        rep.fail("shape")
        return rep
    if n < 2 * p:
        rep.fail("precision", prec=n, needed=2 * p)
    if s == 0:
        return rep
    exps = L.filtration_exponents()
    if any(e >= n for e in exps):
        rep.fail("det", exponents=exps)
        return rep
    if any(e > p - 1 for e in exps):
        rep.fail("filtration", exponents=exps)
    for j in range(s):
        m = L.m_vector(j)
        y = _vec_shift(L.N(m), 1)
        if not L.in_F(y):
            rep.fail("N-F", column=j)
            continue
        lhs = column(L.n_table, j)
        rhs = vec_truncate(L.phi(y), 2 * p)
        if lhs != rhs:
            rep.fail("N-compat", column=j)
    return rep


def check(L: PhiNModule):
    rep = validate(L)
    if not rep.ok:
        raise InvalidObject(f"invalid object: {rep.axioms()}", failures=rep.failures)
    return L


def lift_N(L: PhiNModule, n1_table=None) -> PhiNModule:
    """The unique N modulo u^(2p) extending a table known modulo u^p."""
    p = L.p
    if n1_table is None:
        n1_table = L.n_table
    n1 = mat_truncate(n1_table, p)
    tmp = PhiNModule(L.ring, L.B, n1, L.name)
    cols = []
    for j in range(L.rank):
        m = L.m_vector(j)
        Nm = vec_truncate(_vec_add(_vec_deriv(m), mat_vec(n1, m, L.ring)), p)
        y = _vec_shift(Nm, 1)
        if not tmp.in_F(y):
            raise HypothesisFailed("u N(m_j) is not in F(L) modulo u^p", column=j)
        img = vec_truncate(tmp.phi(y), 2 * p)
        if vec_truncate(img, p) != column(n1, j):
            raise HypothesisFailed("N(l_j) differs from phi(u N(m_j)) modulo u^p", column=j)
        cols.append(img)
    return PhiNModule(L.ring, L.B, from_columns(cols, L.rank), L.name)


def is_crystalline(L: PhiNModule, cross_check=False) -> bool:
    """N(phi(F(L))) in u^p L, read off from the N-table."""
    p = L.p
    b = all(a.valuation() >= p for r in L.n_table for a in r)
    if cross_check:
        a = all(L.in_F(L.N(L.m_vector(j))) for j in range(L.rank))
        if a != b:
            raise AssertionError("crystalline criteria disagree")
    return b


# ---------------------------------------------------------------------------
# morphisms


class ModuleMorphism:
    def __init__(self, source: PhiNModule, target: PhiNModule, matrix):
        self.source = source
        self.target = target
        self.matrix = [list(r) for r in matrix] if matrix else [[] for _ in range(target.rank)]

    def __call__(self, x):
        return mat_vec(self.matrix, x, self.source.ring)

    def compose(self, other: "ModuleMorphism") -> "ModuleMorphism":
        """self o other."""
        return ModuleMorphism(other.source, self.target,
                              _matmul0(self.matrix, other.matrix, self.target.rank,
                                       other.source.rank, self.source.ring))

    def is_zero(self):
        return all(a.is_zero() for r in self.matrix for a in r)


def _matmul0(A, B, rows, cols, ring):
    inner = len(B)
    if rows == 0 or cols == 0:
        return [[] for _ in range(rows)] if cols == 0 else []
    if inner == 0:
        return ring.zeros(rows, cols)
    return mat_mul(A, B, ring)


def morphism_defects(f: ModuleMorphism):
    """Names of violated morphism axioms (empty when f is a morphism)."""
    L1, L2 = f.source, f.target
    out = []
    p = L1.p
    for j in range(L1.rank):
        y = f(L1.m_vector(j))
        if not L2.in_F(y):
            out.append(("F", j))
            continue
        if L2.phi(y) != column(f.matrix, j):
            out.append(("phi", j))
    for j in range(L1.rank):
        e = L1.basis_vector(j)
        a = vec_truncate(L2.N(f(e)), 2 * p)
        b = vec_truncate(f(L1.N(e)), 2 * p)
        if a != b:
            out.append(("N", j))
    return out


def is_morphism(f: ModuleMorphism) -> bool:
    return not morphism_defects(f)


def morphism(source, target, matrix) -> ModuleMorphism:
    f = ModuleMorphism(source, target, matrix)
    bad = morphism_defects(f)
    if bad:
        raise NotAMorphism(f"not a morphism: {bad}", defects=bad)
    return f


def identity(L):
    return ModuleMorphism(L, L, L.ring.identity(L.rank))


def _unknown_layout(s_out, s_in, ring):
    return s_out * s_in * ring.prec * ring.field.m


def _matrix_from_bits(bits, s_out, s_in, ring):
    F = ring.field
    n, m = ring.prec, F.m
    M = []
    k = 0
    for i in range(s_out):
        row = []
        for j in range(s_in):
            co = []
            for t in range(n):
                co.append(F.from_coords(bits[k:k + m]))
                k += m
            row.append(ring.from_coeffs(co))
        M.append(row)
    return M


def _bits_of_vector(v, F):
    out = []
    for a in v:
        for c in a.c:
            out.extend(F.to_coords(c))
    return out


def hom_space(L1: PhiNModule, L2: PhiNModule):
    """F_p-basis of Hom(L1, L2), as a list of matrices."""
    ring = L1.ring
    F, p = ring.field, ring.field.p
    s1, s2 = L1.rank, L2.rank
    if s1 == 0 or s2 == 0:
        return []
    nun = _unknown_layout(s2, s1, ring)
    sm = L2.smith
    n = ring.prec
    B1 = L1.B

    def constraints(bits):
        f = _matrix_from_bits(bits, s2, s1, ring)
        out = []
        fB = mat_mul(f, B1, ring)
        # F-compatibility: U2 f B1 divisible row-wise by u^{e_i}
        z = mat_mul(sm.U, fB, ring)
        w = []
        for i, e in enumerate(sm.exps):
            for j in range(s1):
                for t in range(min(e, n)):
                    out.extend(F.to_coords(z[i][j].c[t]))
            w.append([a.shift(-e) for a in z[i]])
        # phi-compatibility: f = sigma(V2 w)
        sig = mat_frob(mat_mul(sm.V, w, ring))
        for i in range(s2):
            for j in range(s1):
                d = f[i][j] - sig[i][j]
                for c in d.c:
                    out.extend(F.to_coords(c))
        # N-compatibility modulo u^(2p)
        lhs = mat_add([[a.deriv() for a in r] for r in f], mat_mul(L2.n_table, f, ring))
        rhs = mat_mul(f, L1.n_table, ring)
        for i in range(s2):
            for j in range(s1):
                d = (lhs[i][j] - rhs[i][j])
                for c in d.c[:2 * p]:
                    out.extend(F.to_coords(c))
        return out

    M = linear_map_matrix(constraints, nun, p)
    basis = nullspace_mod(M, p, nun)
    return [_matrix_from_bits([int(x) for x in v], s2, s1, ring) for v in basis]


def combine(basis, coeffs, ring):
    """sum c_k basis_k over F_p."""
    F = ring.field
    rows = len(basis[0])
    cols = len(basis[0][0]) if rows else 0
    out = ring.zeros(rows, cols)
    for c, M in zip(coeffs, basis):
        c = int(c) % F.p
        if c:
            for i in range(rows):
                for j in range(cols):
                    if not M[i][j].is_zero():
                        out[i][j] = out[i][j] + M[i][j].scale(c)
    return out


def random_morphism(L1, L2, rng: random.Random, basis=None):
    if basis is None:
        basis = hom_space(L1, L2)
    if not basis:
        return ModuleMorphism(L1, L2, L1.ring.zeros(L2.rank, L1.rank))
    coeffs = [rng.randrange(L1.p) for _ in basis]
    return ModuleMorphism(L1, L2, combine(basis, coeffs, L1.ring))


def is_isomorphism(f: ModuleMorphism) -> bool:
    L1, L2 = f.source, f.target
    if L1.rank != L2.rank:
        return False
    if L1.rank == 0:
        return True
    if not is_invertible(f.matrix, L1.ring):
        return False
    if not is_morphism(f):
        return False
    fB = mat_mul(f.matrix, L1.B, L1.ring)
    return Lattice(fB, L1.ring).contains_all(L2.B)


def find_isomorphism(L1: PhiNModule, L2: PhiNModule, rng=None, exhaustive_limit=20000, tries=2000):
    """A morphism L1 -> L2 that is an isomorphism, or None."""
    if L1.rank != L2.rank:
        return None
    if L1.rank == 0:
        return ModuleMorphism(L1, L2, [])
    basis = hom_space(L1, L2)
    if not basis:
        return None
    F = L1.field
    ring = L1.ring
    consts = [mat_const(M, ring) for M in basis]

    def try_coeffs(coeffs):
        M0 = [[0] * L1.rank for _ in range(L1.rank)]
        for c, C in zip(coeffs, consts):
            if c:
                for i in range(L1.rank):
                    for j in range(L1.rank):
                        M0[i][j] = F.add(M0[i][j], F.mul(c, C[i][j]))
        if fq_rank(F, M0) < L1.rank:
            return None
        f = ModuleMorphism(L1, L2, combine(basis, coeffs, ring))
        return f if is_isomorphism(f) else None

    if L1.p ** len(basis) <= exhaustive_limit:
        for coeffs in itertools.product(range(L1.p), repeat=len(basis)):
            f = try_coeffs(coeffs)
            if f is not None:
                return f
        return None
    rng = rng or random.Random(0)
    for _ in range(tries):
        f = try_coeffs([rng.randrange(L1.p) for _ in basis])
        if f is not None:
            return f
    return None


def is_isomorphic(L1, L2):
    return find_isomorphism(L1, L2) is not None


# ---------------------------------------------------------------------------
# sub- and quotient objects along a saturated submodule


def _adapted(S, ring, s):
    """U invertible with U S = [X; 0], X invertible, for a split basis S (s x k)."""
    k = len(S[0]) if S and S[0] else 0
    if k == 0:
        return ring.identity(s), 0
    sm = u_smith_form(S, ring)
    if any(e != 0 for e in sm.exps):
        raise InvalidObject("submodule is not saturated", exponents=sm.exps)
    return sm.U, k


def _subobject(L: PhiNModule, Uk, k):
    """Object on K = {x : (Uk x)[k:] = 0} with F(K) = K cap F(L)."""
    ring = L.ring
    s = L.rank
    if k == 0:
        return zero_object(ring), ModuleMorphism(zero_object(ring), L, [[] for _ in range(s)])
    Ukinv = inverse(Uk, ring)
    E = [row[:k] for row in Ukinv]  # K-basis in L-coordinates
    Bp = mat_mul(Uk, L.B, ring)
    if k < s:
        bot = [r for r in Bp[k:]]
        smb = u_smith_form(bot, ring)
        if smb.rank != s - k:
            raise InvalidObject("filtration does not project onto the complement")
        BpV = mat_mul(Bp, smb.V, ring)
        A = [row[s - k:] for row in BpV[:k]]
    else:
        A = Bp
    # F(K) basis in K-coordinates is A; images under phi become the new basis
    Pcols = []
    for j in range(k):
        x = mat_vec(E, column(A, j), ring)
        y = mat_vec(Uk, L.phi(x), ring)
        if not _vec_is_zero(y[k:]):
            raise InvalidObject("phi does not preserve the submodule", column=j)
        Pcols.append(y[:k])
    P = from_columns(Pcols, k)
    Pinv = inverse(P, ring)
    BK = mat_mul(Pinv, A, ring)
    EP = mat_mul(E, P, ring)
    Ncols = []
    for j in range(k):
        y = mat_vec(Uk, L.N(column(EP, j)), ring)
        if not _vec_is_zero(vec_truncate(y[k:], 2 * L.p)):
            raise InvalidObject("N does not preserve the submodule", column=j)
        Ncols.append(mat_vec(Pinv, y[:k], ring))
    K = PhiNModule(ring, BK, from_columns(Ncols, k))
    return K, ModuleMorphism(K, L, EP)


def _quotient(L: PhiNModule, Uk, k):
    """Object on L / K for K = {x : (Uk x)[k:] = 0}, filtration the image of F(L)."""
    ring = L.ring
    s = L.rank
    r = s - k
    if r == 0:
        Z = zero_object(ring)
        return Z, ModuleMorphism(L, Z, [])
    pi = Uk[k:]
    X = mat_mul(pi, L.B, ring)
    smx = u_smith_form(X, ring)
    if smx.rank != r:
        raise InvalidObject("image of the filtration has the wrong rank")
    BV = mat_mul(L.B, smx.V, ring)
    XV = mat_mul(X, smx.V, ring)
    Ccols, Fcols = [], []
    for j in range(r):
        y = column(BV, j)
        Ccols.append(mat_vec(pi, L.phi(y), ring))
        Fcols.append(column(XV, j))
    P = from_columns(Ccols, r)
    Pinv = inverse(P, ring)
    BC = mat_mul(Pinv, from_columns(Fcols, r), ring)
    Ncols = []
    for j in range(r):
        y = L.phi(column(BV, j))
        Ncols.append(mat_vec(Pinv, mat_vec(pi, L.N(y), ring), ring))
    C = PhiNModule(ring, BC, from_columns(Ncols, r))
    return C, ModuleMorphism(L, C, mat_mul(Pinv, pi, ring))


def subobject(L, S):
    """Subobject on the saturated submodule spanned by the columns of S."""
    Uk, k = _adapted(S, L.ring, L.rank)
    return _subobject(L, Uk, k)


def quotient(L, S):
    Uk, k = _adapted(S, L.ring, L.rank)
    return _quotient(L, Uk, k)


def kernel(f: ModuleMorphism):
    L1 = f.source
    ring = L1.ring
    s1, s2 = L1.rank, f.target.rank
    if s1 == 0:
        return zero_object(ring), ModuleMorphism(zero_object(ring), L1, [])
    if s2 == 0 or f.is_zero():
        return L1, identity(L1)
    sm = u_smith_form(f.matrix, ring)
    n = ring.prec
    cols = [j for j in range(s1) if j >= len(sm.exps) or sm.exps[j] >= n]
    S = [[sm.V[i][j] for j in cols] for i in range(s1)]
    return subobject(L1, S)


def cokernel(f: ModuleMorphism):
    L2 = f.target
    ring = L2.ring
    s1, s2 = f.source.rank, L2.rank
    if s2 == 0:
        Z = zero_object(ring)
        return Z, ModuleMorphism(L2, Z, [])
    if s1 == 0 or f.is_zero():
        return L2, identity(L2)
    sm = u_smith_form(f.matrix, ring)
    n = ring.prec
    r = sum(1 for e in sm.exps if e < n)
    # rows of U beyond the rank give coordinates on the saturated complement
    return _quotient(L2, sm.U, r)


def _split_injective(f):
    ring = f.source.ring
    s1, s2 = f.source.rank, f.target.rank
    if s1 == 0:
        return True
    if s1 > s2:
        return False
    sm = u_smith_form(f.matrix, ring)
    return all(e == 0 for e in sm.exps)


def _split_surjective(f):
    ring = f.source.ring
    s1, s2 = f.source.rank, f.target.rank
    if s2 == 0:
        return True
    if s2 > s1:
        return False
    sm = u_smith_form(f.matrix, ring)
    return all(e == 0 for e in sm.exps)


def is_strict_mono(f: ModuleMorphism) -> bool:
    """Injective with saturated image and i(L1) cap F(L) = i(F(L1))."""
    L1, L = f.source, f.target
    if L1.rank == 0:
        return True
    if not _split_injective(f):
        return False
    K, emb = subobject(L, f.matrix)
    iF = mat_mul(f.matrix, L1.B, L1.ring)
    FK = mat_mul(emb.matrix, K.B, L1.ring)
    return Lattice(iF, L1.ring).contains_all(FK)


def is_strict_epi(f: ModuleMorphism) -> bool:
    """Surjective with j(F(L)) = F(L2)."""
    L, L2 = f.source, f.target
    if L2.rank == 0:
        return True
    if not _split_surjective(f):
        return False
    jF = mat_mul(f.matrix, L.B, L.ring)
    return Lattice(jF, L.ring).contains_all(L2.B)


def factor_through_mono(i: ModuleMorphism, g: ModuleMorphism):
    """The unique h with i o h = g, or None."""
    ring = g.source.ring
    lat = Lattice(i.matrix, ring, nrows=i.target.rank)
    cols = []
    for j in range(g.source.rank):
        c = lat.coords(column(g.matrix, j))
        if c is None:
            return None
        cols.append(c)
    h = ModuleMorphism(g.source, i.source, from_columns(cols, i.source.rank) if cols else
                       [[] for _ in range(i.source.rank)])
    return h


def factor_through_epi(j: ModuleMorphism, g: ModuleMorphism):
    """The unique h with h o j = g, or None (j split surjective)."""
    ring = g.source.ring
    s, r = j.source.rank, j.target.rank
    if r == 0:
        h = ModuleMorphism(j.target, g.target, [[] for _ in range(g.target.rank)])
        return h if g.is_zero() else None
    sm = u_smith_form(j.matrix, ring)
    # right inverse of j: V [I; 0] U
    Rinv = mat_mul([row[:r] for row in sm.V], sm.U, ring)
    H = mat_mul(g.matrix, Rinv, ring) if g.target.rank else []
    h = ModuleMorphism(j.target, g.target, H)
    if h.compose(j).matrix != g.matrix and g.target.rank:
        return None
    return h


# ---------------------------------------------------------------------------
# crystalline objects: special bases and the Fontaine-Laffaille functor


def special_basis(L: PhiNModule):
    """(P, c): columns of P are l'_i in l-coordinates with the l'_i a
    sigma(W)-basis of phi(F(L)) and u^{c_i} l'_i a basis of F(L)."""
    if not is_crystalline(L):
        raise NotCrystalline("special bases exist only for crystalline objects")
    ring, p, s = L.ring, L.p, L.rank
    if s == 0:
        return [], []
    lat = Lattice(L.B, ring)
    # already diagonal up to the column order
    c = [min(a.valuation() for a in row) for row in L.B]
    D = ring.diag([ring.u(ci) for ci in c])
    if all(ci < p for ci in c) and lat.contains_all(D) and Lattice(D, ring).contains_all(L.B):
        return ring.identity(s), c
    sm = L.smith
    Uinv = inverse(sm.U, ring)
    cols = []
    for i in range(s):
        m = column(Uinv, i)
        cols.append([a.split_by_residue()[0].frob() for a in m])
    P = from_columns(cols, s)
    c = list(sm.exps)
    target = mat_mul(P, ring.diag([ring.u(ci) for ci in c]), ring)
    if not (lat.contains_all(target) and Lattice(target, ring).contains_all(L.B)):
        raise NonConvergence("leading parts do not give a special basis")
    return P, c


class FLModule:
    """Filtered module with one jump per basis vector.

    phi[:, i] is phi_{jumps[i]}(e_i); the images span M exactly when phi is
    invertible.
    """

    def __init__(self, field: GF, jumps, phi):
        self.field = field
        self.jumps = [int(j) for j in jumps]
        self.phi = [list(r) for r in phi]
        self.dim = len(self.jumps)

    def validate(self):
        p = self.field.p
        problems = []
        if any(not 0 <= j < p for j in self.jumps):
            problems.append("jump range")
        if any(a > b for a, b in zip(self.jumps, self.jumps[1:])):
            problems.append("jump order")
        if len(self.phi) != self.dim or any(len(r) != self.dim for r in self.phi):
            problems.append("shape")
        elif self.dim and fq_rank(self.field, self.phi) < self.dim:
            problems.append("span")
        return problems

    def __eq__(self, other):
        return (isinstance(other, FLModule) and self.field == other.field
                and self.jumps == other.jumps and self.phi == other.phi)

    def __repr__(self):
        return f"FLModule(jumps={self.jumps}, phi={self.phi})"

    def to_json(self):
        F = self.field
        return {"field": F.spec(), "dim": self.dim, "jumps": self.jumps,
                "phi_blocks": [[F.to_coords(a) for a in r] for r in self.phi]}


def fl_to_module(M: FLModule, ring: SeriesRing) -> PhiNModule:
    p = ring.p
    s = M.dim
    if s == 0:
        return zero_object(ring)
    A = [[ring.const(a) for a in r] for r in M.phi]
    Bdiag = ring.diag([ring.u(p - 1 - j) for j in M.jumps])
    L = from_phi_matrix(ring, Bdiag, A, ring.zeros(s, s), name="FL")
    return lift_N(L, ring.zeros(s, s))


@dataclass
class FLNormalization:
    module: FLModule
    witness: ModuleMorphism  # fl_to_module(module) -> L
    residual: list
    perturbation: list


def fl_normalize(L: PhiNModule) -> FLNormalization:
    if not is_crystalline(L):
        raise NotCrystalline("the Fontaine-Laffaille normal form needs a crystalline object")
    ring, p, s = L.ring, L.p, L.rank
    F = ring.field
    n = ring.prec
    if s == 0:
        M = FLModule(F, [], [])
        return FLNormalization(M, ModuleMorphism(zero_object(ring), L, []), [], [])
    P, c = special_basis(L)
    Pinv = inverse(P, ring)

    def phi_in_prime(vec_prime, ci):
        x = mat_vec(P, _vec_shift(vec_prime, ci), ring)
        return mat_vec(Pinv, L.phi(x), ring)

    unit = [[ring.one() if i == j else ring.zero() for i in range(s)] for j in range(s)]
    Y = [phi_in_prime(unit[i], c[i]) for i in range(s)]  # columns
    A = [[Y[j][i].c[0] for j in range(s)] for i in range(s)]
    a = [[y - ring.const(y.c[0]) for y in Y[j]] for j in range(s)]
    Binv = fq_inverse(F, A)
    Bm = [[ring.const(x) for x in r] for r in Binv]

    def row_times(vecs, M):
        # (v_1..v_s) M : entry i = sum_k v_k M[k][i]
        out = []
        for i in range(s):
            acc = [ring.zero()] * s
            for k in range(s):
                if not M[k][i].is_zero():
                    acc = _vec_add(acc, [x * M[k][i] for x in vecs[k]])
            out.append(acc)
        return out

    atil = row_times(a, Bm)
    # unknown b_i: coordinates in u^p k[[u^p]]
    slots = list(range(p, n, p))
    m = F.m
    nun = s * s * len(slots) * m

    def unpack(bits):
        vecs = []
        k = 0
        for i in range(s):
            v = []
            for r in range(s):
                d = {}
                for t in slots:
                    d[t] = F.from_coords(bits[k:k + m])
                    k += m
                v.append(ring.from_dict(d))
            vecs.append(v)
        return vecs

    def lhs(b):
        Phi = [_vec_shift(phi_in_prime(b[i], 0), p * c[i]) for i in range(s)]
        PB = row_times(Phi, Bm)
        return [_vec_sub(b[i], PB[i]) for i in range(s)]

    def flat(vecs):
        out = []
        for v in vecs:
            out.extend(_bits_of_vector(v, F))
        return out

    Mx = linear_map_matrix(lambda bits: flat(lhs(unpack(bits))), nun, p)
    from .linalg import solve_mod
    sol = solve_mod(Mx, flat(atil), p)
    if sol is None:
        raise FieldTooSmall("basis perturbation equation has no solution over this field", q=F.q)
    b = unpack([int(x) for x in sol])
    residual = [_vec_sub(x, y) for x, y in zip(lhs(b), atil)]
    if any(not _vec_is_zero(r) for r in residual):
        raise NonConvergence("perturbation residual is nonzero")
    # new basis l'' = l' + b, in l-coordinates
    cols = [mat_vec(P, _vec_add(unit[i], b[i]), ring) for i in range(s)]
    jumps = [p - 1 - ci for ci in c]
    order = sorted(range(s), key=lambda i: (jumps[i], i))
    cols = [cols[i] for i in order]
    A2 = [[A[order[i]][order[j]] for j in range(s)] for i in range(s)]
    jumps = [jumps[i] for i in order]
    Pnew = from_columns(cols, s)
    M = FLModule(F, jumps, A2)
    W = mat_mul(Pnew, [[ring.const(x) for x in r] for r in A2], ring)
    src = fl_to_module(M, ring)
    wit = ModuleMorphism(src, L, W)
    return FLNormalization(M, wit, residual, b)


# ---------------------------------------------------------------------------
# etale / connected and unipotent / multiplicative


def phi_hat_mod_u(L: PhiNModule) -> SemilinearOp:
    ring, p = L.ring, L.p
    cols = [L.phi_hat(L.basis_vector(j)) for j in range(L.rank)]
    M = [[cols[j][i].c[0] for j in range(L.rank)] for i in range(L.rank)]
    # phi_hat(sum x_j l_j) = sum sigma(x_j) phi_hat(l_j)
    return SemilinearOp(L.field, M, 1)


def V_mod_u(L: PhiNModule) -> SemilinearOp:
    """V(x) = B sigma^-1(x) modulo u."""
    M = mat_const(L.B, L.ring)
    return SemilinearOp(L.field, M, -1)


def _op_invertible(op):
    return op.dim == 0 or fq_rank(op.field, op.power(op.dim).matrix) == op.dim


def is_etale(L):
    return _op_invertible(phi_hat_mod_u(L))


def is_connected(L):
    return L.rank == 0 or phi_hat_mod_u(L).is_nilpotent()


def is_multiplicative(L):
    return _op_invertible(V_mod_u(L))


def is_unipotent(L):
    return L.rank == 0 or V_mod_u(L).is_nilpotent()


@dataclass
class Splitting:
    sub: PhiNModule
    embedding: ModuleMorphism
    quotient: PhiNModule
    projection: ModuleMorphism


def etale_split(L: PhiNModule) -> Splitting:
    ring, s = L.ring, L.rank
    F = L.field
    op = phi_hat_mod_u(L)
    V_inv, V_nil = fitting_split(op)
    k = len(V_inv)
    if k == 0:
        Z, e = _subobject(L, ring.identity(s), 0)
        return Splitting(Z, e, L, identity(L))
    if k == s:
        C, pr = _quotient(L, ring.identity(s), s)
        return Splitting(L, identity(L), C, pr)
    T = [[ (V_inv + V_nil)[j][i] for j in range(s)] for i in range(s)]
    Tm = [[ring.const(x) for x in r] for r in T]
    Tinv = [[ring.const(x) for x in r] for r in fq_inverse(F, T)]
    X = ring.zeros(s - k, k)
    for step in range(ring.prec + 1):
        basis = mat_mul(Tm, [[ring.one() if i == j else ring.zero() for j in range(k)]
                             for i in range(k)] + X, ring)
        imgs = [mat_vec(Tinv, L.phi_hat(column(basis, j)), ring) for j in range(k)]
        top = from_columns([v[:k] for v in imgs], k)
        bot = from_columns([v[k:] for v in imgs], s - k)
        Xn = mat_mul(bot, inverse(top, ring), ring)
        if Xn == X:
            break
        X = Xn
    else:
        raise NonConvergence("etale lift did not stabilise")
    Kb = mat_mul(Tm, [[ring.one() if i == j else ring.zero() for j in range(k)]
                      for i in range(k)] + X, ring)
    Uk, kk = _adapted(Kb, ring, s)
    sub, emb = _subobject(L, Uk, kk)
    quo, proj = _quotient(L, Uk, kk)
    return Splitting(sub, emb, quo, proj)


def simple_one(ring):
    """The rank one object with F = L and phi(l) = l."""
    return PhiNModule(ring, ring.identity(1), ring.zeros(1, 1), "L(1)")


def unipotent_split(L: PhiNModule) -> Splitting:
    ring, s = L.ring, L.rank
    op = V_mod_u(L)
    V_inv, V_nil = fitting_split(op)
    k = len(V_inv)
    if k == 0:
        Z, pr = _quotient(L, ring.identity(s), s)
        return Splitting(L, identity(L), Z, pr)
    one = simple_one(ring)
    homs = hom_space(L, one)
    if len(homs) < k:
        raise FieldTooSmall("multiplicative quotient is not split over this field",
                            expected=k, found=len(homs))
    rows = [M[0] for M in homs]
    target = direct_sum(*([one] * k))
    f = ModuleMorphism(L, target, rows)
    # rows may be dependent; pick a basis of the row space modulo u
    sm = u_smith_form(f.matrix, ring)
    if sum(1 for e in sm.exps if e == 0) != k or len(homs) != k:
        raise FieldTooSmall("could not realise the multiplicative quotient", expected=k,
                            found=len(homs))
    if k == s:
        return Splitting(*_subobject(L, ring.identity(s), 0), target, f)
    sub, emb = kernel(f)
    return Splitting(sub, emb, target, f)


def V_apply(L: PhiNModule, x):
    """V(x) = x^(0): write x = sum_i u^i phi(x^(i)) and keep i = 0."""
    w = [a.split_by_residue()[0] for a in x]
    return mat_vec(L.B, w, L.ring)


@dataclass
class Section:
    L0: list            # phi-fixed basis of the multiplicative quotient
    S: list             # images S(l0) in F(L), l-coordinates
    g: list             # S(l0) - phi(S(l0)) in coordinates of the unipotent part
    splitting: Splitting
    n0: int


def splitting_section(L: PhiNModule) -> Section:
    ring = L.ring
    sp = unipotent_split(L)
    Lu, i, Lm, j = sp.sub, sp.embedding, sp.quotient, sp.projection
    k = Lm.rank
    if k == 0:
        return Section([], [], [], sp, 0)
    opu = V_mod_u(Lu)
    order = 0
    if Lu.rank:
        Pw = opu
        order = 1
        while any(x for r in Pw.matrix for x in r):
            Pw = opu.power(order + 1)
            order += 1
            if order > Lu.rank + 1:
                raise NonConvergence("V is not nilpotent on the unipotent part")
    n0 = order + 1
    jB = mat_mul(j.matrix, L.B, ring)
    latj = Lattice(jB, ring)
    lati = Lattice(i.matrix, ring, nrows=L.rank) if Lu.rank else None
    S_cols, g_cols, L0 = [], [], []
    for t in range(k):
        e = Lm.basis_vector(t)
        L0.append(e)
        w = latj.coords(e)
        x = mat_vec(L.B, w, ring)
        g0 = _vec_sub(x, L.phi(x))
        if Lu.rank:
            c = lati.coords(g0)
            if c is None:
                raise InvalidObject("defect does not lie in the unipotent part")
            acc = [ring.zero()] * Lu.rank
            y = c
            for _ in range(n0 + 1):
                y = V_apply(Lu, y)
                acc = _vec_add(acc, y)
            Sx = _vec_add(x, i(acc))
        else:
            Sx = x
        g = _vec_sub(Sx, L.phi(Sx))
        gc = lati.coords(g) if Lu.rank else []
        if gc is None:
            raise InvalidObject("section defect left the unipotent part")
        S_cols.append(Sx)
        g_cols.append(gc)
    return Section(L0, S_cols, g_cols, sp, n0)
