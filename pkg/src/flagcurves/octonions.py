"""Split octonions in Zorn vector-matrix form, the 3-form Omega and G2 as derivations.

An octonion is a quadruple (a, u, v, b) with scalars a, b and u, v in Q^3;
the product is

    (a, u, v, b)(a', u', v', b') =
        (aa' + u.v', a u' + b' u - v x v', a' v + b v' + u x u', bb' + v.u').

Everything is exact.  Identities such as alternativity, total antisymmetry
of Omega and the wedge identity for B are checked by tests, not assumed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

from . import rational as rl
from .algebra import (G2_POSITIVE_ROOTS, GradedAlgebra, GradedSubspace, build_g2,
                      build_sl_flag, matrix_algebra)
from .rational import ONE, ZERO

OCT_LABELS = ("a", "u1", "u2", "u3", "v1", "v2", "v3", "b")
IMAG_LABELS = ("u1", "u2", "u3", "w", "v1", "v2", "v3")


def _cross(p, q):
    return (p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0])


def zorn_product(x: Sequence, y: Sequence) -> tuple:
    """Product of two octonions given as 8-vectors (a, u1..u3, v1..v3, b)."""
    a, u, v, b = x[0], x[1:4], x[4:7], x[7]
    a2, u2, v2, b2 = y[0], y[1:4], y[4:7], y[7]
    dot = lambda p, q: sum((s * t for s, t in zip(p, q)), ZERO)
    vv = _cross(v, v2)
    uu = _cross(u, u2)
    return ((a * a2 + dot(u, v2),)
            + tuple(a * u2[i] + b2 * u[i] - vv[i] for i in range(3))
            + tuple(a2 * v[i] + b * v2[i] + uu[i] for i in range(3))
            + (b * b2 + dot(v, u2),))


# ---------------------------------------------------------------------------
# exterior forms as {sorted index tuple: coefficient}
# ---------------------------------------------------------------------------

def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge(p: dict, q: dict) -> dict:
    out: dict = {}
    for I, a in p.items():
        for J, b in q.items():
            if set(I) & set(J):
                continue
            K = I + J
            key = tuple(sorted(K))
            out[key] = out.get(key, ZERO) + _perm_sign(K) * a * b
    return {k: v for k, v in out.items() if v}


def interior(v: Sequence, form: dict) -> dict:
    """Contraction i_v on the first slot."""
    out: dict = {}
    for I, c in form.items():
        for pos, i in enumerate(I):
            if v[i]:
                rest = I[:pos] + I[pos + 1:]
                out[rest] = out.get(rest, ZERO) + (-1) ** pos * v[i] * c
    return {k: val for k, val in out.items() if val}


@dataclass(frozen=True)
class OctonionAlgebra:
    """Split octonions with the imaginary subspace V and the forms B, Omega on it."""
    table: tuple  # table[i][j] = product of basis i and basis j as an 8-vector
    imaginary: tuple  # 7 basis vectors of V as 8-vectors

    def mul(self, x: Sequence, y: Sequence) -> tuple:
        out = [ZERO] * 8
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    if b:
                        for k, c in enumerate(self.table[i][j]):
                            if c:
                                out[k] += a * b * c
        return tuple(out)

    @staticmethod
    def real_part(z: Sequence) -> Fraction:
        return (z[0] + z[7]) / 2

    def to_oct(self, v: Sequence) -> tuple:
        """Embed coordinates on V into Oct."""
        return rl.combo(v, self.imaginary, 8)

    def to_imag(self, z: Sequence) -> tuple:
        """Coordinates on V of the imaginary part of z."""
        re = self.real_part(z)
        im = rl.sub(z, (re, 0, 0, 0, 0, 0, 0, re))
        c = rl.coordinates(im, self.imaginary)
        if c is None:
            raise ArithmeticError("imaginary part not in V")
        return c

    def product_imag(self, x: Sequence, y: Sequence) -> tuple:
        return self.mul(self.to_oct(x), self.to_oct(y))

    @cached_property
    def B(self) -> tuple:
        """B(x, y) = -Re(xy) on V."""
        e = [rl.unit(7, i) for i in range(7)]
        return tuple(tuple(-self.real_part(self.product_imag(a, b)) for b in e) for a in e)

    def bform(self, x: Sequence, y: Sequence) -> Fraction:
        return sum((xi * self.B[i][j] * yj for i, xi in enumerate(x) if xi
                    for j, yj in enumerate(y) if yj), ZERO)

    def omega(self, x: Sequence, y: Sequence, z: Sequence) -> Fraction:
        """Omega(x, y, z) = B(Im(xy), z)."""
        return self.bform(self.to_imag(self.product_imag(x, y)), z)

    @cached_property
    def omega_tensor(self) -> tuple:
        e = [rl.unit(7, i) for i in range(7)]
        return tuple(tuple(tuple(self.omega(e[i], e[j], e[k]) for k in range(7))
                           for j in range(7)) for i in range(7))

    @cached_property
    def omega_form(self) -> dict:
        """Omega as {(i, j, k): c} with i < j < k."""
        T = self.omega_tensor
        return {(i, j, k): T[i][j][k] for i, j, k in itertools.combinations(range(7), 3) if T[i][j][k]}

    def wedge_pairing(self, v1: Sequence, v2: Sequence) -> Fraction:
        """c with i_v1 Omega ^ i_v2 Omega ^ Omega = c e_0 ^ ... ^ e_6."""
        top = wedge(wedge(interior(v1, self.omega_form), interior(v2, self.omega_form)), self.omega_form)
        return top.get(tuple(range(7)), ZERO)

    def annihilator(self, c: Sequence) -> list[tuple]:
        """A(c) = {v in V : v c = 0}, as a reduced echelon basis."""
        cols = [self.product_imag(rl.unit(7, i), c) for i in range(7)]
        m = [[col[r] for col in cols] for r in range(8)]
        return rl.nullspace(m, 7)

    def kernel_of_contraction(self, c: Sequence) -> list[tuple]:
        """ker i_c Omega = {v : Omega(c, v, .) = 0}."""
        rows = [[self.omega(c, rl.unit(7, i), rl.unit(7, k)) for i in range(7)] for k in range(7)]
        return rl.nullspace(rows, 7)

    def is_null(self, vectors: Sequence[Sequence]) -> bool:
        return all(rl.is_zero(self.product_imag(a, b)) for a in vectors for b in vectors)


@lru_cache(maxsize=None)
def split_octonions() -> OctonionAlgebra:
    e = [rl.unit(8, i) for i in range(8)]
    table = tuple(tuple(zorn_product(e[i], e[j]) for j in range(8)) for i in range(8))
    imag = (e[1], e[2], e[3], rl.sub(e[0], e[7]), e[4], e[5], e[6])
    return OctonionAlgebra(table, imag)


def derivation_matrices(O: OctonionAlgebra) -> list[list[list[Fraction]]]:
    """Basis of {D in gl(V) : D(xy) = D(x) y + x D(y)}, D extended by D(1) = 0.

    A matrix D acts on coordinates: column c is D applied to the c-th basis vector.
    """
    n = 7
    nvar = n * n  # D[r][c] -> r * n + c
    e = [rl.unit(n, i) for i in range(n)]
    rows = []
    for i in range(n):
        for j in range(n):
            z = O.product_imag(e[i], e[j])
            im = O.to_imag(z)
            # D(Im z) - D(e_i) e_j - e_i D(e_j) = 0, as 8 scalar equations
            eq = [[ZERO] * nvar for _ in range(8)]
            for c, coef in enumerate(im):
                if coef:
                    for r in range(n):
                        img = O.imaginary[r]
                        for k in range(8):
                            if img[k]:
                                eq[k][r * n + c] += coef * img[k]
            for r in range(n):
                p = O.product_imag(e[r], e[j])  # D(e_i) = sum_r D[r][i] e_r
                for k in range(8):
                    if p[k]:
                        eq[k][r * n + i] -= p[k]
                q = O.product_imag(e[i], e[r])
                for k in range(8):
                    if q[k]:
                        eq[k][r * n + j] -= q[k]
            rows.extend(row for row in eq if any(row))
    ker = rl.nullspace(rows, nvar)
    return [[list(v[r * n:(r + 1) * n]) for r in range(n)] for v in ker]


def derivations(O: OctonionAlgebra) -> GradedSubspace:
    """The derivation algebra as a subspace of sl(V) (trivial grading)."""
    A = build_sl_flag([7])
    return GradedSubspace(A, {0: [A.from_matrix(D) for D in derivation_matrices(O)]})


@lru_cache(maxsize=None)
def derivation_algebra() -> GradedAlgebra:
    """Der(Oct) restricted to V as an abstract algebra with its 7-dim matrix representation.

    Cartan subalgebra: the derivations that are diagonal in the basis of V.
    """
    O = split_octonions()
    mats = derivation_matrices(O)
    n = 7
    flat = [[D[r][c] for r in range(n) for c in range(n)] for D in mats]
    diag_units = [rl.unit(n * n, r * n + r) for r in range(n)]
    cartan_flat = rl.intersect(flat, diag_units, n * n)
    # put the Cartan first, then complete with the echelon basis
    basis = list(cartan_flat)
    for v in flat:
        if rl.rank(basis + [v], n * n) > len(basis):
            basis.append(v)
    sparse = [{divmod(p, n): x for p, x in enumerate(v) if x} for v in basis]
    labels = [f"D{i + 1}" for i in range(len(basis))]
    return matrix_algebra("der(Oct)", labels, sparse, n, {}, range(len(cartan_flat)))


# ---------------------------------------------------------------------------
# isomorphism with the Chevalley-style G2
# ---------------------------------------------------------------------------

@dataclass
class G2Isomorphism:
    images: list  # image in Der of each Chevalley basis element
    simple_roots: tuple  # (long, short) as weights on the Der Cartan
    verified: bool


def _root_data(D: GradedAlgebra):
    """Roots of D relative to its diagonal Cartan, with one root vector each."""
    n = D.matrix_size
    t = D.cartan
    tm = [D.to_matrix(h) for h in t]
    wts = [tuple(m[r][r] for m in tm) for r in range(n)]
    all_flat = [[D.matrices[i].get((r, c), ZERO) for r in range(n) for c in range(n)]
                for i in range(D.dim)]
    roots = {}
    for r in range(n):
        for c in range(n):
            a = rl.sub(wts[r], wts[c])
            if rl.is_zero(a) or a in roots:
                continue
            entries = [(p, q) for p in range(n) for q in range(n) if rl.sub(wts[p], wts[q]) == a]
            units = [rl.unit(n * n, p * n + q) for p, q in entries]
            sp = rl.intersect(all_flat, units, n * n)
            if sp:
                if len(sp) != 1:
                    raise ArithmeticError("root space is not one-dimensional")
                m = [[sp[0][p * n + q] for q in range(n)] for p in range(n)]
                roots[a] = D.from_matrix(m)
    return roots


def g2_isomorphism() -> G2Isomorphism:
    """Explicit isomorphism from the Chevalley-style G2 onto Der(Oct), checked exactly.

    Simple roots of Der are found from its root system with the Killing-form
    inner product; Chevalley generators are matched and the map is extended
    along bracket words, then every structure constant is compared.
    """
    D = derivation_algebra()
    G = build_g2("B")
    roots = _root_data(D)
    if len(roots) != 12:
        raise ArithmeticError(f"expected 12 roots, found {len(roots)}")
    # inner product on t*: inverse of the Killing form restricted to t
    Kt = [[D.killing(a, b) for b in D.cartan] for a in D.cartan]
    Ki = rl.inverse(Kt)
    ip = lambda a, b: rl.dot(a, rl.matvec(Ki, b))
    # positivity by a generic functional
    pos = [a for a in roots if (a[0] * 1000 + a[1]) > 0]
    simple = [a for a in pos if not any(rl.sub(a, b) in pos for b in pos)]
    if len(simple) != 2:
        raise ArithmeticError("could not find two simple roots")
    long_, short = sorted(simple, key=lambda a: -ip(a, a))
    if ip(long_, long_) != 3 * ip(short, short):
        raise ArithmeticError("simple roots do not have G2 length ratio")

    def coroot_of(a):
        # h_a in t with b(h_a) = 2 (a, b)/(a, a) for all b
        # t basis coordinates s satisfy b(sum s_i t_i) = sum s_i b_i
        # so s = 2 Ki a / (a, a)
        return rl.combo(rl.scale(Fraction(2) / ip(a, a), rl.matvec(Ki, a)), D.cartan, D.dim)

    def pair(a):
        e = roots[a]
        f = roots[tuple(-x for x in a)]
        h = D.bracket(e, f)
        target = coroot_of(a)
        # h is a multiple of the coroot; rescale f so that [e, f] = coroot
        idx = next(i for i, x in enumerate(target) if x)
        return e, rl.scale(target[idx] / h[idx], f)

    e1, f1 = pair(long_)
    e2, f2 = pair(short)
    L = G.label_index
    gen_src = [G.basis_vector(L[s]) for s in ("X_{α1}", "X_{α2}", "X_{-α1}", "X_{-α2}")]
    gen_dst = [e1, e2, f1, f2]
    # bracket words spanning G, evaluated in both algebras
    words_src = list(gen_src)
    words_dst = list(gen_dst)
    frontier = list(range(4))
    while rl.rank(words_src, G.dim) < G.dim and frontier:
        new = []
        for w in frontier:
            for g in range(4):
                s = G.bracket(gen_src[g], words_src[w])
                if rl.rank(words_src + [s], G.dim) > len(rl.rref(words_src, G.dim)[1]):
                    words_src.append(s)
                    words_dst.append(D.bracket(gen_dst[g], words_dst[w]))
                    new.append(len(words_src) - 1)
        frontier = new
    basis_idx = []
    for i, _ in enumerate(words_src):
        if rl.rank([words_src[j] for j in basis_idx + [i]], G.dim) > len(basis_idx):
            basis_idx.append(i)
    Ws = [words_src[i] for i in basis_idx]
    Wd = [words_dst[i] for i in basis_idx]
    images = []
    for b in range(G.dim):
        c = rl.coordinates(G.basis_vector(b), Ws)
        images.append(rl.combo(c, Wd, D.dim))
    ok = rl.rank(images, D.dim) == D.dim
    for i in range(G.dim):
        for j in range(i + 1, G.dim):
            lhs = rl.combo(G.bracket(G.basis_vector(i), G.basis_vector(j)), images, D.dim)
            if lhs != D.bracket(images[i], images[j]):
                ok = False
                break
        if not ok:
            break
    return G2Isomorphism(images, (long_, short), ok)
