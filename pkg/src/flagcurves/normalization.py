"""Normalization spaces W complementary to sg^(0) + [x, pg] and their invariance."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import rational as rl
from .algebra import GradedAlgebra, GradedSubspace, complement_vectors
from .rational import ZERO
from .structure import (UNPARAMETRIZED, Sl2Triple, SymmetryAlgebra, complete_sl2,
                        killing_gram)

GENERIC = "generic"
KILLING = "killing_highest_weight"
USER = "user_supplied"
CERTIFIED = "certified"


class DegenerateKillingError(ValueError):
    """The Killing form restricted to sg is degenerate; ``radical`` spans its kernel."""

    def __init__(self, radical):
        super().__init__(f"Killing form restricted to sg is degenerate (radical dimension {len(radical)})")
        self.radical = radical


class NotComplementary(ValueError):
    pass


@dataclass(frozen=True)
class NormalizationSpace:
    W: GradedSubspace
    invariant_flag: bool
    construction: str

    @property
    def dim(self) -> int:
        return self.W.dim

    def labels(self) -> list[str]:
        return self.W.labels()


def image_part(A: GradedAlgebra, x: Sequence, sg: SymmetryAlgebra, d: int) -> list[tuple]:
    """Reduced basis of sg_d + [x, g_{d+1}]."""
    vecs = list(sg.part(d)) + [A.bracket(x, rl.unit(A.dim, j)) for j in A.indices(d + 1)]
    vecs = [v for v in vecs if not rl.is_zero(v)]
    return rl.rref(vecs, A.dim)[0] if vecs else []


def nonneg_degrees(A: GradedAlgebra) -> list[int]:
    return [d for d in A.degree_indices if d >= 0]


def is_complementary(A: GradedAlgebra, x: Sequence, sg: SymmetryAlgebra, W: GradedSubspace) -> bool:
    """W_i + (sg_i + [x, g_{i+1}]) = g_i with zero intersection, for every i >= 0."""
    if any(d < 0 for d in W.degrees):
        return False
    for d in nonneg_degrees(A):
        U = image_part(A, x, sg, d)
        Wd = list(W.part(d))
        n_d = len(A.indices(d))
        if len(U) + len(Wd) != n_d or rl.rank(U + Wd, A.dim) != n_d:
            return False
    return True


def is_invariant(W: GradedSubspace, sg: SymmetryAlgebra) -> bool:
    """[s, w] in W for every basis s of sg^(0) and w of W."""
    A = W.algebra
    for s in sg.nonnegative().basis():
        for w in W.basis():
            if not W.contains(A.bracket(s, w)):
                return False
    return True


def generic_complement(A: GradedAlgebra, x, sg: SymmetryAlgebra) -> NormalizationSpace:
    """Per-degree echelon complement of sg_i + [x, g_{i+1}] inside g_i."""
    x = tuple(x)
    parts = {}
    for d in nonneg_degrees(A):
        units = [rl.unit(A.dim, i) for i in A.indices(d)]
        parts[d] = complement_vectors(units, image_part(A, x, sg, d), A.dim)
    W = GradedSubspace(A, parts)
    if not is_complementary(A, x, sg, W):
        raise NotComplementary("generic complement failed the complementarity check")
    return NormalizationSpace(W, is_invariant(W, sg), GENERIC)


def user_complement(A: GradedAlgebra, x, sg: SymmetryAlgebra, W: GradedSubspace) -> NormalizationSpace:
    if not is_complementary(A, tuple(x), sg, W):
        raise NotComplementary("supplied W is not complementary to sg^(0) + [x, pg]")
    return NormalizationSpace(W, is_invariant(W, sg), USER)


def reductive_invariant_complement(A: GradedAlgebra, triple: Sl2Triple, sg: SymmetryAlgebra) -> NormalizationSpace:
    """W = {u in sg^perp ∩ pg : [u, y] = 0}, the highest weight vectors orthogonal to sg."""
    basis = sg.subspace.basis()
    gram = killing_gram(A, basis)
    rad = rl.nullspace(gram, len(basis))
    if rad:
        raise DegenerateKillingError([rl.combo(r, basis, A.dim) for r in rad])
    y = triple.y
    parts = {}
    for d in nonneg_degrees(A):
        idx = A.indices(d)
        rows = []
        for s in sg.part(-d):
            rows.append([A.killing(s, rl.unit(A.dim, j)) for j in idx])
        cols = [A.bracket(rl.unit(A.dim, j), y) for j in idx]
        rows.extend([c[r] for c in cols] for r in A.indices(d + 1))
        rows = [r for r in rows if any(r)]
        ker = rl.nullspace(rows, len(idx)) if rows else [rl.unit(len(idx), i) for i in range(len(idx))]
        parts[d] = [tuple(k[idx.index(i)] if i in idx else ZERO for i in range(A.dim)) for k in ker]
    W = GradedSubspace(A, parts)
    if not is_complementary(A, triple.x, sg, W):
        raise NotComplementary("highest-weight space is not complementary")
    if not is_invariant(W, sg):
        raise ArithmeticError("highest-weight space is not sg^(0)-invariant")
    return NormalizationSpace(W, True, KILLING)


# ---------------------------------------------------------------------------
# certificate search
# ---------------------------------------------------------------------------

@dataclass
class ComplementCertificate:
    """Outcome ``exists``, ``none`` or ``unknown``; ``witness`` explains the verdict."""
    outcome: str
    space: NormalizationSpace | None = None
    reason: str = ""
    witness: dict = field(default_factory=dict)


def torus(A: GradedAlgebra, sg: SymmetryAlgebra) -> list[tuple]:
    """t = (Cartan of A) ∩ sg_0."""
    if not A.cartan:
        return []
    return rl.intersect(list(A.cartan), list(sg.part(0)), A.dim)


def basis_weights(A: GradedAlgebra, t: Sequence[tuple]) -> list[tuple] | None:
    """Weight of every basis element under t, or None if t is not diagonal on the basis."""
    wts = []
    for i in range(A.dim):
        e = rl.unit(A.dim, i)
        w = []
        for h in t:
            img = A.bracket(h, e)
            if any(c for j, c in enumerate(img) if j != i):
                return None
            w.append(img[i])
        wts.append(tuple(w))
    return wts


class _Poly:
    """Polynomial of degree <= 2 as {monomial: coefficient}, monomial a sorted tuple of variable ids."""

    @staticmethod
    def add(p: dict, mono: tuple, c) -> None:
        if c:
            mono = tuple(sorted(mono))
            v = p.get(mono, ZERO) + c
            if v:
                p[mono] = v
            else:
                p.pop(mono, None)


@dataclass
class _Family:
    """All t-stable complements of U_d: graphs of maps C_{d,λ} -> U_{d,λ}."""
    degree: int
    C: list  # complement vectors (full length), grouped by weight
    U: list  # reduced basis of U_d
    weights: list  # weight of each C vector
    var: dict  # (c index, u index) -> variable id, only for weight-compatible pairs


def _split_CU(A: GradedAlgebra, C: list, U: list):
    """Coordinates of a degree-d vector along C (first) and U (second)."""
    basis = C + U

    def split(v):
        co = rl.coordinates(v, basis)
        if co is None:
            raise ArithmeticError("vector outside g_d")
        return co[:len(C)], co[len(C):]
    return split


def invariant_complement_certificate(A: GradedAlgebra, x, sg: SymmetryAlgebra) -> ComplementCertificate:
    """Decide whether an sg^(0)-invariant complement exists.

    Reductive sg goes through the Killing construction.  Otherwise every
    complement is stable under the torus t = Cartan ∩ sg_0, so per weight it is
    the graph of a linear map from a fixed complement into sg_i + [x, g_{i+1}].
    Invariance gives polynomial equations of degree at most two in the graph
    entries; linear ones are eliminated exactly and the outcome is decided when
    no genuinely quadratic condition remains.
    """
    x = tuple(x)
    if sg.reductive_flag and sg.mode == UNPARAMETRIZED:
        triple = complete_sl2(A, x)
        space = reductive_invariant_complement(A, triple, sg)
        return ComplementCertificate("exists", space, "sg is reductive; Killing construction",
                                     {"construction": KILLING})
    t = torus(A, sg)
    wts = basis_weights(A, t)
    if wts is None:
        return ComplementCertificate("unknown", reason="torus does not act diagonally on the basis")

    def weight_of(v):
        ws = {wts[i] for i, c in enumerate(v) if c}
        if len(ws) != 1:
            raise ArithmeticError("vector is not a weight vector")
        return ws.pop()

    families: dict[int, _Family] = {}
    nvar = 0
    for d in nonneg_degrees(A):
        U = image_part(A, x, sg, d)
        # U is t-stable, so a weight-adapted basis exists: intersect with weight spaces
        by_w: dict = {}
        for i in A.indices(d):
            by_w.setdefault(wts[i], []).append(i)
        Uw, Cw, cw_weights = [], [], []
        for w, idx in sorted(by_w.items()):
            units = [rl.unit(A.dim, i) for i in idx]
            Ul = rl.intersect(U, units, A.dim)
            Uw.extend((u, w) for u in Ul)
            for c in complement_vectors(units, Ul, A.dim):
                Cw.append(c)
                cw_weights.append(w)
        if rl.rank([u for u, _ in Uw], A.dim) != len(U):
            return ComplementCertificate("unknown", reason=f"sg_{d} + [x, g_{d + 1}] is not torus-stable")
        var = {}
        for a, wa in enumerate(cw_weights):
            for b, (u, wb) in enumerate(Uw):
                if wa == wb:
                    var[(a, b)] = nvar
                    nvar += 1
        families[d] = _Family(d, Cw, [u for u, _ in Uw], cw_weights, var)

    splitters = {d: _split_CU(A, f.C, f.U) for d, f in families.items()}

    def w_vector(d: int, a: int) -> dict:
        """Symbolic basis vector c_a + phi(c_a): {monomial: full vector}."""
        f = families[d]
        out = {(): f.C[a]}
        for (ca, b), v in f.var.items():
            if ca == a:
                out[(v,)] = f.U[b]
        return out

    # invariance equations
    equations: list[dict] = []
    s_basis = [s for s in sg.nonnegative().basis() if not rl.in_span(s, *rl.rref(t, A.dim))] if t else sg.nonnegative().basis()
    for d, f in families.items():
        for a in range(len(f.C)):
            wv = w_vector(d, a)
            for s in s_basis:
                ds = next(A.degrees[i] for i, c in enumerate(s) if c)
                e = d + ds
                if e not in families:
                    continue
                g = families[e]
                split = splitters[e]
                # [s, w] as {monomial: (C-coords, U-coords)}
                img = {}
                for mono, vec in wv.items():
                    br = A.bracket(s, vec)
                    if not rl.is_zero(br):
                        img[mono] = split(br)
                # condition: U-part - phi_e(C-part) = 0, one equation per U basis vector
                for b in range(len(g.U)):
                    p: dict = {}
                    for mono, (cc, uc) in img.items():
                        _Poly.add(p, mono, uc[b])
                        for a2, coef in enumerate(cc):
                            if coef and (a2, b) in g.var:
                                _Poly.add(p, mono + (g.var[(a2, b)],), -coef)
                    if p:
                        equations.append(p)

    # elimination: x = x0 + N f
    x0 = [ZERO] * nvar
    N = [[ZERO] * nvar for _ in range(nvar)]  # variable -> free parameters
    for i in range(nvar):
        N[i][i] = Fraction(1)
    nfree = nvar

    def substitute(p: dict) -> dict:
        # affine images of variables
        out: dict = {}
        aff = lambda v: [(None, x0[v])] + [(j, N[v][j]) for j in range(nfree) if N[v][j]]
        for mono, c in p.items():
            if len(mono) == 0:
                _Poly.add(out, (), c)
            elif len(mono) == 1:
                for j, cj in aff(mono[0]):
                    _Poly.add(out, () if j is None else (j,), c * cj)
            else:
                for j, cj in aff(mono[0]):
                    for k, ck in aff(mono[1]):
                        m = tuple(i for i in (j, k) if i is not None)
                        _Poly.add(out, m, c * cj * ck)
        return out

    witness = {"torus_dimension": len(t), "parameters": nvar,
               "families": {d: {"complement": len(f.C), "weights": [list(map(str, w)) for w in f.weights]}
                            for d, f in families.items()}}
    while True:
        polys = [q for q in (substitute(p) for p in equations) if q]
        linear = [q for q in polys if all(len(m) <= 1 for m in q)]
        if not linear:
            break
        rows = [[q.get((j,), ZERO) for j in range(nfree)] for q in linear]
        rhs = [-q.get((), ZERO) for q in linear]
        sol = rl.solve(rows, rhs, nfree)
        if sol is None:
            cert = rl.inconsistency_certificate(rows, rhs)
            witness.update({"obstruction": "linear invariance conditions are inconsistent",
                            "conditions": len(linear), "free_parameters": nfree,
                            "farkas": [rl.fmt(c) for c in cert] if cert else None,
                            "orbit_span": _orbit_spans(A, sg, families, s_basis)})
            return ComplementCertificate("none", reason="no torus-compatible complement is sg^(0)-invariant",
                                         witness=witness)
        ker = rl.nullspace(rows, nfree)
        # variables = x0 + N (sol + K g) with new free parameters g
        x0 = [x0[v] + rl.dot(N[v], sol) for v in range(nvar)]
        N = [[rl.dot(N[v], k) for k in ker] for v in range(nvar)]
        nfree = len(ker)
    if polys:
        # only quadratic conditions left; the point with all free parameters zero may satisfy them
        if any(q.get((), ZERO) for q in polys):
            witness["remaining_conditions"] = len(polys)
            return ComplementCertificate("unknown", reason="nonlinear invariance conditions remain",
                                         witness=witness)
    # build W from x0
    parts = {}
    for d, f in families.items():
        vecs = []
        for a in range(len(f.C)):
            v = f.C[a]
            for (ca, b), var in f.var.items():
                if ca == a and x0[var]:
                    v = rl.add(v, rl.scale(x0[var], f.U[b]))
            vecs.append(v)
        parts[d] = vecs
    W = GradedSubspace(A, parts)
    if not is_complementary(A, x, sg, W) or not is_invariant(W, sg):
        return ComplementCertificate("unknown", reason="candidate failed verification", witness=witness)
    witness["free_parameters"] = nfree
    return ComplementCertificate("exists", NormalizationSpace(W, True, CERTIFIED),
                                 "invariance conditions solved exactly", witness)


def _orbit_spans(A, sg, families, s_basis, samples: int = 8, seed: int = 0) -> dict:
    """Smallest dimension of W_d + [sg^(0), W_d] over sampled torus-compatible candidates."""
    rng = random.Random(seed)
    out = {}
    for d, f in families.items():
        if not f.var:
            continue
        best = None
        for _ in range(samples):
            vecs = []
            for a in range(len(f.C)):
                v = f.C[a]
                for (ca, b), var in f.var.items():
                    if ca == a:
                        v = rl.add(v, rl.scale(Fraction(rng.randint(-9, 9), rng.randint(1, 5)), f.U[b]))
                vecs.append(v)
            gen = list(vecs)
            for s in s_basis:
                if next(A.degrees[i] for i, c in enumerate(s) if c) == 0:
                    gen.extend(A.bracket(s, v) for v in vecs)
            r = rl.rank(gen, A.dim)
            best = r if best is None else min(best, r)
        out[d] = {"required": len(f.C), "min_orbit_span": best}
    return out
