"""sl2-triples, symmetry algebras of flat curves, filtrations and H^1_+."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import rational as rl
from .algebra import (AlgebraElement, GradedAlgebra, GradedSubspace, NotGraded,
                      complement_vectors)
from .rational import ZERO

UNPARAMETRIZED = "unparametrized"
PARAMETRIZED = "parametrized"


class TripleError(ValueError):
    pass


def as_vector(A: GradedAlgebra, x) -> tuple:
    if isinstance(x, AlgebraElement):
        if x.algebra is not A:
            raise ValueError("element belongs to a different algebra")
        if x.mode != "exact":
            raise ValueError("exact coefficients required")
        return tuple(x.coefficients)
    if isinstance(x, dict):
        return A.element(x).coefficients
    return rl.vec(x)


def check_degree_minus_one(A: GradedAlgebra, x: Sequence) -> None:
    if len(x) != A.dim:
        raise ValueError(f"x needs {A.dim} coefficients")
    if rl.is_zero(x):
        raise ValueError("x must be nonzero")
    if not A.is_homogeneous(x, -1):
        raise ValueError("x must be homogeneous of degree -1")


def ad_block(A: GradedAlgebra, x: Sequence, d: int) -> list[list]:
    """Matrix of u -> [x, u] from g_d to g_{d + deg x}, in basis coordinates.

    Rows are indexed by ``A.indices(d - 1)`` (for deg x = -1), columns by ``A.indices(d)``.
    """
    src = A.indices(d)
    dx = next(A.degrees[i] for i, c in enumerate(x) if c)
    dst = A.indices(d + dx)
    cols = [A.bracket(x, rl.unit(A.dim, j)) for j in src]
    return [[col[r] for col in cols] for r in dst]


def embed(A: GradedAlgebra, d: int, coords: Sequence) -> tuple:
    v = [ZERO] * A.dim
    for i, c in zip(A.indices(d), coords):
        v[i] = c
    return tuple(v)


def restrict(A: GradedAlgebra, d: int, v: Sequence) -> tuple:
    return tuple(v[i] for i in A.indices(d))


@dataclass(frozen=True)
class Sl2Triple:
    """(x, h, y) with [h,x] = -2x, [h,y] = 2y, [y,x] = h."""
    algebra: GradedAlgebra
    x: tuple
    h: tuple
    y: tuple

    def check(self) -> bool:
        A = self.algebra
        return (A.bracket(self.h, self.x) == rl.scale(-2, self.x)
                and A.bracket(self.h, self.y) == rl.scale(2, self.y)
                and A.bracket(self.y, self.x) == self.h)


def complete_sl2(A: GradedAlgebra, x) -> Sl2Triple:
    """Complete a degree -1 element x to an sl2-triple with h in g_0, y in g_1.

    First h = [z, x] with z in g_1 is chosen so that [h, x] = -2x; then y in g_1
    solves [y, x] = h and [h, y] = 2y.  Both solves return the reduced echelon
    particular solution (free variables zero).
    """
    x = as_vector(A, x)
    check_degree_minus_one(A, x)
    g1 = A.indices(1)
    if not g1:
        raise TripleError("g_1 is zero; x cannot be completed")
    # z -> [[z, x], x] is linear in z
    cols = []
    for j in g1:
        hz = A.bracket(rl.unit(A.dim, j), x)
        cols.append(A.bracket(hz, x))
    target = rl.scale(-2, x)
    m = [[c[r] for c in cols] for r in range(A.dim)]
    z = rl.solve(m, target, len(g1))
    if z is None:
        raise TripleError("no h in [x, g_1] with [h, x] = -2x")
    h = A.bracket(embed(A, 1, z), x)
    # y: [y, x] = h and [h, y] - 2y = 0
    rows, rhs = [], []
    cols_yx = [A.bracket(rl.unit(A.dim, j), x) for j in g1]
    cols_hy = [rl.sub(A.bracket(h, rl.unit(A.dim, j)), rl.scale(2, rl.unit(A.dim, j))) for j in g1]
    for r in range(A.dim):
        rows.append([c[r] for c in cols_yx])
        rhs.append(h[r])
        rows.append([c[r] for c in cols_hy])
        rhs.append(ZERO)
    yc = rl.solve(rows, rhs, len(g1))
    if yc is None:
        raise TripleError("no y in g_1 completing the triple")
    triple = Sl2Triple(A, x, h, embed(A, 1, yc))
    if not triple.check():
        raise TripleError("triple relations failed")
    return triple


@dataclass(frozen=True)
class SymmetryAlgebra:
    """Graded symmetry algebra of the flat curve of type x (or of a family xg)."""
    algebra: GradedAlgebra
    generators: tuple  # basis of sg_{-1}
    subspace: GradedSubspace
    mode: str
    reductive_flag: bool

    @property
    def x(self) -> tuple:
        return self.generators[0]

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def graded_dims(self) -> dict[int, int]:
        return self.subspace.graded_dims()

    def part(self, d: int) -> tuple:
        return self.subspace.part(d)

    def nonnegative(self) -> GradedSubspace:
        """sg^(0), the part in degrees >= 0."""
        return GradedSubspace(self.algebra, {d: self.subspace.part(d)
                                             for d in self.subspace.degrees if d >= 0})

    def labels(self) -> list[str]:
        return self.subspace.labels()


def _preimage(A: GradedAlgebra, gens: Sequence[tuple], d: int, target: Sequence[tuple]) -> list[tuple]:
    """{u in g_d : [g, u] in span(target) for every g in gens}."""
    src = A.indices(d)
    if not src:
        return []
    dst = A.indices(d - 1)
    # linear functionals on g_{d-1} vanishing on the target
    tgt = [restrict(A, d - 1, t) for t in target]
    ann = rl.nullspace(tgt, len(dst)) if tgt else [rl.unit(len(dst), i) for i in range(len(dst))]
    rows = []
    for g in gens:
        M = ad_block(A, g, d)
        rows.extend([rl.dot(l, [M[r][c] for r in range(len(dst))]) for c in range(len(src))] for l in ann)
    ker = rl.nullspace(rows, len(src)) if rows else [rl.unit(len(src), i) for i in range(len(src))]
    return [embed(A, d, k) for k in ker]


def killing_gram(A: GradedAlgebra, basis: Sequence[tuple]) -> list[list]:
    return [[A.killing(a, b) for b in basis] for a in basis]


def symmetry_algebra(A: GradedAlgebra, x, mode: str = UNPARAMETRIZED) -> SymmetryAlgebra:
    """Graded symmetry algebra via sg_i = (ad x)^{-1}(sg_{i-1}).

    ``x`` may be a single degree -1 element or a list of them (the family case,
    where sg_i = {u : [u, xg] in sg_{i-1}}).  In ``parametrized`` mode sg_0 is
    the centralizer of x in g_0.
    """
    if mode not in (UNPARAMETRIZED, PARAMETRIZED):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(x, (list, tuple)) and x and isinstance(x[0], (list, tuple, AlgebraElement)):
        gens = [as_vector(A, g) for g in x]
    else:
        gens = [as_vector(A, x)]
    for g in gens:
        check_degree_minus_one(A, g)
    gens_red, _ = rl.rref(gens, A.dim)
    parts = {-1: list(gens_red)}
    prev = list(gens_red)
    lo, hi = A.degree_range()
    for d in range(0, hi + 1):
        if d == 0 and mode == PARAMETRIZED:
            cur = _preimage(A, gens_red, 0, [])
        else:
            cur = _preimage(A, gens_red, d, prev)
        if not cur:
            break
        parts[d] = cur
        prev = cur
    sub = GradedSubspace(A, parts)
    basis = sub.basis()
    gram = killing_gram(A, basis)
    reductive = rl.rank(gram, len(basis)) == len(basis)
    return SymmetryAlgebra(A, tuple(gens_red), sub, mode, reductive)


def filtration(A: GradedAlgebra, k: int) -> GradedSubspace:
    """pg^(k): the sum of g_i over i >= k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return GradedSubspace(A, {d: [rl.unit(A.dim, i) for i in idx]
                              for d, idx in A.degree_indices.items() if d >= k})


def h_filtration(sg: SymmetryAlgebra, k: int) -> GradedSubspace:
    """hg^(k): sg_0 + ... + sg_k plus all g_i with i > k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    A = sg.algebra
    parts = {}
    for d, idx in A.degree_indices.items():
        if 0 <= d <= k:
            parts[d] = sg.part(d)
        elif d > k:
            parts[d] = [rl.unit(A.dim, i) for i in idx]
    return GradedSubspace(A, parts)


# ---------------------------------------------------------------------------
# H^1_+(xg, g/sg)
# ---------------------------------------------------------------------------

@dataclass
class CohomologyResult:
    dimension: int
    by_degree: dict[int, int]
    representatives: list = field(default_factory=list)  # (degree, {generator index: vector in g})
    complex_ok: bool = True


class _Quotient:
    """g/sg with a fixed complement Q_d of sg_d in each g_d."""

    def __init__(self, A: GradedAlgebra, sg: GradedSubspace):
        self.A = A
        self.sg = sg
        self.Q = {}
        for d, idx in A.degree_indices.items():
            units = [rl.unit(A.dim, i) for i in idx]
            self.Q[d] = complement_vectors(units, list(sg.part(d)), A.dim)
        self._basis = {d: list(sg.part(d)) + self.Q[d] for d in self.Q}

    def dim(self, d: int) -> int:
        return len(self.Q.get(d, []))

    def project(self, v: Sequence, d: int) -> tuple:
        """Coordinates of the class of a degree-d vector along Q_d."""
        if not self.Q.get(d):
            return ()
        basis = self._basis[d]
        coords = rl.coordinates(v, basis)
        return coords[len(basis) - len(self.Q[d]):]

    def lift(self, coords: Sequence, d: int) -> tuple:
        return rl.combo(coords, self.Q[d], self.A.dim)


def h1_plus(A: GradedAlgebra, xg: GradedSubspace | Sequence, sg: SymmetryAlgebra | None = None) -> CohomologyResult:
    """Positive-degree part of H^1(xg, g/sg) for an abelian xg inside g_{-1}.

    Cochains in Hom(xg, (g/sg)_j) have degree j + 1; only degrees >= 1 count.
    """
    gens = list(xg.part(-1)) if isinstance(xg, GradedSubspace) else [as_vector(A, g) for g in xg]
    if isinstance(xg, GradedSubspace) and set(xg.degrees) - {-1}:
        raise ValueError("xg must lie in g_-1")
    for a in gens:
        for b in gens:
            if not rl.is_zero(A.bracket(a, b)):
                raise ValueError("xg is not abelian")
    if sg is None:
        sg = symmetry_algebra(A, gens)
    quo = _Quotient(A, sg.subspace)
    r = len(gens)
    pairs = [(a, b) for a in range(r) for b in range(a + 1, r)]
    lo, hi = A.degree_range()

    def act(a: int, coords, d: int) -> tuple:
        # x_a . [v] for [v] in M_d, result in M_{d-1}
        if not coords:
            return (ZERO,) * quo.dim(d - 1)
        return quo.project(A.bracket(gens[a], quo.lift(coords, d)), d - 1)

    total = 0
    by_degree = {}
    reps = []
    ok = True
    for deg in range(1, hi + 2):
        j = deg - 1  # cochain values in M_j
        qj = quo.dim(j)
        if qj == 0:
            continue
        n1 = r * qj
        # d0: M_deg -> C1_deg
        qd = quo.dim(deg)
        d0_cols = []
        for t in range(qd):
            e = rl.unit(qd, t)
            col = []
            for a in range(r):
                col.extend(act(a, e, deg))
            d0_cols.append(col)
        # d1: C1_deg -> C2_deg, values in M_{j-1}
        qm = quo.dim(j - 1)
        d1_rows = [[ZERO] * n1 for _ in range(len(pairs) * qm)]
        for c in range(n1):
            a_c, t = divmod(c, qj)
            e = rl.unit(qj, t)
            for p, (a, b) in enumerate(pairs):
                # (d phi)(x_a, x_b) = x_a phi(x_b) - x_b phi(x_a)
                if a_c == b:
                    vals = act(a, e, j)
                    for s, v in enumerate(vals):
                        d1_rows[p * qm + s][c] += v
                if a_c == a:
                    vals = act(b, e, j)
                    for s, v in enumerate(vals):
                        d1_rows[p * qm + s][c] -= v
        z1 = rl.nullspace(d1_rows, n1) if d1_rows else [rl.unit(n1, c) for c in range(n1)]
        b1 = rl.rref(d0_cols, n1)[0] if d0_cols else []
        # d1 o d0 = 0
        for col in b1:
            if d1_rows and any(rl.dot(row, col) for row in d1_rows):
                ok = False
        h = len(z1) - len(b1)
        if h:
            by_degree[deg] = h
            total += h
            _, piv = rl.rref(b1, n1) if b1 else ([], [])
            for v in complement_vectors(z1, b1, n1):
                reps.append((deg, {a: quo.lift(v[a * qj:(a + 1) * qj], j) for a in range(r)}))
    if not ok:
        raise ArithmeticError("d1 o d0 != 0; the cochain complex is inconsistent")
    return CohomologyResult(total, by_degree, reps, ok)
