"""Graded Lie algebras with exact structure constants.

A :class:`GradedAlgebra` stores a basis (labels, degrees), sparse structure
constants over :class:`~fractions.Fraction`, a grading element and a Cartan
subalgebra.  Algebras built from matrices also keep the defining
representation so matrix-valued curve data can be converted to coordinates.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import rational as rl
from .rational import ONE, ZERO, frac

SparseMatrix = dict  # (row, col) -> Fraction


class AlgebraMismatch(ValueError):
    pass


class ScalarModeMismatch(ValueError):
    pass


class GradedAlgebra:
    """Finite-dimensional graded Lie algebra over Q.

    Parameters
    ----------
    labels, degrees
        One entry per basis element.
    structure_constants
        Mapping ``(i, j) -> {k: c}`` for ``i < j`` meaning
        ``[b_i, b_j] = sum_k c b_k``.
    grading_element
        Coefficients of ``e`` with ``[e, b_i] = degrees[i] * b_i``.
    cartan
        Basis vectors of a Cartan subalgebra acting diagonally on the basis.
    matrices, matrix_size
        Optional defining representation, one sparse matrix per basis element.
    """

    def __init__(self, name: str, labels: Sequence[str], degrees: Sequence[int],
                 structure_constants: Mapping, grading_element: Sequence,
                 cartan: Sequence[Sequence] = (), matrices: Sequence[SparseMatrix] | None = None,
                 matrix_size: int | None = None):
        self.name = name
        self.labels = tuple(labels)
        self.degrees = tuple(int(d) for d in degrees)
        self.dim = len(self.labels)
        if len(self.degrees) != self.dim:
            raise ValueError("labels and degrees differ in length")
        sc = {}
        for (i, j), out in structure_constants.items():
            items = {int(k): frac(c) for k, c in dict(out).items() if frac(c)}
            if not items:
                continue
            if i == j:
                raise ValueError("bracket of a basis element with itself must vanish")
            if i > j:
                i, j = j, i
                items = {k: -c for k, c in items.items()}
            sc[(i, j)] = tuple(sorted(items.items()))
        self._sc = sc
        self.grading_element = rl.vec(grading_element)
        self.cartan = tuple(rl.vec(h) for h in cartan)
        self.matrices = None if matrices is None else tuple(
            {k: frac(v) for k, v in m.items() if frac(v)} for m in matrices)
        self.matrix_size = matrix_size
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}

    def __repr__(self) -> str:
        return f"GradedAlgebra({self.name!r}, dim={self.dim})"

    # -- basic structure -------------------------------------------------
    @property
    def structure_constants(self) -> dict:
        return {k: dict(v) for k, v in self._sc.items()}

    def degree_range(self) -> tuple[int, int]:
        return min(self.degrees), max(self.degrees)

    @cached_property
    def degree_indices(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for i, d in enumerate(self.degrees):
            out.setdefault(d, []).append(i)
        return {d: tuple(v) for d, v in sorted(out.items())}

    def indices(self, degree: int) -> tuple[int, ...]:
        return self.degree_indices.get(degree, ())

    def graded_dims(self) -> dict[int, int]:
        lo, hi = self.degree_range()
        return {d: len(self.indices(d)) for d in range(lo, hi + 1)}

    def basis_vector(self, i: int | str) -> tuple:
        if isinstance(i, str):
            i = self.label_index[i]
        return rl.unit(self.dim, i)

    def element(self, spec) -> "AlgebraElement":
        """Build an element from a coefficient list or a ``{label: coeff}`` mapping."""
        if isinstance(spec, AlgebraElement):
            return spec
        if isinstance(spec, Mapping):
            v = [ZERO] * self.dim
            for lab, c in spec.items():
                v[self.label_index[lab]] += frac(c)
            return AlgebraElement(self, tuple(v))
        return AlgebraElement(self, rl.vec(spec))

    def bracket_basis(self, i: int, j: int) -> dict[int, Fraction]:
        if i == j:
            return {}
        if i < j:
            return dict(self._sc.get((i, j), ()))
        return {k: -c for k, c in self._sc.get((j, i), ())}

    def bracket(self, a: Sequence, b: Sequence) -> tuple:
        """Bracket of two exact coefficient vectors."""
        out = [ZERO] * self.dim
        nza = [(i, x) for i, x in enumerate(a) if x]
        nzb = [(j, y) for j, y in enumerate(b) if y]
        for i, x in nza:
            for j, y in nzb:
                if i == j:
                    continue
                if i < j:
                    terms = self._sc.get((i, j))
                    s = x * y
                else:
                    terms = self._sc.get((j, i))
                    s = -x * y
                if terms:
                    for k, c in terms:
                        out[k] += s * c
        return tuple(out)

    @cached_property
    def ad_matrices(self) -> tuple:
        """Exact ad(b_i) as dense row lists: ``ad[i][k][j]`` = coefficient of b_k in [b_i, b_j]."""
        mats = []
        for i in range(self.dim):
            m = [[ZERO] * self.dim for _ in range(self.dim)]
            for j in range(self.dim):
                for k, c in self.bracket_basis(i, j).items():
                    m[k][j] = c
            mats.append(m)
        return tuple(mats)

    def ad(self, a: Sequence) -> list[list[Fraction]]:
        """Exact matrix of ad(a) acting on coefficient columns."""
        m = [[ZERO] * self.dim for _ in range(self.dim)]
        for i, x in enumerate(a):
            if x:
                for (k, row) in enumerate(self.ad_matrices[i]):
                    for j, c in enumerate(row):
                        if c:
                            m[k][j] += x * c
        return m

    @cached_property
    def structure_tensor(self) -> np.ndarray:
        """Float tensor ``C[a, b, c]`` = coefficient of b_c in [b_a, b_b]."""
        c = np.zeros((self.dim, self.dim, self.dim))
        for (i, j), terms in self._sc.items():
            for k, v in terms:
                c[i, j, k] = float(v)
                c[j, i, k] = -float(v)
        return c

    def bracket_float(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorized float bracket; leading axes broadcast."""
        return np.einsum("...a,abc,...b->...c", a, self.structure_tensor, b)

    @cached_property
    def killing_matrix(self) -> tuple:
        """Exact Killing form matrix K_ij = tr(ad b_i ad b_j)."""
        ad = self.ad_matrices
        n = self.dim
        nz = [[(k, j, c) for k, row in enumerate(ad[i]) for j, c in enumerate(row) if c]
              for i in range(n)]
        K = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                if self.degrees[i] + self.degrees[j] != 0:
                    continue
                s = ZERO
                adj = ad[j]
                for k, l, c in nz[i]:
                    # (ad_i)[k][l] * (ad_j)[l][k]
                    d = adj[l][k]
                    if d:
                        s += c * d
                K[i][j] = K[j][i] = s
        return tuple(tuple(r) for r in K)

    def killing(self, a: Sequence, b: Sequence) -> Fraction:
        K = self.killing_matrix
        return sum((x * K[i][j] * y for i, x in enumerate(a) if x
                    for j, y in enumerate(b) if y), ZERO)

    def is_homogeneous(self, v: Sequence, degree: int | None = None) -> bool:
        degs = {self.degrees[i] for i, x in enumerate(v) if x}
        if not degs:
            return True
        return len(degs) == 1 and (degree is None or degs == {degree})

    def component(self, v: Sequence, degree: int) -> tuple:
        idx = set(self.indices(degree))
        return tuple(x if i in idx else ZERO for i, x in enumerate(v))

    # -- matrix representation ------------------------------------------
    def to_matrix(self, v: Sequence) -> list[list[Fraction]]:
        if self.matrices is None:
            raise ValueError(f"{self.name} has no matrix representation")
        n = self.matrix_size
        m = [[ZERO] * n for _ in range(n)]
        for i, x in enumerate(v):
            if x:
                for (r, c), y in self.matrices[i].items():
                    m[r][c] += x * y
        return m

    @cached_property
    def _matrix_solver(self):
        n = self.matrix_size
        rows = [[m.get(divmod(p, n), ZERO) for p in range(n * n)] for m in self.matrices]
        red, pivots = rl.rref(rows, n * n)
        if len(pivots) != self.dim:
            raise ValueError("matrix basis is linearly dependent")
        sub = [[row[p] for p in pivots] for row in rows]
        return pivots, rl.inverse(sub)

    def from_matrix(self, m: Sequence[Sequence]) -> tuple:
        """Exact coordinates of a matrix in the span of the basis; raises if outside."""
        n = self.matrix_size
        pivots, sinv = self._matrix_solver
        rhs = [frac(m[p // n][p % n]) for p in pivots]
        coeffs = tuple(sum((rhs[r] * sinv[r][c] for r in range(self.dim) if rhs[r]), ZERO)
                       for c in range(self.dim))
        back = self.to_matrix(coeffs)
        if any(back[r][c] != frac(m[r][c]) for r in range(n) for c in range(n)):
            raise ValueError("matrix is not in the algebra")
        return coeffs

    @cached_property
    def matrix_float(self) -> np.ndarray:
        """Float array ``M[a]`` of basis matrices."""
        n = self.matrix_size
        out = np.zeros((self.dim, n, n))
        for a, m in enumerate(self.matrices):
            for (r, c), v in m.items():
                out[a, r, c] = float(v)
        return out

    @cached_property
    def _float_coord_map(self) -> np.ndarray:
        n = self.matrix_size
        pivots, sinv = self._matrix_solver
        P = np.zeros((n * n, self.dim))
        S = np.array([[float(x) for x in row] for row in sinv])
        for r, p in enumerate(pivots):
            P[p, :] = S[r, :]
        return P

    def from_matrix_float(self, m: np.ndarray) -> np.ndarray:
        """Float coordinates of (stacks of) matrices; leading axes broadcast."""
        n = self.matrix_size
        flat = np.asarray(m).reshape(*np.shape(m)[:-2], n * n)
        return flat @ self._float_coord_map

    def to_matrix_float(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("...a,aij->...ij", v, self.matrix_float)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        data = {
            "name": self.name,
            "labels": list(self.labels),
            "degrees": list(self.degrees),
            "structure_constants": [
                [i, j, [[k, rl.fmt(c)] for k, c in terms]]
                for (i, j), terms in sorted(self._sc.items())
            ],
            "grading_element": [rl.fmt(x) for x in self.grading_element],
            "cartan": [[rl.fmt(x) for x in h] for h in self.cartan],
        }
        if self.matrices is not None:
            data["matrix_size"] = self.matrix_size
            data["matrices"] = [
                [[r, c, rl.fmt(v)] for (r, c), v in sorted(m.items())] for m in self.matrices
            ]
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "GradedAlgebra":
        sc = {(int(i), int(j)): {int(k): frac(c) for k, c in terms}
              for i, j, terms in data["structure_constants"]}
        matrices = None
        if "matrices" in data:
            matrices = [{(int(r), int(c)): frac(v) for r, c, v in m} for m in data["matrices"]]
        return cls(data.get("name", "algebra"), data["labels"], data["degrees"], sc,
                   [frac(x) for x in data["grading_element"]],
                   [[frac(x) for x in h] for h in data.get("cartan", [])],
                   matrices, data.get("matrix_size"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedAlgebra) and self.to_json() == other.to_json()

    def __hash__(self) -> int:
        return id(self)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of a graded algebra.

    ``coefficients`` are Fractions in exact mode and floats in numeric mode.
    """
    algebra: GradedAlgebra
    coefficients: tuple
    mode: str = "exact"

    def __post_init__(self):
        if len(self.coefficients) != self.algebra.dim:
            raise ValueError(f"expected {self.algebra.dim} coefficients, got {len(self.coefficients)}")
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown scalar mode {self.mode!r}")

    def _check(self, other: "AlgebraElement"):
        if other.algebra is not self.algebra:
            raise AlgebraMismatch("elements belong to different algebras")
        if other.mode != self.mode:
            raise ScalarModeMismatch("cannot mix exact and float elements")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)), self.mode)

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)), self.mode)

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.coefficients), self.mode)

    def __rmul__(self, c):
        c = frac(c) if self.mode == "exact" else float(c)
        return AlgebraElement(self.algebra, tuple(c * a for a in self.coefficients), self.mode)

    def __eq__(self, other):
        return (isinstance(other, AlgebraElement) and other.algebra is self.algebra
                and other.mode == self.mode and tuple(other.coefficients) == tuple(self.coefficients))

    def __hash__(self):
        return hash((id(self.algebra), tuple(self.coefficients)))

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def degree(self) -> int | None:
        """Degree if homogeneous and nonzero, else None."""
        degs = {self.algebra.degrees[i] for i, x in enumerate(self.coefficients) if x}
        return degs.pop() if len(degs) == 1 else None

    def as_float(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(float(x) for x in self.coefficients), "float")

    def __repr__(self):
        terms = [f"{x}*{self.algebra.labels[i]}" for i, x in enumerate(self.coefficients) if x]
        return " + ".join(terms) if terms else "0"


def _coeffs(x, algebra=None):
    if isinstance(x, AlgebraElement):
        return x.coefficients
    return x


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Lie bracket of two elements of the same algebra and scalar mode."""
    a._check(b)
    A = a.algebra
    if a.mode == "exact":
        return AlgebraElement(A, A.bracket(a.coefficients, b.coefficients))
    out = A.bracket_float(np.asarray(a.coefficients, float), np.asarray(b.coefficients, float))
    return AlgebraElement(A, tuple(float(x) for x in out), "float")


def killing(a: AlgebraElement, b: AlgebraElement):
    """Killing form tr(ad a ad b)."""
    if a.algebra is not b.algebra:
        raise AlgebraMismatch("elements belong to different algebras")
    A = a.algebra
    if a.mode == "exact" and b.mode == "exact":
        return A.killing(a.coefficients, b.coefficients)
    K = np.array([[float(x) for x in r] for r in A.killing_matrix])
    return float(np.asarray(a.coefficients, float) @ K @ np.asarray(b.coefficients, float))


# ---------------------------------------------------------------------------
# graded subspaces
# ---------------------------------------------------------------------------

class NotGraded(ValueError):
    pass


class GradedSubspace:
    """Graded subspace stored as one reduced echelon basis per degree.

    Basis vectors are full-length coefficient vectors of the ambient algebra;
    equal subspaces always have identical storage.
    """

    def __init__(self, algebra: GradedAlgebra, parts: Mapping[int, Sequence[Sequence]]):
        self.algebra = algebra
        clean = {}
        for d, vecs in parts.items():
            vecs = [rl.vec(v) for v in vecs]
            for v in vecs:
                if not algebra.is_homogeneous(v, d):
                    raise NotGraded(f"vector not homogeneous of degree {d}")
            red, piv = rl.rref(vecs, algebra.dim) if vecs else ([], [])
            if red:
                clean[int(d)] = (tuple(red), tuple(piv))
        self._parts = dict(sorted(clean.items()))

    @classmethod
    def zero(cls, algebra: GradedAlgebra) -> "GradedSubspace":
        return cls(algebra, {})

    @classmethod
    def degree_space(cls, algebra: GradedAlgebra, degree: int) -> "GradedSubspace":
        return cls(algebra, {degree: [rl.unit(algebra.dim, i) for i in algebra.indices(degree)]})

    @classmethod
    def whole(cls, algebra: GradedAlgebra) -> "GradedSubspace":
        return cls(algebra, {d: [rl.unit(algebra.dim, i) for i in idx]
                             for d, idx in algebra.degree_indices.items()})

    def part(self, degree: int) -> tuple:
        return self._parts.get(degree, ((), ()))[0]

    def pivots(self, degree: int) -> tuple:
        return self._parts.get(degree, ((), ()))[1]

    @property
    def degrees(self) -> list[int]:
        return list(self._parts)

    @property
    def dim(self) -> int:
        return sum(len(b) for b, _ in self._parts.values())

    def graded_dims(self) -> dict[int, int]:
        return {d: len(b) for d, (b, _) in self._parts.items()}

    def basis(self) -> list[tuple]:
        return [v for d in self._parts for v in self._parts[d][0]]

    def contains(self, v: Sequence) -> bool:
        A = self.algebra
        for d, idx in A.degree_indices.items():
            comp = A.component(v, d)
            if rl.is_zero(comp):
                continue
            b, p = self._parts.get(d, ((), ()))
            if not rl.in_span(comp, b, p):
                return False
        return True

    def contains_subspace(self, other: "GradedSubspace") -> bool:
        return all(self.contains(v) for v in other.basis())

    def __eq__(self, other) -> bool:
        return (isinstance(other, GradedSubspace) and other.algebra is self.algebra
                and other._parts == self._parts)

    def __hash__(self):
        return hash(tuple(self._parts.items()))

    def __repr__(self):
        return f"GradedSubspace(dims={self.graded_dims()})"

    def labels(self) -> list[str]:
        """Basis labels when every basis vector is a single basis element."""
        out = []
        for v in self.basis():
            nz = [i for i, x in enumerate(v) if x]
            out.append(self.algebra.labels[nz[0]] if len(nz) == 1 else repr(self.algebra.element(v)))
        return out

    def is_subalgebra(self) -> bool:
        basis = self.basis()
        for a, b in itertools.combinations_with_replacement(basis, 2):
            if not self.contains(self.algebra.bracket(a, b)):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra.name,
            "dimension": self.dim,
            "parts": {str(d): [[rl.fmt(x) for x in v] for v in b] for d, (b, _) in self._parts.items()},
        }

    @classmethod
    def from_json(cls, algebra: GradedAlgebra, data: Mapping) -> "GradedSubspace":
        return cls(algebra, {int(d): [[frac(x) for x in v] for v in vecs]
                             for d, vecs in data["parts"].items()})


def span(algebra: GradedAlgebra, vectors: Iterable[Sequence]) -> GradedSubspace:
    """Span of arbitrary vectors; raises :class:`NotGraded` if that span is not graded."""
    vecs = [rl.vec(_coeffs(v)) for v in vectors]
    vecs = [v for v in vecs if not rl.is_zero(v)]
    if not vecs:
        return GradedSubspace.zero(algebra)
    total = rl.rank(vecs, algebra.dim)
    parts = {}
    for d, idx in algebra.degree_indices.items():
        units = [rl.unit(algebra.dim, i) for i in idx]
        parts[d] = rl.intersect(vecs, units, algebra.dim)
    if sum(len(p) for p in parts.values()) != total:
        raise NotGraded("span of the given vectors is not a graded subspace")
    return GradedSubspace(algebra, parts)


def subspace_sum(a: GradedSubspace, b: GradedSubspace) -> GradedSubspace:
    if a.algebra is not b.algebra:
        raise AlgebraMismatch("subspaces of different algebras")
    degs = set(a.degrees) | set(b.degrees)
    return GradedSubspace(a.algebra, {d: list(a.part(d)) + list(b.part(d)) for d in degs})


def subspace_intersect(a: GradedSubspace, b: GradedSubspace) -> GradedSubspace:
    if a.algebra is not b.algebra:
        raise AlgebraMismatch("subspaces of different algebras")
    n = a.algebra.dim
    return GradedSubspace(a.algebra, {d: rl.intersect(a.part(d), b.part(d), n)
                                      for d in set(a.degrees) & set(b.degrees)})


def complement_vectors(ambient: Sequence[Sequence], sub: Sequence[Sequence], n: int) -> list[tuple]:
    """Deterministic complement of span(sub) inside span(ambient).

    Walks the reduced echelon basis of the ambient space in order and keeps each
    vector not already in the span of ``sub`` plus the vectors kept so far.
    """
    amb, amb_piv = rl.rref(ambient, n) if ambient else ([], [])
    cur, piv = rl.rref(sub, n) if sub else ([], [])
    if any(not rl.in_span(v, amb, amb_piv) for v in sub):
        raise ValueError("subspace is not contained in the ambient space")
    out = []
    for v in amb:
        if not rl.in_span(v, cur, piv):
            out.append(v)
            cur, piv = rl.rref(list(cur) + [v], n)
    return out


def complement_in_degree(ambient: GradedSubspace, sub: GradedSubspace, degree: int) -> GradedSubspace:
    """Complement of ``sub`` inside ``ambient`` in one degree."""
    if ambient.algebra is not sub.algebra:
        raise AlgebraMismatch("subspaces of different algebras")
    n = ambient.algebra.dim
    amb = ambient.part(degree)
    s = sub.part(degree)
    if rl.rank(list(amb) + list(s), n) != len(amb):
        raise ValueError("subspace is not contained in the ambient space")
    return GradedSubspace(ambient.algebra, {degree: complement_vectors(amb, s, n)})


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _commutator(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    out: dict = {}
    for (i, k), x in a.items():
        for (k2, j), y in b.items():
            if k == k2:
                out[(i, j)] = out.get((i, j), ZERO) + x * y
    for (i, k), x in b.items():
        for (k2, j), y in a.items():
            if k == k2:
                out[(i, j)] = out.get((i, j), ZERO) - x * y
    return {k: v for k, v in out.items() if v}


def matrix_algebra(name: str, labels: Sequence[str], matrices: Sequence[SparseMatrix], size: int,
                   grading_matrix: SparseMatrix, cartan_indices: Sequence[int]) -> GradedAlgebra:
    """Build a graded algebra from a basis of matrices closed under commutators."""
    tmp = GradedAlgebra(name, labels, [0] * len(labels), {}, [0] * len(labels),
                        matrices=matrices, matrix_size=size)
    dense = lambda m: [[m.get((r, c), ZERO) for c in range(size)] for r in range(size)]
    sc = {}
    for i, j in itertools.combinations(range(len(labels)), 2):
        com = _commutator(tmp.matrices[i], tmp.matrices[j])
        if com:
            coeffs = tmp.from_matrix(dense(com))
            sc[(i, j)] = {k: c for k, c in enumerate(coeffs) if c}
    e = tmp.from_matrix(dense(grading_matrix))
    degrees = []
    for i, m in enumerate(tmp.matrices):
        com = _commutator(grading_matrix, m)
        ratios = {com.get(key, ZERO) / v for key, v in m.items()}
        if len(ratios) != 1 or any(key not in m for key in com):
            raise ValueError(f"basis element {labels[i]} is not homogeneous")
        r = ratios.pop()
        if r.denominator != 1:
            raise ValueError("grading element has non-integer eigenvalue")
        degrees.append(int(r))
    cartan = [rl.unit(len(labels), i) for i in cartan_indices]
    return GradedAlgebra(name, labels, degrees, sc, e, cartan, matrices, size)


def _grading_diag(block_of: Sequence[int]) -> list[Fraction]:
    """Traceless diagonal entries giving entry (r, c) the degree block(c) - block(r)."""
    n = len(block_of)
    mean = Fraction(sum(block_of), n)
    return [mean - b for b in block_of]


def _blocks(block_sizes: Sequence[int]) -> list[int]:
    out = []
    for b, s in enumerate(block_sizes):
        out.extend([b] * s)
    return out


@lru_cache(maxsize=None)
def _sl_flag(block_sizes: tuple) -> GradedAlgebra:
    n = sum(block_sizes)
    blk = _blocks(block_sizes)
    entries = []
    for r in range(n):
        for c in range(n):
            if r != c:
                entries.append((blk[c] - blk[r], r, c))
    entries.sort()
    labels, mats, cartan = [], [], []
    by_degree: dict[int, list] = {}
    for d, r, c in entries:
        by_degree.setdefault(d, []).append((f"E[{r + 1},{c + 1}]", {(r, c): ONE}))
    for i in range(n - 1):
        by_degree.setdefault(0, []).append((f"H[{i + 1}]", {(i, i): ONE, (i + 1, i + 1): -ONE}))
    for d in sorted(by_degree):
        for lab, m in by_degree[d]:
            if lab.startswith("H"):
                cartan.append(len(labels))
            labels.append(lab)
            mats.append(m)
    diag = _grading_diag(blk)
    grading = {(i, i): x for i, x in enumerate(diag) if x}
    name = "sl(%d)[%s]" % (n, ",".join(map(str, block_sizes)))
    return matrix_algebra(name, labels, mats, n, grading, cartan)


def build_sl_flag(block_sizes: Sequence[int]) -> GradedAlgebra:
    """sl(n) graded by a block decomposition.

    The entry in block-row r, block-column c has degree c - r, so the
    parabolic subalgebra is block upper triangular and lower shifts have
    negative degree.
    """
    sizes = tuple(int(s) for s in block_sizes)
    if not sizes:
        raise ValueError("block_sizes must be nonempty")
    if any(s <= 0 for s in sizes):
        raise ValueError("block sizes must be positive")
    if sum(sizes) < 2:
        raise ValueError("sl(n) needs n >= 2")
    return _sl_flag(sizes)


def principal_sl(k: int) -> GradedAlgebra:
    """sl(k+1) with the Borel grading (all blocks of size one)."""
    return build_sl_flag([1] * (k + 1))


@lru_cache(maxsize=None)
def _slb(n: int, parity: str, flag: tuple) -> GradedAlgebra:
    sizes = []
    prev = 0
    for r in flag:
        sizes.append(r - prev)
        prev = r
    middle = n - 2 * prev
    block_sizes = sizes + ([middle] if middle else []) + sizes[::-1]
    blk = _blocks(block_sizes)
    half = n // 2
    # antidiagonal form b(e_i, e_{n-1-i}) = +-1
    J = {}
    for i in range(n):
        j = n - 1 - i
        J[(i, j)] = ONE if (parity == "symmetric" or i < half) else -ONE
    diag = _grading_diag(blk)
    entries_by_degree: dict[int, list] = {}
    for r in range(n):
        for c in range(n):
            entries_by_degree.setdefault(blk[c] - blk[r], []).append((r, c))
    labels, mats, cartan = [], [], []
    for d in sorted(entries_by_degree):
        pos = entries_by_degree[d]
        index = {p: k for k, p in enumerate(pos)}
        # condition A^T J + J A = 0, entrywise (a, b)
        rows = []
        for a in range(n):
            for b in range(n):
                row = [ZERO] * len(pos)
                # (A^T J)_{ab} = A_{b', a} J_{b', b}
                bp = n - 1 - b
                if (bp, a) in index:
                    row[index[(bp, a)]] += J[(bp, b)]
                ap = n - 1 - a
                if (ap, b) in index:
                    row[index[(ap, b)]] += J[(a, ap)]
                if any(row):
                    rows.append(row)
        ker = rl.nullspace(rows, len(pos)) if rows else [rl.unit(len(pos), i) for i in range(len(pos))]
        # order: off-diagonal vectors first, then diagonal (Cartan) ones
        offd = [v for v in ker if any(x and pos[i][0] != pos[i][1] for i, x in enumerate(v))]
        dg = [v for v in ker if v not in offd]
        for v in offd + dg:
            m = {pos[i]: x for i, x in enumerate(v) if x}
            lead = next(pos[i] for i, x in enumerate(v) if x)
            if v in dg:
                cartan.append(len(labels))
                labels.append(f"T[{lead[0] + 1}]")
            else:
                labels.append(f"A[{lead[0] + 1},{lead[1] + 1}]")
            mats.append(m)
    grading = {(i, i): x for i, x in enumerate(diag) if x}
    kind = "so" if parity == "symmetric" else "sp"
    name = "%s(%d)[%s]" % (kind, n, ",".join(map(str, flag)))
    return matrix_algebra(name, labels, mats, n, grading, cartan)


def build_slb(n: int, parity: str, isotropic_flag: Sequence[int]) -> GradedAlgebra:
    """so(p, q) or sp(n) preserving an antidiagonal form, graded by an isotropic flag.

    ``isotropic_flag`` lists the dimensions r_1 < ... < r_m <= n/2 of the
    isotropic subspaces spanned by the first standard basis vectors.
    """
    if parity not in ("symmetric", "skew"):
        raise ValueError("parity must be 'symmetric' or 'skew'")
    if parity == "skew" and n % 2:
        raise ValueError("a nondegenerate skew form needs even dimension")
    if n < 2 or (parity == "symmetric" and n < 3):
        raise ValueError("dimension too small")
    flag = tuple(int(r) for r in isotropic_flag)
    if any(r <= 0 for r in flag) or any(b <= a for a, b in zip(flag, flag[1:])):
        raise ValueError("isotropic flag dimensions must be positive and increasing")
    if flag and flag[-1] > n // 2:
        raise ValueError("isotropic subspaces have dimension at most n/2")
    return _slb(n, parity, flag)


# -- G2 -------------------------------------------------------------------

G2_POSITIVE_ROOTS = ((1, 0), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3))

def g2_root_label(root: tuple[int, int]) -> str:
    """Label like ``X_{α1+2α2}`` or ``X_{-α1-α2}``."""
    a, b = root
    sign = "-" if a < 0 or b < 0 else ""
    a, b = abs(a), abs(b)
    terms = []
    if a:
        terms.append(f"{a if a > 1 else ''}α1")
    if b:
        terms.append(f"{b if b > 1 else ''}α2")
    joined = ("+" if not sign else "-").join(terms)
    return f"X_{{{sign}{joined}}}"


def _g2_seven_dim() -> tuple[dict, dict, dict, dict]:
    """Chevalley generators e1, e2, f1, f2 of g2 on its 7-dim representation.

    Weights v0..v6 are a1+2a2, a1+a2, a2, 0, -a2, -a1-a2, -a1-2a2 with a2 short.
    """
    f1 = {(2, 1): ONE, (5, 4): ONE}
    e1 = {(1, 2): ONE, (4, 5): ONE}
    # products of matching e2/f2 entries are 1, 2, 2, 1 along the alpha2-string
    e2 = {(0, 1): ONE, (2, 3): Fraction(2), (3, 4): ONE, (5, 6): -ONE}
    f2 = {(1, 0): ONE, (3, 2): ONE, (4, 3): Fraction(2), (6, 5): -ONE}
    return e1, e2, f1, f2


def _scale_sparse(c, m: SparseMatrix) -> SparseMatrix:
    return {k: c * v for k, v in m.items() if c * v}


@lru_cache(maxsize=None)
def _g2_chevalley() -> tuple[list[str], list[tuple[int, int] | None], list[SparseMatrix]]:
    """Basis matrices of split g2 from root data: H1, H2 and root vectors X_alpha.

    H1, H2 are dual to the simple roots (alpha_i(H_j) = delta_ij).  Positive
    root vectors are iterated brackets of the simple ones; each negative root
    vector is scaled so that alpha([X_alpha, X_-alpha]) = 2.
    """
    e1, e2, f1, f2 = _g2_seven_dim()
    weights = [(1, 2), (1, 1), (0, 1), (0, 0), (0, -1), (-1, -1), (-1, -2)]
    H1 = {(i, i): Fraction(w[0]) for i, w in enumerate(weights) if w[0]}
    H2 = {(i, i): Fraction(w[1]) for i, w in enumerate(weights) if w[1]}
    X = {(1, 0): e1, (0, 1): e2, (-1, 0): f1, (0, -1): f2}
    X[(1, 1)] = _commutator(e2, e1)
    X[(1, 2)] = _scale_sparse(Fraction(1, 2), _commutator(e2, X[(1, 1)]))
    X[(1, 3)] = _scale_sparse(Fraction(1, 3), _commutator(e2, X[(1, 2)]))
    X[(2, 3)] = _commutator(e1, X[(1, 3)])
    X[(-1, -1)] = _commutator(f2, f1)
    X[(-1, -2)] = _scale_sparse(Fraction(1, 2), _commutator(f2, X[(-1, -1)]))
    X[(-1, -3)] = _scale_sparse(Fraction(1, 3), _commutator(f2, X[(-1, -2)]))
    X[(-2, -3)] = _commutator(f1, X[(-1, -3)])
    # Chevalley normalization: alpha([X_a, X_-a]) = 2
    for a in G2_POSITIVE_ROOTS:
        neg = (-a[0], -a[1])
        h = _commutator(X[a], X[neg])
        if not h or any(r != c for r, c in h):
            raise AssertionError("root vectors do not pair to the Cartan subalgebra")
        # alpha(h): eigenvalue of ad h on X_a
        com = _commutator(h, X[a])
        key = next(iter(X[a]))
        val = com.get(key, ZERO) / X[a][key]
        X[neg] = _scale_sparse(2 / val, X[neg])
    labels, roots, mats = [], [], []
    for a in sorted(G2_POSITIVE_ROOTS, key=lambda r: (-(r[0] + r[1]), r)):
        neg = (-a[0], -a[1])
        labels.append(g2_root_label(neg))
        roots.append(neg)
        mats.append(X[neg])
    labels += ["H1", "H2"]
    roots += [None, None]
    mats += [H1, H2]
    for a in sorted(G2_POSITIVE_ROOTS, key=lambda r: (r[0] + r[1], r)):
        labels.append(g2_root_label(a))
        roots.append(a)
        mats.append(X[a])
    return labels, roots, mats


G2_PARABOLICS = ("B", "P1", "P2")


@lru_cache(maxsize=None)
def build_g2(parabolic: str = "B") -> GradedAlgebra:
    """Split g2 on the basis {H1, H2, X_alpha}, graded for a parabolic subalgebra.

    Degrees: height of the root for ``B``; the alpha2-coefficient for ``P1``
    (stabilizer of a null line, g_-1 of dimension 2); the alpha1-coefficient
    for ``P2`` (stabilizer of a null plane, g_-1 of dimension 4).
    """
    if parabolic not in G2_PARABOLICS:
        raise ValueError(f"parabolic must be one of {G2_PARABOLICS}")
    labels, roots, mats = _g2_chevalley()
    pick = {"B": lambda r: r[0] + r[1], "P1": lambda r: r[1], "P2": lambda r: r[0]}[parabolic]
    degrees = [0 if r is None else pick(r) for r in roots]
    # grading element: combination of H1, H2
    gh = {"B": (ONE, ONE), "P1": (ZERO, ONE), "P2": (ONE, ZERO)}[parabolic]
    grading = {}
    for m, c in zip((mats[labels.index("H1")], mats[labels.index("H2")]), gh):
        for k, v in m.items():
            grading[k] = grading.get(k, ZERO) + c * v
    order = sorted(range(len(labels)), key=lambda i: (degrees[i], i))
    labels = [labels[i] for i in order]
    mats = [mats[i] for i in order]
    cartan = [labels.index("H1"), labels.index("H2")]
    alg = matrix_algebra(f"g2/{parabolic}", labels, mats, 7,
                         {k: v for k, v in grading.items() if v}, cartan)
    alg.roots = tuple(roots[i] for i in order)
    return alg
