"""Exact linear algebra over the rationals.

Vectors are tuples of :class:`fractions.Fraction`; matrices are lists of rows.
Everything here is deterministic: reduced row echelon forms use the leftmost
nonzero entry as pivot and normalize it to one, so equal row spaces give equal
matrices.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple
Matrix = list

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` and Fractions to Fraction.

    Floats are rejected on purpose: exact code paths must never see them.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


def vec(values: Iterable) -> Vector:
    return tuple(frac(v) for v in values)


def zeros(n: int) -> Vector:
    return (ZERO,) * n


def unit(n: int, i: int) -> Vector:
    v = [ZERO] * n
    v[i] = ONE
    return tuple(v)


def add(a: Sequence, b: Sequence) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vector:
    return tuple(c * x for x in a)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b) if x and y), ZERO)


def is_zero(a: Sequence) -> bool:
    return not any(a)


def combo(coeffs: Sequence, vectors: Sequence[Sequence], n: int | None = None) -> Vector:
    """Linear combination sum(c_i * v_i)."""
    if n is None:
        n = len(vectors[0]) if vectors else 0
    out = [ZERO] * n
    for c, v in zip(coeffs, vectors):
        if not c:
            continue
        for j, x in enumerate(v):
            if x:
                out[j] += c * x
    return tuple(out)


def matvec(m: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in m)


def transpose(m: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    if not m:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*m)]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[Vector], list[int]]:
    """Reduced row echelon form of the row space; zero rows dropped.

    Returns ``(basis, pivots)`` where ``basis[r]`` has a one at ``pivots[r]``
    and zeros at every other pivot column.
    """
    m = [list(map(frac, r)) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    nrows = len(m)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        lead = m[r][c]
        if lead != 1:
            m[r] = [x / lead for x in m[r]]
        row = m[r]
        nz = [j for j in range(c, ncols) if row[j]]
        for i in range(nrows):
            if i != r:
                f = m[i][c]
                if f:
                    mi = m[i]
                    for j in nz:
                        mi[j] -= f * row[j]
        pivots.append(c)
        r += 1
    return [tuple(row) for row in m[:r]], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(m: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of {v : m v = 0}, returned in reduced echelon form."""
    red, pivots = rref(m, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return rref(basis, ncols)[0] if basis else []


def solve(m: Sequence[Sequence], b: Sequence, ncols: int) -> Vector | None:
    """Particular solution of ``m v = b`` with all free variables set to zero.

    Returns None when the system is inconsistent.
    """
    aug = [list(row) + [frac(bi)] for row, bi in zip(m, b)]
    red, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    v = [ZERO] * ncols
    for row, p in zip(red, pivots):
        v[p] = row[ncols]
    return tuple(v)


def inconsistency_certificate(m: Sequence[Sequence], b: Sequence) -> Vector | None:
    """A vector y with y^T m = 0 and y^T b = 1, if the system ``m v = b`` is inconsistent."""
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    # columns of m and b as rows: y must be orthogonal to all columns of m
    cols = transpose(m) if ncols else []
    ker = nullspace(cols, nrows) if cols else [unit(nrows, i) for i in range(nrows)]
    for y in ker:
        yb = dot(y, b)
        if yb:
            return scale(1 / yb, y)
    return None


def in_span(v: Sequence, basis_rref: Sequence[Sequence], pivots: Sequence[int]) -> bool:
    """Membership test against a basis already in reduced echelon form."""
    return is_zero(reduce_against(v, basis_rref, pivots))


def reduce_against(v: Sequence, basis_rref: Sequence[Sequence], pivots: Sequence[int]) -> Vector:
    w = list(v)
    for row, p in zip(basis_rref, pivots):
        c = w[p]
        if c:
            for j, x in enumerate(row):
                if x:
                    w[j] -= c * x
    return tuple(w)


def coordinates(v: Sequence, basis: Sequence[Sequence]) -> Vector | None:
    """Coordinates of v in the given (independent) basis, or None if v is outside."""
    if not basis:
        return () if is_zero(v) else None
    n = len(v)
    m = transpose(basis)
    return solve(m, v, len(basis)) if len(m) == n else None


def complement_units(basis_rref: Sequence[Sequence], pivots: Sequence[int], n: int,
                     allowed: Sequence[int] | None = None) -> list[Vector]:
    """Unit vectors at non-pivot positions spanning a complement.

    ``allowed`` restricts to a coordinate subset (an ambient coordinate space);
    the basis must then lie inside that coordinate subspace.
    """
    idx = range(n) if allowed is None else allowed
    taken = set(pivots)
    return [unit(n, i) for i in idx if i not in taken]


def intersect(a: Sequence[Sequence], b: Sequence[Sequence], n: int) -> list[Vector]:
    """Basis (reduced echelon) of span(a) ∩ span(b)."""
    if not a or not b:
        return []
    # solve sum x_i a_i - sum y_j b_j = 0
    cols = [list(v) for v in a] + [[-x for x in v] for v in b]
    m = transpose(cols)
    ker = nullspace(m, len(cols))
    out = [combo(k[: len(a)], a, n) for k in ker]
    return rref(out, n)[0] if out else []


def inverse(m: Sequence[Sequence]) -> Matrix:
    n = len(m)
    aug = [list(map(frac, row)) + list(unit(n, i)) for i, row in enumerate(m)]
    red, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return [list(row[n:]) for row in red[:n]]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = transpose(b)
    return [[dot(row, col) for col in bt] for row in a]


def det(m: Sequence[Sequence]) -> Fraction:
    a = [list(map(frac, r)) for r in m]
    n = len(a)
    d = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return ZERO
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                for j in range(c, n):
                    a[i][j] -= f * a[c][j]
    return d


def fmt(x: Fraction) -> str:
    """Serialize as ``"p/q"`` (or ``"p"`` for integers)."""
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
