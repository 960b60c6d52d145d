import random
from fractions import Fraction

import numpy as np
import pytest

from flagcurves import rational as rl
from flagcurves.algebra import (AlgebraMismatch, GradedAlgebra, GradedSubspace, NotGraded,
                                ScalarModeMismatch, bracket, build_g2, build_sl_flag, build_slb,
                                complement_in_degree, killing, principal_sl, span, subspace_intersect,
                                subspace_sum)

from helpers import grading_holds, jacobi_holds


def _random_rows(rng, nrows, ncols):
    return [[Fraction(rng.randint(-3, 3)) for _ in range(ncols)] for _ in range(nrows)]


# rational linear algebra ---------------------------------------------------

def test_rref_is_canonical_for_a_subspace():
    rng = random.Random(7)
    for _ in range(100):
        rows = _random_rows(rng, rng.randint(1, 5), 8)
        basis, piv = rl.rref(rows, 8)
        # a random invertible recombination spans the same space
        mix = [rl.combo([Fraction(rng.randint(-2, 2)) for _ in rows], rows, 8) for _ in range(len(rows) + 2)]
        mix += rows
        assert rl.rref(mix, 8) == (basis, piv)
        for r, p in enumerate(piv):
            assert basis[r][p] == 1
            assert all(basis[s][p] == 0 for s in range(len(piv)) if s != r)


def test_nullspace_and_solve():
    rng = random.Random(3)
    for _ in range(30):
        m = _random_rows(rng, 4, 6)
        ker = rl.nullspace(m, 6)
        assert len(ker) == 6 - rl.rank(m, 6)
        for v in ker:
            assert rl.is_zero(rl.matvec(m, v))
        x = [Fraction(rng.randint(-3, 3)) for _ in range(6)]
        sol = rl.solve(m, rl.matvec(m, x), 6)
        assert rl.matvec(m, sol) == rl.matvec(m, x)


def test_inconsistent_system_has_certificate():
    m = [[1, 0], [1, 0]]
    b = [1, 2]
    assert rl.solve(m, b, 2) is None
    cert = rl.inconsistency_certificate(m, b)
    assert rl.is_zero(rl.matvec(rl.transpose(m), cert))
    assert rl.dot(cert, b) != 0


def test_inverse_and_det():
    m = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    inv = rl.inverse(m)
    assert rl.matmul(m, inv) == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    assert rl.det(m) == 18


# constructors ----------------------------------------------------------------

@pytest.mark.parametrize("sizes, dims", [
    ((1, 1, 1), {-2: 1, -1: 2, 0: 2, 1: 2, 2: 1}),
    ((2, 2, 1), {-2: 2, -1: 6, 0: 8, 1: 6, 2: 2}),
    ((3,), {0: 8}),
])
def test_sl_flag_dims(sizes, dims):
    A = build_sl_flag(sizes)
    assert A.graded_dims() == dims
    assert jacobi_holds(A) and grading_holds(A)


@pytest.mark.parametrize("bad", [[], [0, 2], [-1, 3]])
def test_sl_flag_rejects_bad_blocks(bad):
    with pytest.raises(ValueError):
        build_sl_flag(bad)


def test_slb_examples():
    sp4 = build_slb(4, "skew", [2])
    assert sp4.dim == 10 and sp4.graded_dims()[-1] == 3
    so5 = build_slb(5, "symmetric", [1])
    assert so5.graded_dims()[-1] == 3
    sp2 = build_slb(2, "skew", [])
    assert sp2.dim == 3 and sp2.graded_dims() == {0: 3}
    for A in (sp4, so5, sp2):
        assert jacobi_holds(A) and grading_holds(A)


@pytest.mark.parametrize("args", [(5, "skew", [1]), (4, "skew", [3]), (6, "symmetric", [2, 1]),
                                  (4, "hermitian", [])])
def test_slb_rejects_inconsistent_input(args):
    with pytest.raises(ValueError):
        build_slb(*args)


def test_g2_gradings():
    B = build_g2("B")
    assert B.graded_dims() == {-5: 1, -4: 1, -3: 1, -2: 1, -1: 2, 0: 2, 1: 2, 2: 1, 3: 1, 4: 1, 5: 1}
    P2 = build_g2("P2")
    assert P2.graded_dims()[-1] == 4 and P2.graded_dims()[0] == 4
    P1 = build_g2("P1")
    assert P1.graded_dims()[-1] == 2
    for A in (B, P1, P2):
        assert A.dim == 14 and grading_holds(A)


def test_json_round_trip():
    A = build_g2("P2")
    assert GradedAlgebra.from_json(A.to_json()) == A
    assert A.dumps() == GradedAlgebra.from_json(A.to_json()).dumps()


# bracket and Killing form ------------------------------------------------------

def test_sl2_relations():
    A = principal_sl(1)
    x, h, y = (A.element(A.basis_vector(i)) for i in range(3))
    # [y, x] is diag(1, -1), the h of the fixed triple convention
    assert A.to_matrix(bracket(y, x).coefficients) == [[1, 0], [0, -1]]
    H = bracket(y, x)
    assert killing(H, H) == 8
    assert killing(x, y) == 4


def test_bracket_antisymmetric_and_killing_graded():
    A = build_g2("B")
    rng = random.Random(1)
    for _ in range(10):
        a = A.element([Fraction(rng.randint(-3, 3)) for _ in range(A.dim)])
        assert bracket(a, a).is_zero()
    for i in A.indices(1):
        for j in A.indices(1):
            assert A.killing(A.basis_vector(i), A.basis_vector(j)) == 0


def test_g2_simple_root_bracket_nonzero():
    A = build_g2("B")
    c = A.bracket(A.basis_vector("X_{α1}"), A.basis_vector("X_{α2}"))
    nz = [A.labels[i] for i, v in enumerate(c) if v]
    assert nz == ["X_{α1+α2}"]


def test_mismatch_errors():
    A, B = principal_sl(1), principal_sl(2)
    a = A.element(A.basis_vector(0))
    with pytest.raises(AlgebraMismatch):
        bracket(a, B.element(B.basis_vector(0)))
    with pytest.raises(ScalarModeMismatch):
        bracket(a, a.as_float())
    with pytest.raises(AlgebraMismatch):
        killing(a, B.element(B.basis_vector(0)))


def test_float_bracket_agrees_with_exact():
    A = principal_sl(3)
    rng = random.Random(5)
    a = A.element([Fraction(rng.randint(-3, 3)) for _ in range(A.dim)])
    b = A.element([Fraction(rng.randint(-3, 3)) for _ in range(A.dim)])
    exact = np.array([float(v) for v in bracket(a, b).coefficients])
    assert np.allclose(bracket(a.as_float(), b.as_float()).coefficients, exact)


# subspace calculus ---------------------------------------------------------------

def test_complement_of_h_in_sl2_degree_zero():
    A = build_sl_flag([2])
    g0 = GradedSubspace.degree_space(A, 0)
    h = span(A, [A.basis_vector("H[1]")])
    comp = complement_in_degree(g0, h, 0)
    assert comp.dim == 2
    assert subspace_sum(comp, h) == g0
    assert subspace_intersect(comp, h).dim == 0


def test_intersect_and_sum_identities():
    A = principal_sl(3)
    U = span(A, [A.basis_vector(0), A.basis_vector(5)])
    assert subspace_intersect(U, U) == U
    assert subspace_sum(U, GradedSubspace.zero(A)) == U


def test_span_rejects_non_graded():
    A = principal_sl(1)
    with pytest.raises(NotGraded):
        span(A, [rl.add(A.basis_vector(0), A.basis_vector(2))])


def test_complement_dims_on_random_subspaces():
    A = principal_sl(3)
    rng = random.Random(11)
    for _ in range(50):
        d = rng.choice(list(A.degree_indices))
        idx = A.indices(d)
        vecs = [rl.combo([Fraction(rng.randint(-2, 2)) for _ in idx], [A.basis_vector(i) for i in idx], A.dim)
                for _ in range(rng.randint(0, len(idx)))]
        U = span(A, vecs)
        amb = GradedSubspace.degree_space(A, d)
        C = complement_in_degree(amb, U, d)
        assert C.dim + U.dim == amb.dim
        assert subspace_sum(C, U) == amb
        assert complement_in_degree(amb, U, d) == C
