import itertools

import pytest

from flagcurves import rational as rl
from flagcurves.algebra import build_g2, build_sl_flag, build_slb, principal_sl
from flagcurves.structure import (PARAMETRIZED, complete_sl2, filtration, h1_plus,
                                  h_filtration, symmetry_algebra)

from helpers import f24_x, g2_x


def _principal(k):
    A = principal_sl(k)
    return A, A.element({f"E[{i + 2},{i + 1}]": 1 for i in range(k)}).coefficients


def _closed(U):
    A = U.algebra
    return all(U.contains(A.bracket(a, b)) for a, b in itertools.combinations(U.basis(), 2))


@pytest.mark.parametrize("k", range(1, 6))
def test_principal_triple(k):
    A, x = _principal(k)
    t = complete_sl2(A, x)
    assert t.check()
    assert A.to_matrix(t.h) == [[k - 2 * i if r == i else 0 for r in range(k + 1)] for i in range(k + 1)]


def test_g2_triple_is_regular():
    A, x = g2_x("B-nondeg")
    t = complete_sl2(A, x)
    assert t.check()
    # h is a multiple of H1 + H2; y is supported on the simple root vectors
    h = A.element(t.h)
    assert h.coefficients[A.label_index["H1"]] == h.coefficients[A.label_index["H2"]] != 0
    support = {A.labels[i] for i, v in enumerate(t.y) if v}
    assert support == {"X_{α1}", "X_{α2}"}


def test_triple_needs_degree_minus_one():
    A = principal_sl(2)
    with pytest.raises(ValueError):
        complete_sl2(A, A.basis_vector("E[1,2]"))
    with pytest.raises(ValueError, match="nonzero"):
        complete_sl2(A, rl.zeros(A.dim))


@pytest.mark.parametrize("k", range(2, 6))
def test_principal_symmetry_algebra(k):
    A, x = _principal(k)
    sg = symmetry_algebra(A, x)
    t = complete_sl2(A, x)
    assert sg.dim == 3 and sg.reductive_flag and sg.subspace.is_subalgebra()
    assert all(sg.subspace.contains(v) for v in (t.x, t.h, t.y))


def test_symmetry_recursion_is_exact():
    A = build_sl_flag([2, 2, 1])
    x = f24_x(A)
    sg = symmetry_algebra(A, x)
    assert not sg.reductive_flag and sg.subspace.is_subalgebra()
    assert sg.part(-1) == (x,) or rl.rref(sg.part(-1), A.dim)[0] == rl.rref([x], A.dim)[0]
    for d in range(0, 3):
        for i in A.indices(d):
            u = A.basis_vector(i)
            inside = sg.subspace.contains(u)
            if inside:
                assert sg.subspace.contains(A.bracket(x, u))


def test_parametrized_mode_is_smaller():
    for k in (2, 3, 4):
        A, x = _principal(k)
        un = symmetry_algebra(A, x)
        par = symmetry_algebra(A, x, PARAMETRIZED)
        assert un.subspace.contains_subspace(par.subspace)
        assert un.graded_dims().get(0, 0) - par.graded_dims().get(0, 0) in (0, 1)


def test_g2_orbit2_basis():
    A, x = g2_x("P2-orbit2")
    sg = symmetry_algebra(A, x)
    assert sg.labels() == ["X_{-α1-α2}", "H1", "H2", "X_{α1+α2}", "X_{α1+3α2}"]


def test_reductive_flag_for_g2_b():
    A, x = g2_x("B-nondeg")
    assert symmetry_algebra(A, x).reductive_flag


def test_filtrations():
    A, x = _principal(3)
    assert filtration(A, 0).dim == sum(len(A.indices(d)) for d in range(0, 4))
    assert filtration(A, 10).dim == 0
    with pytest.raises(ValueError):
        filtration(A, -1)
    sg = symmetry_algebra(A, x)
    assert h_filtration(sg, 10) == sg.nonnegative()
    assert h_filtration(sg, 10).dim == 2
    for k in range(4):
        assert h_filtration(sg, k).contains_subspace(filtration(A, k + 1))


def test_h_filtration_closed_on_f24():
    A = build_sl_flag([2, 2, 1])
    sg = symmetry_algebra(A, f24_x(A))
    for k in range(0, 3):
        assert _closed(h_filtration(sg, k))


@pytest.mark.parametrize("k", range(2, 6))
def test_h1_one_dimensional_equals_k_minus_one(k):
    A, x = _principal(k)
    res = h1_plus(A, [x])
    assert res.dimension == k - 1 and res.complex_ok


def test_h1_g2_nondegenerate():
    A, x = g2_x("B-nondeg")
    assert h1_plus(A, [x]).dimension == 1


def test_h1_full_minus_one_part_of_one_graded():
    A = build_slb(4, "skew", [2])
    gens = [A.basis_vector(i) for i in A.indices(-1)]
    res = h1_plus(A, gens)
    assert res.dimension == 0 and res.complex_ok


def test_h1_rejects_non_abelian():
    A = build_g2("B")
    with pytest.raises(ValueError):
        h1_plus(A, [A.basis_vector(i) for i in A.indices(-1)])
