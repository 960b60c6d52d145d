"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import math

import numpy as np

from flagcurves import rational as rl
from flagcurves.algebra import complement_vectors, build_g2
from flagcurves.duality import G2_CASES
from flagcurves.frames import ProjectiveCurve


def rational_normal_curve(k: int, n: int = 200, dt: float = 5e-3, t0: float = 0.5) -> ProjectiveCurve:
    """(1, t, ..., t^k) with exact derivatives."""
    t = t0 + dt * np.arange(n)
    return ProjectiveCurve.from_polynomials([[0] * i + [1] for i in range(k + 1)], t)


def exp_cubic_curve(k: int, t: np.ndarray) -> ProjectiveCurve:
    """Fundamental system of z^(k+1) = z as a curve in P^k, exact derivatives."""
    roots = np.exp(2j * np.pi * np.arange(k + 1) / (k + 1))

    def fn(t, m):
        cols = []
        for r in roots:
            if r.imag < -1e-12:
                continue
            z = r ** m * np.exp(r * t)
            cols.append(z.real)
            if r.imag > 1e-12:
                cols.append(z.imag)
        return np.stack(cols, axis=1)

    return ProjectiveCurve.from_function(k, t, fn)


def smooth_curve(k: int, n: int) -> ProjectiveCurve:
    """Polynomial plus exponential components on [0, 1], exact derivatives."""
    t = np.linspace(0.0, 1.0, n)

    def fn(t, m):
        cols = []
        for i in range(k + 1):
            a = 0.3 * (i + 1)
            poly = np.polynomial.Polynomial([0] * i + [1]).deriv(m)(t) if m <= i else 0 * t
            cols.append(poly + 0.2 * (-1) ** (i + 1) * a ** m * np.exp(a * t))
        return np.stack(cols, axis=1)

    return ProjectiveCurve.from_function(k, t, fn)


def conic_quadric() -> np.ndarray:
    """Matrix of x0 x2 - x1^2."""
    return np.array([[0, 0, 0.5], [0, -1, 0], [0.5, 0, 0]])


def f24_x(A) -> tuple:
    return A.element({"E[3,1]": 1, "E[4,2]": 1, "E[5,4]": 1}).coefficients


def f24_paper_family(A) -> list[tuple]:
    """The published symmetry algebra of the F24 flat curve, one matrix per parameter."""
    def mat(entries):
        m = [[0] * 5 for _ in range(5)]
        for (r, c), v in entries.items():
            m[r - 1][c - 1] = v
        return A.from_matrix(m)

    return [
        mat({(3, 1): 1, (4, 2): 1, (5, 4): 1}),                          # a
        mat({(1, 1): 1, (2, 2): 2, (3, 3): -1, (5, 5): -2}),             # b
        mat({(1, 3): 1, (2, 4): 2, (4, 5): 2}),                          # c
        mat({(1, 1): 3, (2, 2): -2, (3, 3): 3, (4, 4): -2, (5, 5): -2}),  # d
        mat({(1, 2): 1, (3, 4): 1}),                                      # e0
        mat({(1, 4): 1, (3, 5): 2}),                                      # e1
    ]


def g2_x(case: str):
    parabolic, spec = G2_CASES[case]
    A = build_g2(parabolic)
    return A, A.element(spec).coefficients


def jacobi_holds(A) -> bool:
    units = [rl.unit(A.dim, i) for i in range(A.dim)]
    for i, j, k in itertools.combinations(range(A.dim), 3):
        a, b, c = units[i], units[j], units[k]
        s = rl.add(rl.add(A.bracket(a, A.bracket(b, c)), A.bracket(b, A.bracket(c, a))),
                   A.bracket(c, A.bracket(a, b)))
        if not rl.is_zero(s):
            return False
    return True


def grading_holds(A) -> bool:
    e = A.grading_element
    return all(A.bracket(e, rl.unit(A.dim, i)) == rl.scale(A.degrees[i], rl.unit(A.dim, i))
               for i in range(A.dim))


def positive_complement(A, sg) -> np.ndarray:
    """Float basis of the echelon complement of sg inside the positive-degree part."""
    K = []
    for d in range(1, A.degree_range()[1] + 1):
        K += complement_vectors([rl.unit(A.dim, i) for i in A.indices(d)], list(sg.part(d)), A.dim)
    return np.array([[float(a) for a in v] for v in K])


def random_gauge(A, sg, t: np.ndarray, seed: int, size: float = 0.5):
    """Smooth u(t) outside sg in positive degrees, with its exact derivative."""
    K = positive_complement(A, sg)
    a = np.random.default_rng(seed).standard_normal((len(K), 3))
    co = a[:, 0] + np.outer(np.sin(2 * t), a[:, 1]) + np.outer(t ** 2, a[:, 2])
    dco = np.outer(2 * np.cos(2 * t), a[:, 1]) + np.outer(2 * t, a[:, 2])
    return size * co @ K, size * dco @ K


def roots_oracle(c, tol: float = 1e-6) -> int:
    """Orbit label from numerical roots of c0 + c1 t + c2 t^2 + c3 t^3 (c3 != 0)."""
    r = np.roots(np.asarray(c, dtype=float)[::-1])
    scale = max(1.0, float(np.max(np.abs(r))))
    clusters = []
    for z in r:
        for cl in clusters:
            if abs(z - cl[0]) <= tol * scale:
                cl.append(z)
                break
        else:
            clusters.append([z])
    sizes = sorted(len(cl) for cl in clusters)
    if sizes == [3]:
        return 1
    if sizes == [1, 2]:
        return 2
    real = sum(abs(z.imag) <= tol * scale for z in r)
    return 4 if real == 3 else 3
