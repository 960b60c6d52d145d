"""Moving frames of sampled curves and their reduction to W-normal form.

Pipeline for a projective curve: osculating frame -> det-one rescaling ->
companion-form connection in sl(k+1) -> degree-by-degree gauge reduction ->
W-valued invariant trace.  All numerics are float64 on a uniform grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import rational as rl
from .algebra import GradedAlgebra, GradedSubspace, principal_sl
from .normalization import (NormalizationSpace, generic_complement,
                            invariant_complement_certificate)
from .structure import (PARAMETRIZED, UNPARAMETRIZED, SymmetryAlgebra, complete_sl2,
                        symmetry_algebra)

DET_TOL = 1e-10


class DegenerateFrame(ValueError):
    pass


class OrientationError(ValueError):
    pass


class TypeViolation(ValueError):
    pass


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def stencil(order: int, offsets: tuple) -> np.ndarray:
    """Weights w with sum w_i f(t + o_i dt) ~ dt^order f^(order)(t), solved exactly."""
    n = len(offsets)
    rows = [[Fraction(o) ** j / math.factorial(j) for o in offsets] for j in range(n)]
    rhs = [Fraction(int(j == order)) for j in range(n)]
    w = rl.solve(rows, rhs, n)
    return np.array([float(c) for c in w])


def fd_derivative(y: np.ndarray, dt: float, order: int = 1) -> np.ndarray:
    """order-th derivative along axis 0, 4th-order accurate at every node.

    Interior nodes use the symmetric stencil with (order + 3) // 2 points on each
    side; nodes near the ends use a one-sided window of the same accuracy, so the
    grid is not shrunk.
    """
    y = np.asarray(y, dtype=float)
    if order == 0:
        return y.copy()
    h = (order + 3) // 2
    width = max(2 * h + 1, order + 4)
    n = y.shape[0]
    if n < width:
        raise ValueError(f"need at least {width} grid nodes for a 4th-order derivative of order {order}")
    out = np.empty_like(y)
    w = stencil(order, tuple(range(-h, h + 1)))
    acc = np.zeros_like(y[h:n - h])
    for j, c in enumerate(w):
        acc = acc + c * y[j:n - 2 * h + j]
    out[h:n - h] = acc
    for i in range(h):
        wl = stencil(order, tuple(range(-i, width - i)))
        out[i] = np.tensordot(wl, y[:width], axes=1)
        wr = stencil(order, tuple(range(-(width - 1 - i), i + 1)))
        out[n - 1 - i] = np.tensordot(wr, y[n - width:], axes=1)
    return out / dt ** order


# ---------------------------------------------------------------------------
# curves and frames
# ---------------------------------------------------------------------------

@dataclass
class ProjectiveCurve:
    """Sampled lift v0(t) of a curve in RP^k.

    ``derivatives[m - 1]`` holds v0^(m) on the grid when exact values are known.
    """
    k: int
    t: np.ndarray
    values: np.ndarray
    derivatives: list = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.t), self.k + 1):
            raise ValueError(f"values must have shape ({len(self.t)}, {self.k + 1})")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        steps = np.diff(self.t)
        if len(self.t) < 5 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be uniform with at least 5 nodes")
        self.derivatives = [np.asarray(d, dtype=float) for d in self.derivatives]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def derivative(self, m: int) -> np.ndarray:
        if m == 0:
            return self.values
        if m <= len(self.derivatives):
            return self.derivatives[m - 1]
        base = len(self.derivatives)
        return fd_derivative(self.derivative(base), self.dt, m - base)

    @classmethod
    def from_polynomials(cls, coeffs: Sequence[Sequence[float]], t: np.ndarray,
                         exact: bool = True) -> "ProjectiveCurve":
        """Curve whose components are polynomials, coefficients in increasing degree."""
        polys = [np.polynomial.Polynomial(c) for c in coeffs]
        k = len(polys) - 1
        t = np.asarray(t, dtype=float)
        vals = np.stack([p(t) for p in polys], axis=1)
        ders = []
        if exact:
            cur = polys
            for _ in range(k + 1):
                cur = [p.deriv() for p in cur]
                ders.append(np.stack([p(t) for p in cur], axis=1))
        return cls(k, t, vals, ders)

    @classmethod
    def from_function(cls, k: int, t: np.ndarray, fn: Callable[[np.ndarray, int], np.ndarray],
                      orders: int | None = None) -> "ProjectiveCurve":
        """``fn(t, m)`` returns the m-th derivative of v0 as an array (n, k+1)."""
        t = np.asarray(t, dtype=float)
        m = k + 1 if orders is None else orders
        return cls(k, t, fn(t, 0), [fn(t, i) for i in range(1, m + 1)])


@dataclass
class FramePath:
    """Frames s(t) with columns v_0..v_k and coefficients p with v_{k+1} = sum p_i v_i."""
    t: np.ndarray
    s: np.ndarray  # (n, k+1, k+1)
    p: np.ndarray  # (n, k+1)

    @property
    def k(self) -> int:
        return self.p.shape[1] - 1

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def det(self) -> np.ndarray:
        return np.linalg.det(self.s)


def _check_det(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    det = np.linalg.det(s)
    bad = np.flatnonzero(np.abs(det) < DET_TOL)
    if bad.size:
        raise DegenerateFrame(f"frame degenerates at t = {t[bad[0]]:.6g} (|det| < {DET_TOL:g})")
    return det


def osculating_frame(c: ProjectiveCurve) -> FramePath:
    """s(t) = [v0, v0', ..., v0^(k)] and p from v0^(k+1) = sum p_i v0^(i)."""
    cols = [c.derivative(m) for m in range(c.k + 1)]
    s = np.stack(cols, axis=2)
    _check_det(s, c.t)
    top = c.derivative(c.k + 1)
    p = np.linalg.solve(s, top[..., None])[..., 0]
    return FramePath(c.t, s, p)


def frame_from_fundamental(t: np.ndarray, phi: np.ndarray, p: np.ndarray) -> FramePath:
    """Frame of the curve v0 = first row of a fundamental matrix.

    ``phi[j, m, i]`` is the m-th derivative of the i-th solution, so column m of
    s is row m of phi; ``p`` are the linear equation's coefficients.
    """
    s = np.transpose(phi, (0, 2, 1))
    _check_det(s, t)
    return FramePath(np.asarray(t, float), s, np.asarray(p, float))


def orient_frame(f: FramePath) -> FramePath:
    """Reflect the first coordinate when det < 0 throughout and k + 1 is even.

    A reflection is a projective map, so invariants are unchanged, and
    ``sl_normalize`` can then reach det = 1.
    """
    if (f.k + 1) % 2 == 0 and np.all(f.det() < 0):
        return FramePath(f.t, f.s * np.r_[-1.0, np.ones(f.k)][None, :, None], f.p)
    return f


def sl_normalize(f: FramePath) -> FramePath:
    """Rescale v0 by lambda = det(s)^(-1/(k+1)) so that det = 1 and p_k = 0.

    With q = lambda'/lambda = -p_k/(k+1), lambda^(n)/lambda = r_n where r_0 = 1
    and r_{n+1} = r_n' + q r_n, so the new frame is s T with T upper triangular,
    T[j, m] = lambda C(m, j) r_{m-j}.
    """
    k = f.k
    n = len(f.t)
    det = f.det()
    if np.any(np.abs(det) < DET_TOL):
        raise DegenerateFrame("frame is degenerate")
    if (k + 1) % 2 == 0 and np.any(det < 0):
        raise OrientationError("negative determinant with even k+1; reflect one coordinate of v0 and retry")
    lam = np.sign(det) * np.abs(det) ** (-1.0 / (k + 1))
    q = -f.p[:, k] / (k + 1)
    # derivatives of q up to order k
    qd = [fd_derivative(q, f.dt, i) for i in range(k + 1)]
    # rd[j] holds the j-th derivative of the current r_m; Leibniz for r_{m+1} = r_m' + q r_m
    rd = [np.ones(n)] + [np.zeros(n)] * (k + 1)
    r = [rd[0]]
    for m in range(k + 1):
        rd = [rd[j + 1] + sum(math.comb(j, i) * qd[i] * rd[j - i] for i in range(j + 1))
              for j in range(k + 1 - m)]
        r.append(rd[0])
    T = np.zeros((n, k + 1, k + 1))
    for m in range(k + 1):
        for j in range(m + 1):
            T[:, j, m] = math.comb(m, j) * r[m - j]
    top = np.zeros((n, k + 1))
    for j in range(k + 1):
        top[:, j] = math.comb(k + 1, j) * r[k + 1 - j]
    top += f.p
    p_new = np.linalg.solve(T, top[..., None])[..., 0]
    s_new = lam[:, None, None] * (f.s @ T)
    return FramePath(f.t, s_new, p_new)


# ---------------------------------------------------------------------------
# connection data
# ---------------------------------------------------------------------------

@dataclass
class ConnectionPath:
    algebra: GradedAlgebra
    t: np.ndarray
    values: np.ndarray  # (n, dim)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def degree_part(self, d: int) -> np.ndarray:
        out = np.zeros_like(self.values)
        idx = list(self.algebra.indices(d))
        out[:, idx] = self.values[:, idx]
        return out


def companion(p: np.ndarray) -> np.ndarray:
    """Matrices x + sum_i p_i E_{i,k} for every grid node."""
    n, k1 = p.shape
    m = np.zeros((n, k1, k1))
    for i in range(k1 - 1):
        m[:, i + 1, i] = 1.0
    m[:, :, -1] = p
    return m


def maurer_cartan_pullback(f: FramePath, A: GradedAlgebra | None = None,
                           method: str = "companion") -> ConnectionPath:
    """kappa = s^{-1} s' in the basis of sl(k+1).

    ``companion`` uses the closed companion form; ``finite_difference``
    differentiates s numerically (used to cross-check the closed form).
    """
    A = A or principal_sl(f.k)
    if method == "companion":
        m = companion(f.p)
    elif method == "finite_difference":
        ds = fd_derivative(f.s, f.dt)
        m = np.linalg.solve(f.s, ds)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ConnectionPath(A, f.t, A.from_matrix_float(m))


# ---------------------------------------------------------------------------
# gauge reduction
# ---------------------------------------------------------------------------

def _series(A: GradedAlgebra, u: np.ndarray, v: np.ndarray, shift: int) -> np.ndarray:
    """sum_{n>=0} ad(u)^n v / (n + shift)!, truncated once terms vanish (u nilpotent)."""
    total = v / math.factorial(shift)
    term = v
    lo, hi = A.degree_range()
    for n in range(1, hi - lo + 2):
        term = A.bracket_float(u, term)
        if not np.any(term):
            break
        total = total + term / math.factorial(n + shift)
    return total


def gauge(A: GradedAlgebra, kappa: np.ndarray, u: np.ndarray, du: np.ndarray) -> np.ndarray:
    """Connection of the frame s exp(u): Ad(exp(-u)) kappa + sum ad(-u)^n u' / (n+1)!."""
    return _series(A, -u, kappa, 0) + _series(A, -u, du, 1)


@dataclass
class _StepData:
    degree: int  # degree d of the component being normalized (u lives in d + 1)
    idx: list
    inv: np.ndarray  # coordinates along [W | sg | R] basis
    nW: int
    nS: int
    Z: np.ndarray  # (nR, dim) preimages z_j in g_{d+1}


@dataclass
class NormalFormResult:
    t: np.ndarray
    w: np.ndarray  # (n, dim) W-valued trace
    sigma: np.ndarray  # (n, dim) sg^(0)-valued residual
    gauges: list  # per step: (degree, u values (n, dim))
    residual: float  # largest component outside x + W + sg^(0)
    algebra: GradedAlgebra
    connection: np.ndarray = None  # normalized connection values

    def gauge_matrices(self) -> np.ndarray | None:
        """Gauge path a(t) = exp(u_1) exp(u_2) ... in the defining representation."""
        A = self.algebra
        if A.matrices is None:
            return None
        n = len(self.t)
        N = A.matrix_size
        a = np.broadcast_to(np.eye(N), (n, N, N)).copy()
        for _, u in self.gauges:
            a = a @ _expm_nilpotent(A.to_matrix_float(u))
        return a


def _expm_nilpotent(m: np.ndarray) -> np.ndarray:
    N = m.shape[-1]
    out = np.broadcast_to(np.eye(N), m.shape).copy()
    term = out.copy()
    for n in range(1, N + 1):
        term = term @ m / n
        out = out + term
    return out


def _step_data(A: GradedAlgebra, x: tuple, sg: SymmetryAlgebra, W: GradedSubspace) -> list[_StepData]:
    from .algebra import complement_vectors
    out = []
    lo, hi = A.degree_range()
    for d in range(0, hi):
        idx = list(A.indices(d))
        if not idx:
            continue
        src = [rl.unit(A.dim, i) for i in A.indices(d + 1)]
        K = complement_vectors(src, list(sg.part(d + 1)), A.dim)
        R = [A.bracket(x, z) for z in K]
        basis = list(W.part(d)) + list(sg.part(d)) + R
        if len(basis) != len(idx):
            raise ValueError(f"W is not complementary in degree {d}")
        B = [[v[i] for v in basis] for i in idx]
        inv = rl.inverse(B)
        out.append(_StepData(d, idx, np.array([[float(c) for c in row] for row in inv]),
                             len(W.part(d)), len(sg.part(d)),
                             np.array([[float(c) for c in z] for z in K]).reshape(len(K), A.dim)))
    return out


def _decompose(A: GradedAlgebra, W: GradedSubspace, sg: SymmetryAlgebra, values: np.ndarray):
    """Split nonnegative-degree parts into W, sg and a remainder (least squares per degree)."""
    n = values.shape[0]
    w = np.zeros_like(values)
    s = np.zeros_like(values)
    resid = 0.0
    for d, idx in A.degree_indices.items():
        if d < 0:
            continue
        idx = list(idx)
        Wb = np.array([[float(v[i]) for i in idx] for v in W.part(d)]).reshape(-1, len(idx))
        Sb = np.array([[float(v[i]) for i in idx] for v in sg.part(d)]).reshape(-1, len(idx))
        basis = np.vstack([Wb, Sb])
        comp = values[:, idx]
        if basis.shape[0] == 0:
            resid = max(resid, float(np.max(np.abs(comp), initial=0.0)))
            continue
        coef, *_ = np.linalg.lstsq(basis.T, comp.T, rcond=None)
        coef = coef.T
        wpart = coef[:, :Wb.shape[0]] @ Wb
        spart = coef[:, Wb.shape[0]:] @ Sb
        w[:, idx] = wpart
        s[:, idx] = spart
        resid = max(resid, float(np.max(np.abs(comp - wpart - spart), initial=0.0)))
    return w, s, resid


def reduce_to_normal_form(kappa: ConnectionPath, x, sg: SymmetryAlgebra, W: GradedSubspace,
                          type_tol: float = 1e-8) -> NormalFormResult:
    """Gauge kappa degree by degree until it equals x + w(t) + sigma(t).

    At step d the degree-d component is split along W_d + sg_d + [x, K_{d+1}],
    where K_{d+1} is the echelon complement of sg_{d+1} in g_{d+1}; the
    [x, K]-part is removed by exp(u) with u in K_{d+1}.
    """
    A = kappa.algebra
    xv = tuple(x)
    xf = np.array([float(c) for c in xv])
    vals = np.array(kappa.values, dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    minus = kappa.degree_part(-1)
    if np.max(np.abs(minus - xf[None, :])) > type_tol * scale:
        raise TypeViolation("degree -1 part of the connection differs from x")
    lo, _ = A.degree_range()
    for d in range(lo, -1):
        if np.max(np.abs(kappa.degree_part(d)), initial=0.0) > type_tol * scale:
            raise TypeViolation(f"connection has a nonzero component in degree {d}")
    steps = _step_data(A, xv, sg, W)
    gauges = []
    for st in steps:
        comp = vals[:, st.idx]
        coef = comp @ st.inv.T
        rho = coef[:, st.nW + st.nS:]
        if rho.shape[1] == 0:
            continue
        u = -rho @ st.Z
        du = fd_derivative(u, kappa.dt)
        vals = gauge(A, vals, u, du)
        gauges.append((st.degree + 1, u))
    w, s, resid = _decompose(A, W, sg, vals)
    return NormalFormResult(kappa.t, w, s, gauges, resid, A, vals)


def is_flat(r: NormalFormResult, tol: float = 1e-8, mask: np.ndarray | None = None) -> bool:
    """All w components below ``tol``; ``mask`` restricts the check to selected nodes."""
    w = r.w if mask is None else r.w[np.asarray(mask)]
    return float(np.max(np.abs(w), initial=0.0)) <= tol


# ---------------------------------------------------------------------------
# projective invariants
# ---------------------------------------------------------------------------

def wilczynski_theta3(p: np.ndarray, k: int, dt: float, variant: str = "corrected") -> np.ndarray:
    """Closed formula for theta_3 from the coefficients p_0..p_k.

    The ``"printed"`` variant carries ``+6/k p'_{k-1}``; it is not invariant under
    rescaling v0 and disagrees with the reduction.  ``"corrected"`` flips that
    one sign, which makes the expression equal to the invariant of the
    semi-canonical form (checked symbolically for k = 2, 3, 4).
    """
    if k < 2:
        raise ValueError("theta_3 needs k >= 2")
    if variant not in ("corrected", "printed"):
        raise ValueError(f"unknown variant {variant!r}")
    sign = -1.0 if variant == "corrected" else 1.0
    p = np.asarray(p, dtype=float)
    pk, pk1, pk2 = p[:, k], p[:, k - 1], p[:, k - 2]
    dpk = fd_derivative(pk, dt)
    ddpk = fd_derivative(pk, dt, 2)
    dpk1 = fd_derivative(pk1, dt)
    return (ddpk - 6 / (k + 1) * pk * dpk + 4 / (k + 1) ** 2 * pk ** 3 + sign * 6 / k * dpk1
            + 12 / (k * (k + 1)) * pk * pk1 + 12 / (k * (k - 1)) * pk2)


def theta_weight(k: int, i: int) -> float:
    """mu_i in theta_{i+1} = mu_i tr(w x^i): (2i)! / (i! k (k-1) ... (k-i+1))."""
    falling = math.prod(range(k - i + 1, k + 1))
    return math.factorial(2 * i) / (math.factorial(i) * falling)


@lru_cache(maxsize=None)
def projective_setup(k: int, mode: str = UNPARAMETRIZED):
    """Algebra, x, sg and W for curves in RP^k."""
    A = principal_sl(k)
    x = A.element({f"E[{i + 2},{i + 1}]": 1 for i in range(k)}).coefficients
    sg = symmetry_algebra(A, x, mode)
    if mode == UNPARAMETRIZED:
        cert = invariant_complement_certificate(A, x, sg)
        space = cert.space
    else:
        space = generic_complement(A, x, sg)
    return A, x, sg, space


@dataclass
class InvariantTraces:
    t: np.ndarray
    names: list
    values: np.ndarray  # (n, len(names))
    result: NormalFormResult


def projective_invariants(c: ProjectiveCurve | FramePath, mode: str = UNPARAMETRIZED) -> InvariantTraces:
    """Wilczynski invariants theta_3..theta_{k+1} (or W-coordinates in parametrized mode)."""
    f = c if isinstance(c, FramePath) else osculating_frame(c)
    k = f.k
    A, x, sg, space = projective_setup(k, mode)
    f = sl_normalize(orient_frame(f))
    kappa = maurer_cartan_pullback(f, A)
    res = reduce_to_normal_form(kappa, x, sg, space.W)
    if mode == UNPARAMETRIZED:
        wm = A.to_matrix_float(res.w)
        xm = A.to_matrix_float(np.array([float(v) for v in x]))
        names, cols = [], []
        for i in range(2, k + 1):
            xi = np.linalg.matrix_power(xm, i)
            names.append(f"θ{i + 1}")
            cols.append(theta_weight(k, i) * np.einsum("nab,ba->n", wm, xi))
        vals = np.stack(cols, axis=1) if cols else np.zeros((len(f.t), 0))
    else:
        names, cols = [], []
        for v in space.W.basis():
            j = next(i for i, c in enumerate(v) if c)
            names.append(A.labels[j])
            cols.append(res.w[:, j] / float(v[j]))
        vals = np.stack(cols, axis=1) if cols else np.zeros((len(f.t), 0))
    return InvariantTraces(f.t, names, vals, res)
