"""Curves compatible with bilinear forms or G2 three-forms, and binary cubics.

A curve in P^k is self-dual when some nondegenerate form b makes its
osculating flag isotropic: b(v_a, v_c) = 0 whenever a + c <= k - 1.  In P^6
the analogous G2 condition asks for a 3-form Omega in the open split orbit
with Omega(v_0, v_2, .) = 0 along the curve.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import build_g2
from .frames import FramePath, ProjectiveCurve, osculating_frame
from .normalization import image_part, invariant_complement_certificate, nonneg_degrees
from .octonions import interior, wedge
from .structure import h1_plus, symmetry_algebra

RANK_RATIO = 1e6
NONDEG_RATIO = 1e-6
PARITY_TOL = 1e-8

TRIPLES = tuple(itertools.combinations(range(7), 3))


class RankAmbiguity(ArithmeticError):
    """Kernel of a compatibility system has dimension > 1."""


def numerical_kernel(M: np.ndarray, ratio: float = RANK_RATIO) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal kernel basis (rows) decided by a singular-value gap, plus all singular values."""
    rows, n = M.shape
    _, sv, vt = np.linalg.svd(M, full_matrices=True)
    top = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > top / ratio)) if top > 0 else 0
    return vt[rank:], sv


def _fix_sign(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    lead = np.flatnonzero(np.abs(v) > 1e-8 * np.max(np.abs(v)))[0]
    return v if v[lead] > 0 else -v


def _frame(c: ProjectiveCurve | FramePath) -> FramePath:
    return c if isinstance(c, FramePath) else osculating_frame(c)


def whitening(f: FramePath) -> np.ndarray:
    """G = (sum_j v0 v0^T)^(-1/2).

    Forms are solved for in the coordinates G v and pulled back; this keeps the
    rank decision meaningful when the curve's coordinates differ wildly in scale.
    """
    v0 = f.s[:, :, 0]
    w, U = np.linalg.eigh(v0.T @ v0)
    # roundoff can push the smallest eigenvalue of a nearly singular Gram matrix to <= 0
    if not w[0] > 0:
        raise RankAmbiguity("sampled curve points are numerically dependent; the grid is too short")
    return U @ np.diag(w ** -0.5) @ U.T


# ---------------------------------------------------------------------------
# bilinear forms
# ---------------------------------------------------------------------------

@dataclass
class BilinearForm:
    matrix: np.ndarray
    parity: str  # symmetric | skew | mixed
    nondegenerate: bool
    condition: float
    residual: float = 0.0

    @classmethod
    def from_matrix(cls, b: np.ndarray, residual: float = 0.0) -> "BilinearForm":
        b = np.asarray(b, dtype=float)
        scale = np.linalg.norm(b)
        if np.linalg.norm(b - b.T) <= PARITY_TOL * scale:
            parity = "symmetric"
        elif np.linalg.norm(b + b.T) <= PARITY_TOL * scale:
            parity = "skew"
        else:
            parity = "mixed"
        sv = np.linalg.svd(b, compute_uv=False)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
        return cls(b, parity, bool(sv[-1] > NONDEG_RATIO * sv[0]), cond, residual)

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist(), "parity": self.parity,
                "nondegenerate": self.nondegenerate, "condition": self.condition,
                "residual": self.residual}


def isotropy_pairs(k: int) -> list[tuple[int, int]]:
    return [(a, c) for a in range(k) for c in range(k) if a + c <= k - 1]


def bilinear_residual(b: np.ndarray, f: FramePath) -> float:
    """max over nodes and pairs of |b(v_a, v_c)| / (|b| |v_a| |v_c|)."""
    worst = 0.0
    nb = np.linalg.norm(b)
    for a, c in isotropy_pairs(f.k):
        va, vc = f.s[:, :, a], f.s[:, :, c]
        val = np.abs(np.einsum("ni,ij,nj->n", va, b, vc))
        den = nb * np.linalg.norm(va, axis=1) * np.linalg.norm(vc, axis=1)
        worst = max(worst, float(np.max(val / den)))
    return worst


def find_compatible_bilinear(c: ProjectiveCurve | FramePath, ratio: float = RANK_RATIO) -> BilinearForm | None:
    """The form making the osculating flag isotropic, if it is unique and nondegenerate.

    Raises RankAmbiguity when the solution space has dimension > 1.
    """
    f = _frame(c)
    k = f.k
    n = k + 1
    if len(f.t) < n * n:
        raise ValueError(f"need at least {n * n} grid nodes")
    G = whitening(f)
    sw = np.einsum("ij,njk->nik", G, f.s)
    blocks = []
    for a, cc in isotropy_pairs(k):
        blocks.append(np.einsum("ni,nj->nij", sw[:, :, a], sw[:, :, cc]).reshape(len(f.t), n * n))
    M = np.concatenate(blocks)
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    ker, _ = numerical_kernel(M, ratio)
    if len(ker) > 1:
        raise RankAmbiguity(f"compatible bilinear forms span {len(ker)} dimensions")
    if len(ker) == 0:
        return None
    b = _fix_sign((G.T @ ker[0].reshape(n, n) @ G).ravel()).reshape(n, n)
    form = BilinearForm.from_matrix(b, bilinear_residual(b, f))
    return form if form.nondegenerate else None


# ---------------------------------------------------------------------------
# three-forms on R^7
# ---------------------------------------------------------------------------

def three_form_dict(coeffs: np.ndarray) -> dict:
    return {I: float(c) for I, c in zip(TRIPLES, coeffs) if c != 0.0}


def derived_bilinear(coeffs: np.ndarray) -> np.ndarray:
    """B with i_{e_a} Omega ^ i_{e_b} Omega ^ Omega = B_ab vol."""
    om = three_form_dict(coeffs)
    eye = np.eye(7)
    contr = [interior(eye[a], om) for a in range(7)]
    B = np.zeros((7, 7))
    for a in range(7):
        for b in range(a, 7):
            B[a, b] = B[b, a] = wedge(wedge(contr[a], contr[b]), om).get(tuple(range(7)), 0.0)
    return B


@dataclass
class ThreeForm:
    coefficients: np.ndarray  # over TRIPLES
    B: np.ndarray
    signature: tuple  # (positive, negative, zero)
    residual: float = 0.0

    @classmethod
    def from_coefficients(cls, coeffs: np.ndarray, residual: float = 0.0) -> "ThreeForm":
        coeffs = np.asarray(coeffs, dtype=float)
        B = derived_bilinear(coeffs)
        ev = np.linalg.eigvalsh(B)
        cut = NONDEG_RATIO * max(np.max(np.abs(ev)), 1e-300)
        sig = (int(np.sum(ev > cut)), int(np.sum(ev < -cut)), int(np.sum(np.abs(ev) <= cut)))
        return cls(coeffs, B, sig, residual)

    @property
    def nondegenerate(self) -> bool:
        return self.signature[2] == 0

    @property
    def split(self) -> bool:
        """Nondegenerate with signature (3,4) or (4,3): the split open orbit."""
        return self.nondegenerate and abs(self.signature[0] - self.signature[1]) == 1

    def tensor(self) -> np.ndarray:
        T = np.zeros((7, 7, 7))
        for I, c in zip(TRIPLES, self.coefficients):
            for perm in itertools.permutations(range(3)):
                sign = np.linalg.det(np.eye(3)[list(perm)])
                T[tuple(I[p] for p in perm)] = sign * c
        return T

    def to_json(self) -> dict:
        return {"coefficients": {"".join(map(str, I)): float(c) for I, c in zip(TRIPLES, self.coefficients)},
                "B": self.B.tolist(), "signature": list(self.signature), "split": self.split,
                "residual": self.residual}


def _contraction_rows(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rows over TRIPLES of Omega(u, v, e_m), m = 0..6, for a batch of (u, v)."""
    n = u.shape[0]
    out = np.zeros((n, 7, len(TRIPLES)))
    for col, I in enumerate(TRIPLES):
        for pos, m in enumerate(I):
            p, q = [i for i in I if i != m]
            out[:, m, col] = (-1) ** pos * (u[:, p] * v[:, q] - u[:, q] * v[:, p])
    return out.reshape(7 * n, len(TRIPLES))


def find_compatible_three_form(c: ProjectiveCurve | FramePath, ratio: float = RANK_RATIO) -> ThreeForm | None:
    """Omega with Omega(v0, v2, .) = 0 along a curve in P^6, if it lies in the split orbit."""
    f = _frame(c)
    if f.k != 6:
        raise ValueError("three-form compatibility needs a curve in P^6")
    G = whitening(f)
    s = np.einsum("ij,njk->nik", G, f.s)
    M = _contraction_rows(s[:, :, 0], s[:, :, 2])
    norms = np.linalg.norm(M, axis=1)
    M = M[norms > 0] / norms[norms > 0, None]
    ker, _ = numerical_kernel(M, ratio)
    if len(ker) > 1:
        raise RankAmbiguity(f"compatible three-forms span {len(ker)} dimensions")
    if len(ker) == 0:
        return None
    resid = float(np.max(np.abs(M @ ker[0])))
    T = np.einsum("abc,ai,bj,ck->ijk", ThreeForm.from_coefficients(ker[0]).tensor(), G, G, G)
    form = ThreeForm.from_coefficients(_fix_sign(np.array([T[I] for I in TRIPLES])), resid)
    return form if form.split else None


# ---------------------------------------------------------------------------
# binary cubics
# ---------------------------------------------------------------------------

def classify_cubic(coeffs, tol: float = 1e-9) -> int:
    """GL(2)-orbit of the binary cubic c0 + c1 t + c2 t^2 + c3 t^3.

    1: triple root, 2: double root, 3: one real and two complex roots,
    4: three distinct real roots.  A vanishing c3 is a root at infinity.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (4,):
        raise ValueError("a cubic has 4 coefficients")
    scale = np.max(np.abs(c))
    if scale == 0:
        raise ValueError("zero polynomial")
    d, cc, b, a = c / scale
    disc = b * b * cc * cc - 4 * a * cc ** 3 - 4 * b ** 3 * d - 27 * a * a * d * d + 18 * a * b * cc * d
    if disc > tol:
        return 4
    if disc < -tol:
        return 3
    hessian = (b * b - 3 * a * cc, b * cc - 9 * a * d, cc * cc - 3 * b * d)
    return 1 if max(abs(h) for h in hessian) <= np.sqrt(tol) else 2


# ---------------------------------------------------------------------------
# G2 case reports
# ---------------------------------------------------------------------------

G2_CASES = {
    "B-nondeg": ("B", {"X_{-α1}": 1, "X_{-α2}": 1}),
    "P2-orbit2": ("P2", {"X_{-α1-α2}": 1}),
    "P2-orbit3": ("P2", {"X_{-α1}": 1, "X_{-α1-3α2}": 1}),
    "P2-orbit4": ("P2", {"X_{-α1-α2}": 1, "X_{-α1-2α2}": 1}),
}


@dataclass
class G2CaseReport:
    case: str
    parabolic: str
    x: dict
    sg_dims: dict
    sg_labels: list
    reductive: bool
    codim: int
    codim_by_degree: dict
    W_labels: list
    W_dims: dict
    invariant: bool
    construction: str
    h1_plus: int

    def to_json(self) -> dict:
        return {"case": self.case, "parabolic": self.parabolic, "x": self.x,
                "sg": {"dim": sum(self.sg_dims.values()),
                       "graded_dims": {str(d): n for d, n in sorted(self.sg_dims.items())},
                       "labels": self.sg_labels, "reductive": self.reductive},
                "codim": self.codim,
                "codim_by_degree": {str(d): n for d, n in sorted(self.codim_by_degree.items())},
                "W": {"dim": len(self.W_labels), "labels": self.W_labels,
                      "graded_dims": {str(d): n for d, n in sorted(self.W_dims.items())},
                      "invariant": self.invariant, "construction": self.construction},
                "h1_plus": self.h1_plus}


def g2_case_report(case: str) -> G2CaseReport:
    if case not in G2_CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(G2_CASES)}")
    parabolic, xspec = G2_CASES[case]
    A = build_g2(parabolic)
    x = A.element(xspec).coefficients
    sg = symmetry_algebra(A, x)
    codim = {}
    for d in nonneg_degrees(A):
        miss = len(A.indices(d)) - len(image_part(A, x, sg, d))
        if miss:
            codim[d] = miss
    cert = invariant_complement_certificate(A, x, sg)
    if cert.space is None:
        raise ArithmeticError(f"no invariant complement for {case}: {cert.reason}")
    W = cert.space.W
    return G2CaseReport(case, parabolic, dict(xspec), sg.graded_dims(), sg.labels(), sg.reductive_flag,
                        sum(codim.values()), codim, W.labels(), W.graded_dims(),
                        cert.space.invariant_flag, cert.space.construction,
                        h1_plus(A, [x], sg).dimension)
