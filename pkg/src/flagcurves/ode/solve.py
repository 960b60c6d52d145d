"""Scalar ODEs y^(k+1) = f(x, y, ..., y^(k)): integration, linearization and invariants."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ..duality import (BilinearForm, RankAmbiguity, ThreeForm, find_compatible_bilinear,
                       find_compatible_three_form)
from ..frames import (DegenerateFrame, FramePath, InvariantTraces, frame_from_fundamental,
                      projective_invariants)
from .expr import DomainError, Expr, compile_expr, differentiate, parse_expr

THETA_TOL = 1e-6
CROSS_TOL = 1e-4


@dataclass(frozen=True)
class OdeProblem:
    """y^(order) = f with order = k + 1 >= 3."""
    order: int
    f: Expr

    def __post_init__(self):
        if self.order < 3:
            raise ValueError("order must be at least 3")

    @classmethod
    def parse(cls, order: int, src: str) -> "OdeProblem":
        return cls(order, parse_expr(src, order - 1))

    @property
    def k(self) -> int:
        return self.order - 1

    @cached_property
    def partials(self) -> tuple:
        return tuple(differentiate(self.f, i) for i in range(self.order))

    @cached_property
    def _compiled(self):
        return compile_expr(self.f), [compile_expr(p) for p in self.partials]

    def rhs(self, x: float, ys: Sequence[float]) -> float:
        return float(self._compiled[0](x, ys))

    def coefficients(self, x, ys) -> np.ndarray:
        """(df/dy_0, ..., df/dy_k) at one point, or along arrays."""
        vals = [np.broadcast_to(np.asarray(g(x, ys), dtype=float), np.shape(x)) for g in self._compiled[1]]
        return np.stack(vals, axis=-1)


@dataclass
class SolutionGrid:
    t: np.ndarray
    y: np.ndarray  # (n, k+1): y, y', ..., y^(k)
    phi: np.ndarray | None = None  # (n, k+1, k+1): phi[j, m, i] = z_i^(m)(t_j)


def _check_finite(state: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(state)):
        raise FloatingPointError(f"non-finite state at t = {t:.6g}")


def integrate_ode(p: OdeProblem, init: Sequence[float], t: np.ndarray, fundamental: bool = False) -> SolutionGrid:
    """Classical RK4 on the fixed grid ``t``; optionally the fundamental matrix of the linearization.

    The fundamental system starts from identity jets at t[0].
    """
    t = np.asarray(t, dtype=float)
    n, m = len(t), p.order
    y = np.empty((n, m))
    y[0] = np.asarray(init, dtype=float)
    if y.shape[1] != len(init):
        raise ValueError(f"need {m} initial values")
    phi = np.empty((n, m, m)) if fundamental else None
    if fundamental:
        phi[0] = np.eye(m)

    def field_(x, s):
        ys, Z = s[:m], s[m:].reshape(m, m) if fundamental else None
        dy = np.empty(m)
        dy[:-1] = ys[1:]
        dy[-1] = p.rhs(x, ys)
        if not fundamental:
            return dy
        dZ = np.empty((m, m))
        dZ[:-1] = Z[1:]
        dZ[-1] = p.coefficients(x, ys) @ Z
        return np.concatenate([dy, dZ.ravel()])

    state = y[0] if not fundamental else np.concatenate([y[0], phi[0].ravel()])
    with np.errstate(all="ignore"):
        for j in range(n - 1):
            h = t[j + 1] - t[j]
            x = t[j]
            k1 = field_(x, state)
            k2 = field_(x + h / 2, state + h / 2 * k1)
            k3 = field_(x + h / 2, state + h / 2 * k2)
            k4 = field_(x + h, state + h * k3)
            state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            _check_finite(state, t[j + 1])
            y[j + 1] = state[:m]
            if fundamental:
                phi[j + 1] = state[m:].reshape(m, m)
    return SolutionGrid(t, y, phi)


@dataclass
class LinearizationPath:
    t: np.ndarray
    y: np.ndarray
    p: np.ndarray  # (n, k+1)


def linearize(p: OdeProblem, sol: SolutionGrid) -> LinearizationPath:
    with np.errstate(all="ignore"):
        coeffs = p.coefficients(sol.t, [sol.y[:, i] for i in range(p.order)])
    if not np.all(np.isfinite(coeffs)):
        raise DomainError("linearization coefficients are not finite along the solution")
    return LinearizationPath(sol.t, sol.y, coeffs)


def fundamental_frame(p: OdeProblem, sol: SolutionGrid) -> FramePath:
    if sol.phi is None:
        raise ValueError("solution was integrated without the fundamental matrix")
    lin = linearize(p, sol)
    return frame_from_fundamental(sol.t, sol.phi, lin.p)


def generalized_wilczynski(p: OdeProblem, sol: SolutionGrid) -> InvariantTraces:
    """Theta_3..Theta_{k+1} along the base solution, named "Θ3"..."""
    traces = projective_invariants(fundamental_frame(p, sol))
    traces.names = [n.replace("θ", "Θ") for n in traces.names]
    return traces


# ---------------------------------------------------------------------------
# structure verdict
# ---------------------------------------------------------------------------

CONFORMAL, SYMPLECTIC, G2, NONE = "conformal", "symplectic", "g2", "none"


@dataclass
class StructureVerdict:
    kind: str
    theta_max: dict
    structure: BilinearForm | ThreeForm | None
    solutions: int
    cross_deviation: float | None = None
    notes: list = field(default_factory=list)
    traces: InvariantTraces | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind,
                "theta_max": {k: float(v) for k, v in self.theta_max.items()},
                "structure": None if self.structure is None else self.structure.to_json(),
                "structure_type": type(self.structure).__name__ if self.structure is not None else None,
                "solutions": self.solutions,
                "cross_deviation": self.cross_deviation,
                "notes": list(self.notes)}


def default_initial_conditions(order: int, count: int, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [0.5 * rng.standard_normal(order) for _ in range(count)]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _projective_distance(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _unit(a.ravel()), _unit(b.ravel())
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def _recover(kind: str, frame: FramePath):
    if kind == G2:
        return find_compatible_three_form(frame)
    return find_compatible_bilinear(frame)


def _transport(kind: str, form, N: np.ndarray) -> np.ndarray:
    """Components of the form in coordinates where the old curve point is N v."""
    if kind == G2:
        return np.einsum("abc,ai,bj,ck->ijk", form.tensor(), N, N, N)
    return N.T @ form.matrix @ N


def _components(kind: str, form) -> np.ndarray:
    return form.tensor() if kind == G2 else form.matrix


def structure_verdict(p: OdeProblem, t: np.ndarray, inits: Sequence[Sequence[float]] | None = None,
                      tol: float = THETA_TOL, cross_tol: float = CROSS_TOL) -> StructureVerdict:
    """Decide which natural structure the solution space carries.

    Odd Theta vanishing gives a conformal (odd dimension) or symplectic (even
    dimension) structure; for order 7 the extra vanishing of Theta_4 gives G2.
    The form is recovered at the first base solution and cross-checked by
    re-integrating from the midpoint of the grid with fresh identity jets.
    """
    t = np.asarray(t, dtype=float)
    inits = default_initial_conditions(p.order, 3) if inits is None else [np.asarray(i, float) for i in inits]
    if len(inits) < 3:
        raise ValueError("need at least 3 base solutions")
    sols, maxima, first = [], {}, None
    for init in inits:
        sol = integrate_ode(p, init, t, fundamental=True)
        tr = generalized_wilczynski(p, sol)
        if first is None:
            first = tr
        for name, col in zip(tr.names, tr.values.T):
            maxima[name] = max(maxima.get(name, 0.0), float(np.max(np.abs(col))))
        sols.append(sol)

    def small(i: int) -> bool:
        return maxima.get(f"Θ{i}", 0.0) <= tol

    odd_ok = all(small(i) for i in range(3, p.order + 1, 2))
    candidates = []
    if p.order == 7 and all(small(i) for i in (3, 4, 5, 7)):
        candidates.append(G2)
    if odd_ok:
        candidates.append(CONFORMAL if p.order % 2 == 1 else SYMPLECTIC)
    notes = []
    for kind in candidates:
        try:
            forms = [_recover(kind, fundamental_frame(p, s)) for s in sols]
        except (RankAmbiguity, DegenerateFrame) as exc:
            notes.append(f"{kind}: {exc}")
            continue
        if any(f is None for f in forms):
            notes.append(f"{kind}: no compatible form at some base solution")
            continue
        base = forms[0]
        parity_ok = kind == G2 or base.parity == ("symmetric" if kind == CONFORMAL else "skew")
        if not parity_ok:
            notes.append(f"{kind}: recovered form has parity {base.parity}")
            continue
        dev = _cross_check(p, sols[0], kind, base)
        if dev is None or dev > cross_tol:
            notes.append(f"{kind}: cross-check deviation {dev}")
            continue
        return StructureVerdict(kind, maxima, base, len(sols), dev, notes, first)
    return StructureVerdict(NONE, maxima, None, len(sols), None, notes, first)


def _cross_check(p: OdeProblem, sol: SolutionGrid, kind: str, form) -> float | None:
    """Recover the form on the second half of the grid in t1-normalized coordinates and compare."""
    mid = len(sol.t) // 2
    t2 = sol.t[mid:]
    if len(t2) < max(16, p.order ** 2):
        return None
    sol2 = integrate_ode(p, sol.y[mid], t2, fundamental=True)
    try:
        other = _recover(kind, fundamental_frame(p, sol2))
    except (RankAmbiguity, DegenerateFrame):
        return None
    if other is None:
        return None
    # new solutions z1 = z0 phi(t1)^-1 have identity jets at t1, so old curve points are phi(t1)^T times new ones
    return _projective_distance(_transport(kind, form, sol.phi[mid].T), _components(kind, other))
