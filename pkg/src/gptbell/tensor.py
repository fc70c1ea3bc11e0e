"""Bipartite states under the minimal and maximal tensor cones.

A bipartite state is a coefficient matrix ``W`` with
``omega(a, b) = scale_A * scale_B * a @ W @ b``. Product states ``alpha x beta``
have ``W = outer(alpha, beta)``, so ``W`` is the element of ``V_A (x) V_B``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import DimensionMismatch, ValidationError
from .gpt import Effect, StateSpace
from .spaces import polygon, squit

STATE_TOL = 1e-9
MIN = "min"
MAX = "max"


@dataclass(frozen=True, eq=False)
class BipartiteState:
    W: np.ndarray
    space_a: StateSpace
    space_b: StateSpace
    cone_kind: str = MAX

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.shape != (self.space_a.dimension, self.space_b.dimension):
            raise DimensionMismatch(
                f"W has shape {W.shape}, expected {(self.space_a.dimension, self.space_b.dimension)}"
            )
        if self.cone_kind not in (MIN, MAX):
            raise ValidationError(f"cone kind must be 'min' or 'max', got {self.cone_kind!r}")
        object.__setattr__(self, "W", W)

    @property
    def factor(self) -> float:
        return self.space_a.scale * self.space_b.scale

    def __call__(self, a, b) -> float:
        return float(self.factor * (np.asarray(a, dtype=float) @ self.W @ np.asarray(b, dtype=float)))

    def norm(self) -> float:
        return self(self.space_a.order_unit, self.space_b.order_unit)

    def steer(self, b) -> np.ndarray:
        """The (sub)state ``omega_hat(b)`` on A prepared by effect ``b`` on B."""
        return self.space_b.scale * (self.W @ np.asarray(b, dtype=float))

    def is_valid(self, tol: float = STATE_TOL) -> bool:
        if abs(self.norm() - 1.0) > tol:
            return False
        if self.cone_kind == MAX:
            return max_contains(self.space_a, self.space_b, self.W, tol)
        return min_contains(self.space_a, self.space_b, self.W, tol)

    def transposed(self) -> "BipartiteState":
        return BipartiteState(self.W.T.copy(), self.space_b, self.space_a, self.cone_kind)


def product_state(alpha, beta, space_a: StateSpace, space_b: StateSpace) -> BipartiteState:
    return BipartiteState(np.outer(alpha, beta), space_a, space_b, MIN)


def _check_dims(space_a, space_b, W):
    W = np.asarray(W, dtype=float)
    if W.shape != (space_a.dimension, space_b.dimension):
        raise DimensionMismatch(f"W has shape {W.shape}")
    return W


def ray_pair_matrix(space_a: StateSpace, space_b: StateSpace) -> np.ndarray:
    """Rows ``kron(a, b)`` over all dual-ray pairs, scaled to evaluate ``omega(a, b)``."""
    Ra, Rb = space_a.dual_rays, space_b.dual_rays
    rows = np.einsum("ia,jb->ijab", Ra, Rb).reshape(len(Ra) * len(Rb), -1)
    return space_a.scale * space_b.scale * rows


def vertex_pair_matrix(space_a: StateSpace, space_b: StateSpace) -> np.ndarray:
    """Columns ``kron(w_i, w_j)`` over all vertex pairs (product states)."""
    Va, Vb = space_a.vertices, space_b.vertices
    return np.einsum("ia,jb->abij", Va, Vb).reshape(Va.shape[1] * Vb.shape[1], len(Va) * len(Vb))


def max_contains(space_a: StateSpace, space_b: StateSpace, W, tol: float = STATE_TOL) -> bool:
    """Membership in the maximal tensor cone: ``omega(a, b) >= 0`` on all dual-ray pairs."""
    W = _check_dims(space_a, space_b, W)
    return bool((ray_pair_matrix(space_a, space_b) @ W.ravel()).min() >= -tol)


def min_contains(space_a: StateSpace, space_b: StateSpace, W, tol: float = STATE_TOL) -> bool:
    """Membership in the minimal tensor cone, decided by LP feasibility.

    Looks for ``W = sum_ij c_ij outer(w_i, w_j)`` with ``c_ij >= 0`` over vertex
    pairs. Equalities are relaxed to ``tol`` in each coefficient.
    """
    W = _check_dims(space_a, space_b, W)
    P = vertex_pair_matrix(space_a, space_b)
    w = W.ravel()
    n = P.shape[1]
    A = np.vstack([P, -P])
    b = np.concatenate([w + tol, -w + tol])
    prob = lp.LpProblem(np.zeros(n), A, ("<=",) * len(b), b, ((0.0, None),) * n)
    return lp.solve(prob).optimal


def marginal(state: BipartiteState, side: str = "A") -> np.ndarray:
    """Reduced state: ``omega_hat(u_B)`` for side A, the mirror image for side B."""
    if side.upper() == "A":
        return state.space_b.scale * (state.W @ state.space_b.order_unit)
    if side.upper() == "B":
        return state.space_a.scale * (state.W.T @ state.space_a.order_unit)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def steer_decomposition(state: BipartiteState, decomposition, tol: float = 1e-8):
    """Find B-side effects ``b_i`` summing to ``u_B`` with ``omega_hat(b_i) = alpha_i``.

    Returns ``(feasible, effects)``; ``effects`` is a list of :class:`Effect`
    on ``space_b`` when feasible, else ``None``.
    """
    alphas = [np.asarray(a, dtype=float) for a in decomposition]
    if not alphas:
        raise ValidationError("empty decomposition")
    rho = marginal(state, "A")
    if np.abs(sum(alphas) - rho).max() > tol:
        raise ValidationError("decomposition does not sum to the A marginal")
    sa, sb = state.space_a, state.space_b
    da, db = sa.dimension, sb.dimension
    m = len(alphas)
    Wb = sb.scale * state.W
    Vb = sb._vmat
    nv = m * db
    rows, senses, rhs = [], [], []
    for i, a in enumerate(alphas):
        for r in range(da):
            row = np.zeros(nv)
            row[i * db:(i + 1) * db] = Wb[r]
            rows.append(row)
            senses.append("=")
            rhs.append(a[r])
        for k in range(len(Vb)):
            row = np.zeros(nv)
            row[i * db:(i + 1) * db] = -Vb[k]
            rows.append(row)
            senses.append("<=")
            rhs.append(0.0)
    for r in range(db):
        row = np.zeros(nv)
        row[r::db] = 1.0
        rows.append(row)
        senses.append("=")
        rhs.append(sb.order_unit[r])
    sol = lp.solve(lp.LpProblem(np.zeros(nv), np.array(rows), tuple(senses), np.array(rhs)))
    if not sol.optimal:
        return False, None
    bs = sol.point.reshape(m, db)
    return True, [Effect(b, sb) for b in bs]


def maximally_entangled(n: int) -> BipartiteState:
    """The symmetric maximally entangled state on two copies of the ``n``-gon.

    For odd ``n`` the polygon cone is self-dual under the standard pairing and
    ``W`` is the identity. For even ``n`` the dual cone is the state cone
    rotated by ``pi/n``, and ``W`` carries that rotation in its upper block.
    """
    if n < 3:
        raise ValidationError("polygon needs n >= 3")
    P = polygon(n)
    W = np.eye(3)
    if n % 2 == 0:
        c, s = np.cos(np.pi / n), np.sin(np.pi / n)
        W[:2, :2] = [[c, -s], [s, c]]
    return BipartiteState(W, P, P, MAX)


def pr_box() -> BipartiteState:
    """PR box on squit x squit: the squit analogue of :func:`maximally_entangled`."""
    S = squit()
    W = np.eye(3)
    W[:2, :2] = [[0.5, -0.5], [0.5, 0.5]]
    return BipartiteState(W, S, S, MAX)
