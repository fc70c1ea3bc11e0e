"""Dense two-phase simplex solver for small linear programs.

Problems are stated as ``maximize c @ x`` subject to rows ``a @ x (<=|=|>=) b``
and per-variable bounds. Bland's rule is used for both the entering and the
leaving variable, so the pivot sequence (and therefore the returned point)
is a deterministic function of the input.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NumericalInstability

PIVOT_TOL = 1e-11
COST_TOL = 1e-9
PHASE1_TOL = 1e-8

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = ("<=", "=", ">=")


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``maximize objective @ x`` s.t. ``A[i] @ x  senses[i]  rhs[i]``.

    ``bounds`` holds one ``(lower, upper)`` pair per variable, either side may
    be ``None``. When ``bounds`` is omitted every variable is free.
    """

    objective: np.ndarray
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    bounds: Optional[tuple] = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.shape[0]
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2 or A.shape[1] != n:
            raise DimensionMismatch(f"constraint matrix shape {A.shape} does not match {n} variables")
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        senses = tuple(self.senses)
        if len(senses) != A.shape[0] or rhs.shape[0] != A.shape[0]:
            raise DimensionMismatch("senses/rhs length differs from number of rows")
        bad = [s for s in senses if s not in _SENSES]
        if bad:
            raise ValueError(f"unknown relation {bad[0]!r}")
        bounds = self.bounds
        if bounds is None:
            bounds = ((None, None),) * n
        bounds = tuple((None if lo is None else float(lo), None if hi is None else float(hi)) for lo, hi in bounds)
        if len(bounds) != n:
            raise DimensionMismatch("one bound pair per variable is required")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def from_rows(cls, objective, constraints: Sequence, bounds=None) -> "LpProblem":
        """Build from a list of ``(row, relation, rhs)`` triples."""
        c = np.asarray(objective, dtype=float)
        if constraints:
            rows, senses, rhs = zip(*constraints)
            A = np.array([np.asarray(r, dtype=float) for r in rows])
        else:
            A, senses, rhs = np.zeros((0, c.shape[0])), (), ()
        return cls(c, A, tuple(senses), np.array(rhs, dtype=float), bounds)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def constraints(self):
        return [(self.A[i], self.senses[i], float(self.rhs[i])) for i in range(self.A.shape[0])]

    def max_violation(self, x) -> float:
        """Largest constraint or bound violation at ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        lhs = self.A @ x
        for s, l, r in zip(self.senses, lhs, self.rhs):
            if s == "<=":
                worst = max(worst, l - r)
            elif s == ">=":
                worst = max(worst, r - l)
            else:
                worst = max(worst, abs(l - r))
        for xi, (lo, hi) in zip(x, self.bounds):
            if lo is not None:
                worst = max(worst, lo - xi)
            if hi is not None:
                worst = max(worst, xi - hi)
        return float(worst)


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    value: float = float("nan")
    point: Optional[np.ndarray] = None
    dual_point: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T: np.ndarray, i: int, j: int) -> None:
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])


class _Tableau:
    def __init__(self, T, basis):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def run(self, allowed: np.ndarray, cap: int) -> str:
        T = self.T
        while True:
            d = T[-1, :-1]
            cand = np.flatnonzero((d < -COST_TOL) & allowed)
            if cand.size == 0:
                return OPTIMAL
            j = cand[0]
            col = T[:-1, j]
            pos = np.flatnonzero(col > PIVOT_TOL)
            if pos.size == 0:
                return UNBOUNDED
            ratios = np.maximum(T[pos, -1], 0.0) / col[pos]
            rmin = ratios.min()
            ties = pos[ratios <= rmin + 1e-12 * (1.0 + rmin)]
            i = ties[np.argmin(self.basis[ties])]
            _pivot(T, i, j)
            self.basis[i] = j
            self.iterations += 1
            if self.iterations > cap:
                raise NumericalInstability(f"simplex exceeded {cap} pivots")


def solve(p: LpProblem) -> LpSolution:
    """Solve ``p`` and classify it as optimal, infeasible or unbounded."""
    n = p.n_vars
    # x = shift + M @ y with y >= 0
    cols = []
    shift = np.zeros(n)
    extra_rows = []  # (std column, upper bound)
    for k, (lo, hi) in enumerate(p.bounds):
        if lo is not None:
            shift[k] = lo
            cols.append((k, 1.0))
            if hi is not None:
                extra_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None:
            shift[k] = hi
            cols.append((k, -1.0))
        else:
            cols.append((k, 1.0))
            cols.append((k, -1.0))
    n_std = len(cols)
    M = np.zeros((n, n_std))
    for jj, (k, sgn) in enumerate(cols):
        M[k, jj] = sgn

    A = p.A @ M
    b = p.rhs - p.A @ shift
    senses = list(p.senses)
    if extra_rows:
        E = np.zeros((len(extra_rows), n_std))
        for r, (jj, ub) in enumerate(extra_rows):
            E[r, jj] = 1.0
        A = np.vstack([A, E])
        b = np.concatenate([b, [ub for _, ub in extra_rows]])
        senses += ["<="] * len(extra_rows)
    m = A.shape[0]
    c = M.T @ p.objective

    # normalize so that every row can start from a slack where possible
    flip = np.ones(m)
    for i in range(m):
        s = senses[i]
        if b[i] < 0 or (s == ">=" and b[i] == 0):
            flip[i] = -1.0
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[s]
    A = A * flip[:, None]
    b = b * flip

    n_slack = sum(1 for s in senses if s != "=")
    n_art = sum(1 for s in senses if s != "<=")
    N = n_std + n_slack + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :n_std] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    identity_cols = np.empty(m, dtype=int)
    art_mask = np.zeros(N, dtype=bool)
    si, ai = n_std, n_std + n_slack
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, si] = 1.0
            basis[i] = identity_cols[i] = si
            si += 1
        elif s == ">=":
            T[i, si] = -1.0
            si += 1
            T[i, ai] = 1.0
            basis[i] = identity_cols[i] = ai
            art_mask[ai] = True
            ai += 1
        else:
            T[i, ai] = 1.0
            basis[i] = identity_cols[i] = ai
            art_mask[ai] = True
            ai += 1

    tab = _Tableau(T, basis)
    cap = 10 * (n + m) ** 2 + 50

    if n_art:
        T[-1, :] = 0.0
        T[-1, :-1][art_mask] = 1.0
        for i in np.flatnonzero(art_mask[basis]):
            T[-1] -= T[i]
        tab.run(np.ones(N, dtype=bool), cap)
        if T[-1, -1] < -PHASE1_TOL:
            return LpSolution(INFEASIBLE, iterations=tab.iterations)
        # drive artificial variables out of the basis, dropping redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for i in range(m):
            if art_mask[basis[i]]:
                row = np.abs(T[i, :-1])
                row[art_mask] = 0.0
                j = int(np.argmax(row))
                if row[j] > 1e-9:
                    _pivot(T, i, j)
                    basis[i] = j
                else:
                    keep[i] = False
        if not keep.all():
            T = T[keep]
            basis = basis[keep[:-1]]
            tab.T, tab.basis = T, basis

    T[-1, :] = 0.0
    T[-1, :n_std] = -c
    for i, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[i]
    status = tab.run(~art_mask, cap)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    y = np.zeros(N)
    y[basis] = T[:-1, -1]
    x = shift + M @ y[:n_std]
    value = float(p.objective @ x)

    duals = np.zeros(m)
    for r in range(m):
        duals[r] = T[-1, identity_cols[r]] * flip[r]
    # only rows the caller supplied, not the bound rows we appended
    dual_point = duals[: p.A.shape[0]]
    return LpSolution(OPTIMAL, value, x, dual_point, tab.iterations)
