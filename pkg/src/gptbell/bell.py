"""CHSH functional, smearing identities and generalized Tsirelson bounds.

Observables are given by their ``+1`` effect, so ``A = 2*plus - u``. The
Tsirelson search enumerates quadruples of catalog effects and solves one LP
over the chosen tensor cone per quadruple; for fixed ``W`` the functional is
multilinear in the four effects, so the joint optimum sits at catalog
vertices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .errors import CapExceeded, DimensionMismatch, ValidationError
from .gpt import (
    DichotomicObservable,
    Effect,
    StateSpace,
    complement,
    dual_program,
    lambda_ef,
    lambda_opt,
    t_ef,
)
from .tensor import MAX, MIN, BipartiteState, ray_pair_matrix, vertex_pair_matrix

LP_CAP = 10 ** 6
MATCH_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ChshSetting:
    a1: DichotomicObservable
    a2: DichotomicObservable
    b1: DichotomicObservable
    b2: DichotomicObservable

    @classmethod
    def from_effects(cls, a1, a2, b1, b2) -> "ChshSetting":
        return cls(*(DichotomicObservable(e) for e in (a1, a2, b1, b2)))

    def matrix(self) -> np.ndarray:
        """``C`` such that the Bell value is ``scale_A * scale_B * sum(W * C)``."""
        A1, A2 = self.a1.functional, self.a2.functional
        B1, B2 = self.b1.functional, self.b2.functional
        return np.outer(A1, B1 + B2) + np.outer(A2, B1 - B2)

    def to_dict(self) -> dict:
        return {k: [float(x) for x in getattr(self, k).plus.functional] for k in ("a1", "a2", "b1", "b2")}


@dataclass
class BellReport:
    bell_value: float
    bound_unbiased: float
    bound_biased: float = float("nan")
    tsirelson: float = float("nan")
    argmax_setting: Optional[ChshSetting] = None
    argmax_state: Optional[BipartiteState] = None
    argmax_indices: Optional[tuple] = None
    lp_count: int = 0

    def to_dict(self) -> dict:
        return {
            "bell_value": self.bell_value,
            "bound_unbiased": self.bound_unbiased,
            "bound_biased": self.bound_biased,
            "tsirelson": self.tsirelson,
            "argmax_effects": None if self.argmax_setting is None else self.argmax_setting.to_dict(),
            "argmax_indices": None if self.argmax_indices is None else list(self.argmax_indices),
            "argmax_W": None if self.argmax_state is None else self.argmax_state.W.tolist(),
            "lp_count": self.lp_count,
        }


def _check_setting(state: BipartiteState, s: ChshSetting):
    da, db = state.space_a.dimension, state.space_b.dimension
    if any(o.space.dimension != da for o in (s.a1, s.a2)) or any(o.space.dimension != db for o in (s.b1, s.b2)):
        raise DimensionMismatch("setting does not match the state's spaces")


def bell_value(state: BipartiteState, s: ChshSetting) -> float:
    """``<A1 B1 + A1 B2 + A2 B1 - A2 B2>`` in ``state``."""
    _check_setting(state, s)
    return float(state.factor * np.sum(state.W * s.matrix()))


def expectation_b(state: BipartiteState, obs: DichotomicObservable) -> float:
    """``<B>`` for a B-side observable, i.e. ``omega(u_A, B)``."""
    return state(state.space_a.order_unit, obs.functional)


def smeared_bell(state: BipartiteState, s: ChshSetting, lam: float, p: float = 0.5) -> float:
    """Bell value with both A-side ``+1`` effects replaced by their ``(lam, p)`` smearing."""
    from .gpt import smear

    smeared = ChshSetting(
        DichotomicObservable(smear(s.a1.plus, lam, p)),
        DichotomicObservable(smear(s.a2.plus, lam, p)),
        s.b1,
        s.b2,
    )
    return bell_value(state, smeared)


class _ConeLP:
    """Constraint system of the Bell-maximization LP over one tensor cone.

    Only the objective changes between settings, so rows are built once.
    """

    def __init__(self, space_a: StateSpace, space_b: StateSpace, cone_kind: str):
        if cone_kind not in (MIN, MAX):
            raise ValidationError(f"cone kind must be 'min' or 'max', got {cone_kind!r}")
        self.space_a, self.space_b, self.cone_kind = space_a, space_b, cone_kind
        self.factor = space_a.scale * space_b.scale
        da, db = space_a.dimension, space_b.dimension
        uu = self.factor * np.kron(space_a.order_unit, space_b.order_unit)
        if cone_kind == MAX:
            R = ray_pair_matrix(space_a, space_b)
            self.A = np.vstack([R, uu])
            self.senses = (">=",) * len(R) + ("=",)
            self.rhs = np.concatenate([np.zeros(len(R)), [1.0]])
            self.bounds = None
        else:
            # variables are weights on vertex-pair product states
            self.P = vertex_pair_matrix(space_a, space_b)
            n = self.P.shape[1]
            self.A = np.ones((1, n))
            self.senses = ("=",)
            self.rhs = np.array([1.0])
            self.bounds = ((0.0, None),) * n
        self.shape = (da, db)

    def solve(self, C: np.ndarray):
        c = self.factor * C.ravel()
        if self.cone_kind == MAX:
            sol = lp.solve(lp.LpProblem(c, self.A, self.senses, self.rhs, self.bounds))
            W = sol.point.reshape(self.shape)
        else:
            sol = lp.solve(lp.LpProblem(self.P.T @ c, self.A, self.senses, self.rhs, self.bounds))
            W = (self.P @ sol.point).reshape(self.shape)
        if not sol.optimal:  # pragma: no cover - product states are always feasible
            raise RuntimeError(f"Bell LP returned {sol.status}")
        return sol.value, W


def max_bell_fixed_setting(space_a: StateSpace, space_b: StateSpace, s: ChshSetting, cone_kind: str = MAX):
    """Largest Bell value over normalized states of the given cone for a fixed setting.

    Returns ``(value, state)``.
    """
    value, W = _ConeLP(space_a, space_b, cone_kind).solve(s.matrix())
    return value, BipartiteState(W, space_a, space_b, cone_kind)


def _setting_indices(space_a: StateSpace, space_b: StateSpace, symmetry: bool):
    na, nb = len(space_a.extreme_effects), len(space_b.extreme_effects)
    if symmetry:
        reps_a = [orb[0] for orb in space_a.effect_orbits()]
        reps_b = [orb[0] for orb in space_b.effect_orbits()]
    else:
        reps_a, reps_b = range(na), range(nb)
    for i in reps_a:
        for j in range(na):
            for k in reps_b:
                for l in range(nb):
                    yield i, j, k, l


def count_settings(space_a: StateSpace, space_b: StateSpace, symmetry: bool = False) -> int:
    na, nb = len(space_a.extreme_effects), len(space_b.extreme_effects)
    if symmetry:
        return len(space_a.effect_orbits()) * na * len(space_b.effect_orbits()) * nb
    return na * na * nb * nb


def tsirelson_bound(
    space_a: StateSpace,
    space_b: StateSpace,
    cone_kind: str = MAX,
    symmetry: bool = False,
    cap: int = LP_CAP,
    jobs: int = 1,
) -> BellReport:
    """Maximize the Bell functional over catalog-effect settings and the chosen cone.

    ``symmetry=True`` restricts ``A1`` and ``B1`` to one representative per
    orbit of each space's symmetry group; each local symmetry is an order
    automorphism, so the optimum is unchanged. The argmax is the
    lexicographically first maximizing index quadruple of the enumeration.
    """
    if space_a.extreme_effects is None or space_b.extreme_effects is None:
        raise ValidationError("both spaces need an enumerated effect catalog")
    total = count_settings(space_a, space_b, symmetry)
    if total > cap:
        raise CapExceeded(f"{total} LPs exceed the cap of {cap}")
    Ea, Eb = space_a.extreme_effects, space_b.extreme_effects
    ua, ub = space_a.order_unit, space_b.order_unit
    Oa, Ob = 2 * Ea - ua, 2 * Eb - ub
    cone = _ConeLP(space_a, space_b, cone_kind)

    quads = list(_setting_indices(space_a, space_b, symmetry))
    values = _solve_quads(cone, Oa, Ob, quads, jobs)

    best_val, best_idx = -np.inf, None
    for q, v in zip(quads, values):
        if v > best_val + 1e-9:
            best_val, best_idx = v, q
    i, j, k, l = best_idx
    setting = ChshSetting.from_effects(
        Effect(Ea[i], space_a), Effect(Ea[j], space_a), Effect(Eb[k], space_b), Effect(Eb[l], space_b)
    )
    val, W = cone.solve(setting.matrix())
    state = BipartiteState(W, space_a, space_b, cone_kind)
    lam_a = lambda_opt(space_a, full_table=False).value
    return BellReport(
        bell_value=float(val),
        bound_unbiased=2.0 / lam_a,
        tsirelson=float(val),
        argmax_setting=setting,
        argmax_state=state,
        argmax_indices=best_idx,
        lp_count=len(quads),
    )


def _solve_chunk(args):
    cone, Oa, Ob, quads = args
    out = []
    cache = {}
    for i, j, k, l in quads:
        C = np.outer(Oa[i], Ob[k] + Ob[l]) + np.outer(Oa[j], Ob[k] - Ob[l])
        key = np.round(C, 12).tobytes()
        if key not in cache:
            cache[key] = cone.solve(C)[0]
        out.append(cache[key])
    return out


def _solve_quads(cone, Oa, Ob, quads, jobs):
    if jobs <= 1 or len(quads) < 2000:
        return _solve_chunk((cone, Oa, Ob, quads))
    from concurrent.futures import ProcessPoolExecutor

    size = -(-len(quads) // jobs)
    chunks = [(cone, Oa, Ob, quads[s:s + size]) for s in range(0, len(quads), size)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(_solve_chunk, chunks))
    return [v for part in parts for v in part]


def incompat_bound(space: StateSpace) -> float:
    """``2 / lambda_opt``: the Bell bound from the most incompatible pair."""
    return 2.0 / lambda_opt(space, full_table=False).value


def biased_bound(lambda_bar: float, exp_b1: float) -> float:
    """Bound from biased smearing: ``2 [1 - (1 - lambda_bar) <B1>] / lambda_bar``."""
    if lambda_bar == 0:
        raise ValidationError("lambda_bar must be positive")
    if not 0.0 < lambda_bar <= 1.0:
        raise ValidationError(f"lambda_bar {lambda_bar} outside (0, 1]")
    return 2.0 * (1.0 - (1.0 - lambda_bar) * exp_b1) / lambda_bar


def best_state_setting(state: BipartiteState, ray_only: bool = False):
    """Largest Bell value of a fixed state over catalog-effect settings.

    With ``ray_only`` the four ``+1`` effects are restricted to the space's
    dual rays. Returns ``(value, setting)``.
    """
    sa, sb = state.space_a, state.space_b
    Ea = sa.dual_rays if ray_only else sa.extreme_effects
    Eb = sb.dual_rays if ray_only else sb.extreme_effects
    Oa, Ob = 2 * Ea - sa.order_unit, 2 * Eb - sb.order_unit
    # M[i, k] = omega(A_i, B_k)
    M = state.factor * Oa @ state.W @ Ob.T
    # value(i, j, k, l) = M[i,k] + M[i,l] + M[j,k] - M[j,l]
    vals = M[:, None, :, None] + M[:, None, None, :] + M[None, :, :, None] - M[None, :, None, :]
    flat = int(np.argmax(vals))
    i, j, k, l = np.unravel_index(flat, vals.shape)
    setting = ChshSetting.from_effects(Effect(Ea[i], sa), Effect(Ea[j], sa), Effect(Eb[k], sb), Effect(Eb[l], sb))
    return float(vals[i, j, k, l]), setting


@dataclass
class SaturationResult:
    achieved: float
    state: BipartiteState
    setting: ChshSetting
    lam: float
    t: float
    dual_value: float
    bound: float
    theorem_value: float
    saturated: bool
    heuristic: bool = False
    refinement: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "achieved": self.achieved,
            "lambda": self.lam,
            "t": self.t,
            "dual_value": self.dual_value,
            "bound": self.bound,
            "theorem_value": self.theorem_value,
            "saturated": self.saturated,
            "heuristic": self.heuristic,
            "setting": self.setting.to_dict(),
            "W": self.state.W.tolist(),
        }


def _effect_lp(space: StateSpace, weights: np.ndarray):
    """Minimize ``weights @ v`` over the effect polytope of ``space``."""
    Vm = space._vmat
    A = np.vstack([Vm, -Vm])
    b = np.concatenate([np.ones(len(Vm)), np.zeros(len(Vm))])
    sol = lp.solve(lp.LpProblem(-weights, A, ("<=",) * len(b), b))
    return sol.point


def saturation_construction(space: StateSpace, e: Effect, f: Effect, restarts: int = 20, seed: int = 0) -> SaturationResult:
    """Instance check of the steering construction on ``space x_max space``.

    A-side observables are ``A1 = u - 2f`` and ``A2 = 2e - u``. B-side
    observables ``B1 = u - 2e~``, ``B2 = u - 2f~`` range over catalog pairs,
    and the state over the maximal cone. If the best value misses
    ``2 / lambda_ef`` the search continues with alternating maximization
    (state LP, then effect LPs over the whole effect polytope) and the result
    is flagged heuristic.
    """
    lam, _ = lambda_ef(e, f)
    t, _ = t_ef(e, f)
    dual_value = dual_program(e, f)[0]
    bound = 2.0 / lam
    theorem_value = 2.0 * (2.0 * t + 1.0)
    a1, a2 = complement(f), e
    cone = _ConeLP(space, space, MAX)
    E = space.extreme_effects
    best = (-np.inf, None, None)
    for k, l in itertools.product(range(len(E)), repeat=2):
        s = ChshSetting.from_effects(a1, a2, complement(Effect(E[k], space)), complement(Effect(E[l], space)))
        val, W = cone.solve(s.matrix())
        if val > best[0] + 1e-9:
            best = (val, W, s)
    val, W, s = best
    heuristic = False
    trace = []
    if abs(val - bound) > MATCH_TOL:
        heuristic = True
        rng = np.random.default_rng(seed)
        A1, A2 = DichotomicObservable(a1).functional, DichotomicObservable(a2).functional
        u = space.order_unit
        for _ in range(restarts):
            w = rng.dirichlet(np.ones(len(E)), size=2)
            et, ft = w @ E
            local = (-np.inf, None, None)
            for _ in range(50):
                st = ChshSetting.from_effects(a1, a2, Effect(u - et, space), Effect(u - ft, space))
                v, Wc = cone.solve(st.matrix())
                if v <= local[0] + 1e-10:
                    break
                local = (v, Wc, st)
                # B = const - 2 omega(A1 + A2, e~) - 2 omega(A1 - A2, f~)
                et = _effect_lp(space, space.scale ** 2 * (A1 + A2) @ Wc)
                ft = _effect_lp(space, space.scale ** 2 * (A1 - A2) @ Wc)
            trace.append(local[0])
            if local[0] > val + 1e-9:
                val, W, s = local
    state = BipartiteState(W, space, space, MAX)
    return SaturationResult(
        achieved=float(val),
        state=state,
        setting=s,
        lam=float(lam),
        t=float(t),
        dual_value=float(dual_value),
        bound=float(bound),
        theorem_value=float(theorem_value),
        saturated=abs(val - bound) <= MATCH_TOL,
        heuristic=heuristic,
        refinement=trace,
    )
