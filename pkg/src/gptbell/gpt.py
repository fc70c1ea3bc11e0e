"""Effects, dichotomic observables, smearing and joint measurability.

All four incompatibility programs are cone-linear: positivity of a functional
on the state space is imposed as nonnegativity on each vertex, which turns
them into ordinary LPs for :mod:`gptbell.lp`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .errors import DimensionMismatch, NotAnEffectError, ValidationError
from .geometry import ConePair, as_vector, evaluate

EFFECT_TOL = 1e-9
MATCH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StateSpace:
    """A polytopic state space.

    Parameters
    ----------
    name : str
    vertices : (k, d) array
        Extreme states.
    dual_rays : (r, d) array
        Extremal rays of the dual cone; a vector ``v`` lies in the state cone
        iff ``dual_rays @ v >= 0``.
    order_unit : (d,) array
    scale : float
        Functionals act on vectors as ``scale * (functional @ vector)``.
    extreme_effects : (m, d) array, optional
        Vertices of the effect polytope, trivial ones included.
    symmetries : list of (d, d) arrays
        Linear maps on functionals that permute ``extreme_effects``; used only
        to shrink enumerations.
    """

    name: str
    vertices: np.ndarray
    dual_rays: np.ndarray
    order_unit: np.ndarray
    scale: float = 1.0
    extreme_effects: Optional[np.ndarray] = None
    symmetries: tuple = field(default=())

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        R = np.atleast_2d(np.asarray(self.dual_rays, dtype=float))
        u = as_vector(self.order_unit)
        d = V.shape[1]
        if R.shape[1] != d or u.shape[0] != d:
            raise DimensionMismatch("vertices, dual rays and order unit must share a dimension")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "dual_rays", R)
        object.__setattr__(self, "order_unit", u)
        object.__setattr__(self, "scale", float(self.scale))
        if self.extreme_effects is not None:
            E = np.atleast_2d(np.asarray(self.extreme_effects, dtype=float))
            if E.shape[1] != d:
                raise DimensionMismatch("extreme effects must match the space dimension")
            object.__setattr__(self, "extreme_effects", E)
        object.__setattr__(self, "symmetries", tuple(np.asarray(S, dtype=float) for S in self.symmetries))
        # vertex evaluation matrix: values(f) = vmat @ f
        object.__setattr__(self, "_vmat", self.scale * V)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def cone(self) -> ConePair:
        return ConePair(self.vertices, self.dual_rays)

    def values(self, functional) -> np.ndarray:
        """Values of ``functional`` on every vertex."""
        return self._vmat @ np.asarray(functional, dtype=float)

    def evaluate(self, functional, state) -> float:
        return evaluate(functional, state, self.scale)

    def check(self, tol: float = EFFECT_TOL) -> list:
        """Return a list of violated invariants (empty when the space is sound)."""
        problems = []
        uv = self.values(self.order_unit)
        if np.abs(uv - 1.0).max() > tol:
            k = int(np.argmax(np.abs(uv - 1.0)))
            problems.append(f"order unit evaluates to {uv[k]:.9g} on vertex {k}")
        pairing = self.dual_rays @ self.vertices.T
        if pairing.min() < -tol:
            i, k = np.unravel_index(np.argmin(pairing), pairing.shape)
            problems.append(f"dual ray {i} is negative ({pairing[i, k]:.3g}) on vertex {k}")
        if len(self.vertices) > 1:
            aff = self.vertices[1:] - self.vertices[0]
            rank = np.linalg.matrix_rank(aff, tol=1e-9)
        else:
            rank = 0
        if rank != self.dimension - 1:
            problems.append(f"vertices span an affine set of dimension {rank}, expected {self.dimension - 1}")
        return problems

    # -- effect catalog --------------------------------------------------

    def trivial_mask(self) -> np.ndarray:
        E = self.extreme_effects
        if E is None:
            return np.zeros(0, dtype=bool)
        zero = np.abs(E).max(axis=1) <= MATCH_TOL
        unit = np.abs(E - self.order_unit).max(axis=1) <= MATCH_TOL
        return zero | unit

    def nontrivial_effects(self) -> np.ndarray:
        """Catalog effects other than ``0`` and ``u``, in catalog order."""
        if self.extreme_effects is None:
            return np.zeros((0, self.dimension))
        return self.extreme_effects[~self.trivial_mask()]

    def catalog_index(self, v, effects: Optional[np.ndarray] = None) -> Optional[int]:
        E = self.extreme_effects if effects is None else effects
        if E is None or len(E) == 0:
            return None
        dist = np.abs(E - np.asarray(v, dtype=float)).max(axis=1)
        k = int(np.argmin(dist))
        return k if dist[k] <= MATCH_TOL else None

    def effect_orbits(self) -> list:
        """Partition catalog indices into orbits of the symmetry group."""
        E = self.extreme_effects
        if E is None:
            return []
        n = len(E)
        perms = []
        for S in self.symmetries:
            img = E @ S.T
            perm = [self.catalog_index(v) for v in img]
            if None not in perm and len(set(perm)) == n:
                perms.append(perm)
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for perm in perms:
            for a, b in enumerate(perm):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups = {}
        for a in range(n):
            groups.setdefault(find(a), []).append(a)
        return [groups[k] for k in sorted(groups)]


@dataclass(frozen=True, eq=False)
class Effect:
    functional: np.ndarray
    space: StateSpace

    def values(self) -> np.ndarray:
        return self.space.values(self.functional)

    def __call__(self, state) -> float:
        return self.space.evaluate(self.functional, state)

    def __repr__(self):
        return f"Effect({np.round(self.functional, 9).tolist()}, space={self.space.name!r})"


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """Two-outcome observable fixed by its ``+1`` effect."""

    plus: Effect

    @property
    def space(self) -> StateSpace:
        return self.plus.space

    @property
    def minus(self) -> Effect:
        return complement(self.plus)

    @property
    def functional(self) -> np.ndarray:
        """The +-1 valued functional ``2*plus - u``."""
        return 2.0 * self.plus.functional - self.space.order_unit


@dataclass
class IncompatibilityReport:
    lam: float
    t: float
    lambda_bar: float
    bias_p: float
    bias_q: float
    witness_g: np.ndarray
    pair: tuple
    dual_value: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "t": self.t,
            "dual_value": self.dual_value,
            "lambda_bar": self.lambda_bar,
            "p": self.bias_p,
            "q": self.bias_q,
            "witness_g": [float(x) for x in self.witness_g],
            "e": [float(x) for x in self.pair[0].functional],
            "f": [float(x) for x in self.pair[1].functional],
        }


def make_effect(space: StateSpace, v, tol: float = EFFECT_TOL) -> Effect:
    """Wrap ``v`` as an effect on ``space``; raises :class:`NotAnEffectError`."""
    v = as_vector(v)
    if v.shape[0] != space.dimension:
        raise DimensionMismatch(f"functional of dimension {v.shape[0]} on a {space.dimension}-d space")
    vals = space.values(v)
    bad = np.flatnonzero((vals < -tol) | (vals > 1.0 + tol))
    if bad.size:
        k = int(bad[0])
        raise NotAnEffectError(k, space.vertices[k], float(vals[k]))
    return Effect(v.copy(), space)


def complement(e: Effect) -> Effect:
    return Effect(e.space.order_unit - e.functional, e.space)


def smear(e: Effect, lam: float, p: float = 0.5) -> Effect:
    """Biased smearing ``lam * e + p * (1 - lam) * u``; ``p = 1/2`` is unbiased."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"smearing parameter {lam} outside [0, 1]")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"bias {p} outside [0, 1]")
    return Effect(lam * e.functional + p * (1.0 - lam) * e.space.order_unit, e.space)


def _same_space(e: Effect, f: Effect) -> StateSpace:
    if e.space is not f.space and e.space.dimension != f.space.dimension:
        raise DimensionMismatch("effects live on different spaces")
    return e.space


def is_jointly_measurable(e: Effect, f: Effect, tol: float = EFFECT_TOL):
    """Search for ``g`` with ``0 <= g``, ``g <= e``, ``g <= f``, ``e + f - u <= g``.

    Returns ``(jointly_measurable, g)``; ``g`` is ``None`` when none exists.
    """
    space = _same_space(e, f)
    Vm = space._vmat
    ev, fv, uv = e.values(), f.values(), space.values(space.order_unit)
    A = np.vstack([Vm, Vm, -Vm, -Vm])
    b = np.concatenate([ev + tol, fv + tol, np.full(len(ev), tol), -(ev + fv - uv) + tol])
    # slack tol keeps exact boundary cases (g = 0 with e' = u - e) feasible
    sol = lp.solve(lp.LpProblem(np.zeros(space.dimension), A, ("<=",) * len(b), b))
    if not sol.optimal:
        return False, None
    return True, sol.point


def jm_violation(e: Effect, f: Effect, g) -> float:
    """Largest violation of the joint-measurability inequalities at ``g`` (0 if met)."""
    space = _same_space(e, f)
    ev, fv, uv = e.values(), f.values(), space.values(space.order_unit)
    gv = space.values(g)
    worst = np.concatenate([gv - ev, gv - fv, -gv, ev + fv - uv - gv])
    return float(max(worst.max(), 0.0))


def _lambda_problem(e: Effect, f: Effect) -> lp.LpProblem:
    space = e.space
    Vm = space._vmat
    k, d = Vm.shape
    ev, fv, uv = e.values(), f.values(), space.values(space.order_unit)
    col = lambda v: v.reshape(-1, 1)
    A = np.vstack([
        np.hstack([-col(ev - 0.5 * uv), Vm]),
        np.hstack([-col(fv - 0.5 * uv), Vm]),
        np.hstack([np.zeros((k, 1)), -Vm]),
        np.hstack([col(ev + fv - uv), -Vm]),
    ])
    b = np.concatenate([0.5 * uv, 0.5 * uv, np.zeros(k), np.zeros(k)])
    c = np.zeros(d + 1)
    c[0] = 1.0
    bounds = ((0.0, 1.0),) + ((None, None),) * d
    return lp.LpProblem(c, A, ("<=",) * len(b), b, bounds)


def lambda_ef(e: Effect, f: Effect):
    """Largest unbiased smearing at which ``e`` and ``f`` become jointly measurable.

    Returns ``(lambda, g)`` where ``g`` is the joint effect at the optimum.
    """
    _same_space(e, f)
    sol = lp.solve(_lambda_problem(e, f))
    if not sol.optimal:  # pragma: no cover - lambda = 1/2 is always feasible
        raise RuntimeError(f"lambda program returned {sol.status}")
    return sol.value, sol.point[1:]


def t_ef(e: Effect, f: Effect):
    """Smallest offset ``t >= 0`` making ``e + t u`` and ``f + t u`` jointly measurable."""
    space = _same_space(e, f)
    Vm = space._vmat
    k, d = Vm.shape
    ev, fv, uv = e.values(), f.values(), space.values(space.order_unit)
    col = lambda v: v.reshape(-1, 1)
    A = np.vstack([
        np.hstack([-col(uv), Vm]),
        np.hstack([-col(uv), Vm]),
        np.hstack([np.zeros((k, 1)), -Vm]),
        np.hstack([np.zeros((k, 1)), -Vm]),
    ])
    b = np.concatenate([ev, fv, np.zeros(k), -(ev + fv - uv)])
    c = np.zeros(d + 1)
    c[0] = -1.0
    bounds = ((0.0, None),) + ((None, None),) * d
    sol = lp.solve(lp.LpProblem(c, A, ("<=",) * len(b), b, bounds))
    if not sol.optimal:  # pragma: no cover
        raise RuntimeError(f"t program returned {sol.status}")
    return max(-sol.value, 0.0), sol.point[1:]


def lambda_bar_ef(e: Effect, f: Effect):
    """Biased incompatibility: optimize the smearing and both biases together.

    Uses ``b = p (1 - lam)`` and ``c = q (1 - lam)`` so the program stays
    linear. Returns ``(lambda_bar, p, q, g)``; at ``lambda_bar = 1`` the
    biases are undetermined and reported as 1/2.
    """
    space = _same_space(e, f)
    Vm = space._vmat
    k, d = Vm.shape
    ev, fv, uv = e.values(), f.values(), space.values(space.order_unit)
    col = lambda v: v.reshape(-1, 1)
    z = np.zeros((k, 1))
    # variables: lam, b, c, g
    A = np.vstack([
        np.hstack([-col(ev), -col(uv), z, Vm]),
        np.hstack([-col(fv), z, -col(uv), Vm]),
        np.hstack([z, z, z, -Vm]),
        np.hstack([col(ev + fv), col(uv), col(uv), -Vm]),
        np.hstack([np.array([[1.0, 1.0, 0.0]]), np.zeros((1, d))]),
        np.hstack([np.array([[1.0, 0.0, 1.0]]), np.zeros((1, d))]),
    ])
    b = np.concatenate([np.zeros(3 * k), uv, [1.0, 1.0]])
    c = np.zeros(d + 3)
    c[0] = 1.0
    bounds = ((0.0, 1.0), (0.0, None), (0.0, None)) + ((None, None),) * d
    sol = lp.solve(lp.LpProblem(c, A, ("<=",) * len(b), b, bounds))
    if not sol.optimal:  # pragma: no cover
        raise RuntimeError(f"biased lambda program returned {sol.status}")
    lam, bb, cc = sol.point[:3]
    if 1.0 - lam > 1e-9:
        p = min(max(bb / (1.0 - lam), 0.0), 1.0)
        q = min(max(cc / (1.0 - lam), 0.0), 1.0)
    else:
        p = q = 0.5
    return float(lam), float(p), float(q), sol.point[3:]


def dual_program(e: Effect, f: Effect):
    """Dual of the ``t`` program over four elements of the state cone.

    maximize ``mu3(e + f - u) - mu1(e) - mu2(f)`` subject to
    ``(mu1 + mu2)(u) <= 1`` and ``mu1 + mu2 = mu3 + mu4``. The inequality in
    the normalization matches the ``t >= 0`` restriction of :func:`t_ef`.

    Returns ``(value, mu1, mu2, mu3, mu4)``.
    """
    space = _same_space(e, f)
    d = space.dimension
    s = space.scale
    R = space.dual_rays
    r = R.shape[0]
    ef, ff, u = e.functional, f.functional, space.order_unit
    c = s * np.concatenate([-ef, -ff, ef + ff - u, np.zeros(d)])
    Z = np.zeros((r, d))
    cone_rows = np.vstack([
        np.hstack([R, Z, Z, Z]),
        np.hstack([Z, R, Z, Z]),
        np.hstack([Z, Z, R, Z]),
        np.hstack([Z, Z, Z, R]),
    ])
    I = np.eye(d)
    balance = np.hstack([I, I, -I, -I])
    norm = s * np.concatenate([u, u, np.zeros(2 * d)])
    A = np.vstack([cone_rows, balance, norm])
    senses = (">=",) * (4 * r) + ("=",) * d + ("<=",)
    b = np.concatenate([np.zeros(4 * r + d), [1.0]])
    sol = lp.solve(lp.LpProblem(c, A, senses, b))
    if not sol.optimal:  # pragma: no cover
        raise RuntimeError(f"dual program returned {sol.status}")
    mus = sol.point.reshape(4, d)
    return sol.value, mus[0], mus[1], mus[2], mus[3]


@dataclass
class LambdaOpt:
    value: float
    pair: Optional[tuple]  # (i, j) indices into space.nontrivial_effects()
    effects: Optional[tuple]
    table: dict  # (i, j) -> lambda_ef for every unordered pair evaluated


def _complement_classes(space: StateSpace, effects: np.ndarray) -> list:
    """Class id per effect, identifying each effect with its complement."""
    cls = list(range(len(effects)))
    for i, v in enumerate(effects):
        j = space.catalog_index(space.order_unit - v, effects)
        if j is not None:
            cls[i] = min(i, j)
    return cls


def lambda_opt(space: StateSpace, full_table: bool = True) -> LambdaOpt:
    """Minimum of ``lambda_ef`` over unordered pairs of nontrivial extreme effects.

    ``lambda_ef`` is unchanged when either argument is replaced by its
    complement, so the program is solved once per pair of complement classes.
    Ties go to the lexicographically first pair.
    """
    effs = space.nontrivial_effects()
    n = len(effs)
    if n < 2:
        return LambdaOpt(1.0, None, None, {})
    cls = _complement_classes(space, effs)
    cache = {}
    table = {}
    best, best_pair = np.inf, None
    for i, j in itertools.combinations(range(n), 2):
        key = (min(cls[i], cls[j]), max(cls[i], cls[j]))
        if key not in cache:
            cache[key] = lambda_ef(Effect(effs[key[0]], space), Effect(effs[key[1]], space))[0]
        val = cache[key]
        if full_table:
            table[(i, j)] = val
        if val < best - 1e-9:
            best, best_pair = val, (i, j)
    i, j = best_pair
    return LambdaOpt(float(best), best_pair, (Effect(effs[i], space), Effect(effs[j], space)), table)


def lambda_bar_opt(space: StateSpace):
    """Minimum of the biased measure over nontrivial extreme pairs.

    Returns ``(lambda_bar, (i, j), p, q)``.
    """
    effs = space.nontrivial_effects()
    best = (1.0, None, 0.5, 0.5)
    for i, j in itertools.combinations(range(len(effs)), 2):
        lb, p, q, _ = lambda_bar_ef(Effect(effs[i], space), Effect(effs[j], space))
        if lb < best[0] - 1e-9:
            best = (lb, (i, j), p, q)
    return best


def incompatibility_report(e: Effect, f: Effect) -> IncompatibilityReport:
    lam, g = lambda_ef(e, f)
    t, _ = t_ef(e, f)
    dual = dual_program(e, f)[0]
    lb, p, q, _ = lambda_bar_ef(e, f)
    return IncompatibilityReport(lam, t, lb, p, q, g, (e, f), dual)


def random_effect(space: StateSpace, rng: np.random.Generator) -> Effect:
    """Random convex combination of catalog effects (always a valid effect)."""
    E = space.extreme_effects
    w = rng.dirichlet(np.ones(len(E)))
    return Effect(w @ E, space)


def audit_lambda_opt(space: StateSpace, samples: int = 1000, seed: int = 0, tol: float = 1e-6):
    """Check that no random interior pair beats the extreme-pair minimum.

    Returns ``(passed, extreme_min, sampled_min)``.
    """
    rng = np.random.default_rng(seed)
    ext = lambda_opt(space, full_table=False).value
    worst = np.inf
    for _ in range(samples):
        e, f = random_effect(space, rng), random_effect(space, rng)
        worst = min(worst, lambda_ef(e, f)[0])
    return worst >= ext - tol, ext, float(worst)
