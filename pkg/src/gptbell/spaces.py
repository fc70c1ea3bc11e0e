"""Built-in state spaces and user model files.

The catalog holds the classical simplex, the squit (square) and the regular
polygons. User models are JSON documents with the fields of :class:`ModelSpec`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotAnEffectError, ValidationError
from .geometry import verify_cone_pair
from .gpt import StateSpace, make_effect

CLASSICAL_MAX = 12


def _rot(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


_FLIP_Y = np.diag([1.0, -1.0, 1.0])


def classical(n: int) -> StateSpace:
    """Probability simplex on ``n`` outcomes; all ``2**n`` 0/1 effects are extreme."""
    if n < 1:
        raise ValidationError("classical space needs n >= 1")
    if n > CLASSICAL_MAX:
        raise ValidationError(f"classical effect enumeration capped at n = {CLASSICAL_MAX}")
    I = np.eye(n)
    effects = np.array([[(k >> b) & 1 for b in range(n)] for k in range(2 ** n)], dtype=float)
    syms = []
    if n > 1:
        syms.append(np.roll(I, 1, axis=0))
        swap = I.copy()
        swap[[0, 1]] = swap[[1, 0]]
        syms.append(swap)
    return StateSpace(f"classical:{n}", I, I, np.ones(n), 1.0, effects, tuple(syms))


def squit() -> StateSpace:
    """The square state space underlying boxworld, evaluated with scale 1/2."""
    vertices = [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)]
    rays = [(1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1)]
    effects = [(0, 0, 0), (0, 0, 2)] + rays
    syms = (_rot(np.pi / 2), _FLIP_Y)
    return StateSpace("squit", vertices, rays, (0, 0, 2), 0.5, effects, syms)


def polygon_radius(n: int) -> float:
    return float(np.sqrt(1.0 / np.cos(np.pi / n)))


def polygon(n: int) -> StateSpace:
    """Regular ``n``-gon with vertices at radius ``sqrt(sec(pi/n))``.

    Catalog order is ``0, u, e_1..e_n`` for even ``n`` and
    ``0, u, e_1..e_n, e_1'..e_n'`` for odd ``n``.
    """
    if n < 3:
        raise ValidationError("polygon needs n >= 3")
    r = polygon_radius(n)
    i = np.arange(1, n + 1)
    ang = 2 * np.pi * i / n
    vertices = np.column_stack([r * np.cos(ang), r * np.sin(ang), np.ones(n)])
    u = np.array([0.0, 0.0, 1.0])
    if n % 2 == 0:
        eang = (2 * i - 1) * np.pi / n
        rays = 0.5 * np.column_stack([r * np.cos(eang), r * np.sin(eang), np.ones(n)])
        nontrivial = rays
    else:
        rays = np.column_stack([r * np.cos(ang), r * np.sin(ang), np.ones(n)]) / (1 + r * r)
        nontrivial = np.vstack([rays, u - rays])
    effects = np.vstack([np.zeros(3), u, nontrivial])
    syms = (_rot(2 * np.pi / n), _FLIP_Y)
    return StateSpace(f"polygon:{n}", vertices, rays, u, 1.0, effects, syms)


@dataclass
class ModelSpec:
    name: str
    dimension: int
    vertices: list
    dual_rays: list
    order_unit: list
    scale: float
    extreme_effects: list

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        missing = [k for k in ("name", "dimension", "scale", "order_unit", "vertices", "dual_rays", "extreme_effects") if k not in doc]
        if missing:
            raise ValidationError(f"model is missing field {missing[0]!r}")
        return cls(
            name=str(doc["name"]),
            dimension=int(doc["dimension"]),
            vertices=doc["vertices"],
            dual_rays=doc["dual_rays"],
            order_unit=doc["order_unit"],
            scale=float(doc["scale"]),
            extreme_effects=doc["extreme_effects"],
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "scale": self.scale,
            "order_unit": [float(x) for x in self.order_unit],
            "vertices": [[float(x) for x in v] for v in self.vertices],
            "dual_rays": [[float(x) for x in v] for v in self.dual_rays],
            "extreme_effects": [[float(x) for x in v] for v in self.extreme_effects],
        }


def to_spec(space: StateSpace) -> ModelSpec:
    return ModelSpec(
        space.name,
        space.dimension,
        space.vertices.tolist(),
        space.dual_rays.tolist(),
        space.order_unit.tolist(),
        space.scale,
        space.extreme_effects.tolist() if space.extreme_effects is not None else [],
    )


def load_model(spec: ModelSpec, tol: float = 1e-9) -> StateSpace:
    """Validate a :class:`ModelSpec` and build the state space.

    Raises :class:`ValidationError` naming the first violated invariant.
    """
    def shape_ok(rows, what):
        try:
            arr = np.asarray(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{what} is not a rectangular numeric array") from exc
        if arr.ndim != 2 or arr.shape[1] != spec.dimension or len(arr) == 0:
            raise ValidationError(f"{what} must be a non-empty list of length-{spec.dimension} arrays")
        return arr

    V = shape_ok(spec.vertices, "vertices")
    R = shape_ok(spec.dual_rays, "dual_rays")
    E = shape_ok(spec.extreme_effects, "extreme_effects")
    u = np.asarray(spec.order_unit, dtype=float)
    if u.shape != (spec.dimension,):
        raise ValidationError(f"order_unit must have length {spec.dimension}")
    if spec.scale <= 0:
        raise ValidationError("scale must be positive")
    space = StateSpace(spec.name, V, R, u, spec.scale, E)
    problems = space.check(tol)
    if problems:
        raise ValidationError(f"model {spec.name!r}: {problems[0]}")
    check = verify_cone_pair(space.cone, tol)
    if not check:
        i, j, val = check.violations[0]
        raise ValidationError(f"model {spec.name!r}: dual ray {i} is {val:.3g} on vertex {j}")
    for k, e in enumerate(E):
        try:
            make_effect(space, e, tol)
        except NotAnEffectError as exc:
            raise ValidationError(f"model {spec.name!r}: extreme effect {k}: {exc}") from exc
    return space


def read_model(path) -> StateSpace:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return load_model(ModelSpec.from_dict(doc))


def write_model(space: StateSpace, path) -> None:
    Path(path).write_text(json.dumps(to_spec(space).to_dict(), indent=2) + "\n", encoding="utf-8")


def parse_selector(text: str) -> StateSpace:
    """Resolve ``classical:N``, ``squit``, ``polygon:N`` or ``file:PATH``."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "squit" and not arg:
            return squit()
        if kind == "classical":
            return classical(int(arg))
        if kind == "polygon":
            return polygon(int(arg))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad space selector {text!r}") from exc
    if kind == "file" and arg:
        return read_model(arg)
    raise ValidationError(f"unknown space selector {text!r}")


def builtin_spaces():
    """A few spaces used by property tests and sweeps."""
    return [classical(2), classical(3), squit()] + [polygon(n) for n in itertools.chain(range(3, 9))]
