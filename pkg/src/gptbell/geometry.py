"""Vectors, dual cone pairs and membership tests.

Vectors are plain 1-d float ``numpy`` arrays. A cone is carried in both
representations at once: its extremal rays (``generators``) and the
extremal rays of its dual (``supports``); no facet enumeration is done.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch

DEFAULT_TOL = 1e-9


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {arr.shape}")
    return arr


def evaluate(functional, point, scale: float = 1.0) -> float:
    """Return ``scale * <functional, point>``."""
    a = as_vector(functional)
    b = as_vector(point)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(scale * (a @ b))


@dataclass(frozen=True, eq=False)
class ConePair:
    """A polyhedral cone stored by generators together with its dual's generators."""

    generators: np.ndarray
    supports: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        s = np.atleast_2d(np.asarray(self.supports, dtype=float))
        if g.shape[1] != s.shape[1]:
            raise DimensionMismatch("generators and supports differ in dimension")
        object.__setattr__(self, "generators", g)
        object.__setattr__(self, "supports", s)

    @property
    def dim(self) -> int:
        return self.generators.shape[1]


@dataclass
class ConeCheck:
    """Outcome of :func:`verify_cone_pair`; truthy when the pair is consistent."""

    ok: bool
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def cone_contains(cone: ConePair, v, tol: float = DEFAULT_TOL) -> bool:
    v = as_vector(v)
    if v.shape[0] != cone.dim:
        raise DimensionMismatch(f"vector of dimension {v.shape[0]} vs cone of dimension {cone.dim}")
    return bool((cone.supports @ v).min() >= -tol)


def verify_cone_pair(cone: ConePair, tol: float = DEFAULT_TOL, strict_extremality: bool = False) -> ConeCheck:
    """Check that every support is nonnegative on every generator.

    Also checks that each generator is tight on ``dim - 1`` linearly
    independent supports, i.e. that it really is an extremal ray. Failures of
    that second clause are reported as warnings unless ``strict_extremality``.
    """
    pairing = cone.supports @ cone.generators.T  # (supports, generators)
    violations = [
        (int(i), int(j), float(pairing[i, j]))
        for i, j in zip(*np.nonzero(pairing < -tol))
    ]
    warnings = []
    d = cone.dim
    for j, g in enumerate(cone.generators):
        tight = cone.supports[np.abs(pairing[:, j]) <= max(tol, 1e-9)]
        rank = np.linalg.matrix_rank(tight, tol=1e-8) if len(tight) else 0
        if rank < d - 1:
            warnings.append((j, f"generator {j} tight on supports of rank {rank} < {d - 1}"))
    ok = not violations and not (strict_extremality and warnings)
    return ConeCheck(ok, violations, warnings)
