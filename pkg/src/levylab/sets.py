"""Subsets of the unit sphere with membership tests and exact chordal distances.

Distances are chordal (Euclidean) distances from a point of the sphere to the
set; the geodesic distance is ``2 * arcsin(chord / 2)``.  Batches are arrays of
shape ``(m, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument
from .sphere import geodesic_to_chordal, real_inner, sample_uniform


class SphericalSet:
    """A set A in a unit sphere: ``contains(X)`` and optionally ``distance(X)``."""

    label: str = "A"
    has_distance: bool = True

    def contains(self, X) -> np.ndarray:
        raise NotImplementedError

    def distance(self, X) -> np.ndarray:
        raise NotImplementedError(f"{self.label} has no distance evaluator")

    def transformed(self, action, label: str | None = None) -> "SphericalSet":
        """The image g(A) under an isometric action ``g``."""
        return TransformedSet(self, action, label or f"{action.label}({self.label})")

    def consistency_violations(self, X, tol: float = 1e-12) -> int:
        """Count rows where ``distance == 0`` disagrees with membership."""
        inside = np.asarray(self.contains(X), dtype=bool)
        zero = np.asarray(self.distance(X)) <= tol
        return int(np.sum(inside != zero))


@dataclass
class PredicateSet(SphericalSet):
    membership: Callable[[np.ndarray], np.ndarray]
    distance_fn: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = "A"

    @property
    def has_distance(self) -> bool:
        return self.distance_fn is not None

    def contains(self, X):
        return np.asarray(self.membership(np.atleast_2d(X)), dtype=bool)

    def distance(self, X):
        if self.distance_fn is None:
            return super().distance(X)
        return np.asarray(self.distance_fn(np.atleast_2d(X)), dtype=float)


@dataclass
class WholeSphere(SphericalSet):
    label: str = "S"

    def contains(self, X):
        return np.ones(np.atleast_2d(X).shape[0], dtype=bool)

    def distance(self, X):
        return np.zeros(np.atleast_2d(X).shape[0])


@dataclass
class HalfSpaceSet(SphericalSet):
    """{x : Re<x, normal> >= 0} (``sign=+1``) or ``<= 0`` (``sign=-1``)."""

    normal: np.ndarray
    sign: int = 1
    label: str = "H"

    def __post_init__(self):
        n = np.asarray(self.normal)
        self.normal = n / np.linalg.norm(n)

    def _height(self, X):
        return self.sign * real_inner(np.atleast_2d(X), self.normal)

    def contains(self, X):
        return self._height(X) >= 0

    def distance(self, X):
        h = np.clip(self._height(X), -1.0, 0.0)
        return geodesic_to_chordal(np.arcsin(-h))


@dataclass
class CapSet(SphericalSet):
    """Closed geodesic ball of angular ``radius`` about ``center``."""

    center: np.ndarray
    radius: float
    label: str = "cap"

    def _angle(self, X):
        return np.arccos(np.clip(real_inner(np.atleast_2d(X), self.center), -1.0, 1.0))

    def contains(self, X):
        return self._angle(X) <= self.radius

    def distance(self, X):
        return geodesic_to_chordal(np.maximum(self._angle(X) - self.radius, 0.0))


@dataclass
class MaskNormSet(SphericalSet):
    """{x : ||p_S x|| >= threshold} (``kind='ge'``) or ``<= threshold`` (``kind='le'``).

    ``p_S`` zeroes every coordinate outside ``mask``.  The distance formula is
    exact when the set can be reached by rotating within span(p_S x, x - p_S x),
    i.e. whenever both S and its complement have room, as in l_2 of an
    infinite index set.
    """

    mask: np.ndarray
    threshold: float
    kind: str = "ge"
    label: str = "M"

    def __post_init__(self):
        self.mask = np.asarray(sorted(set(int(i) for i in np.asarray(self.mask).ravel())), dtype=int)
        if self.kind not in ("ge", "le"):
            raise InvalidArgument(f"kind must be 'ge' or 'le', got {self.kind!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidArgument("threshold must lie in [0, 1]")

    def mask_norm(self, X):
        X = np.atleast_2d(X)
        if self.mask.size and self.mask.max() >= X.shape[1]:
            raise InvalidArgument("mask index outside the ambient dimension")
        return np.sqrt(np.sum(np.abs(X[:, self.mask]) ** 2, axis=1))

    def contains(self, X):
        s = self.mask_norm(X)
        return s >= self.threshold if self.kind == "ge" else s <= self.threshold

    def distance(self, X):
        phi = np.arcsin(np.clip(self.mask_norm(X), 0.0, 1.0))
        target = np.arcsin(self.threshold)
        gap = target - phi if self.kind == "ge" else phi - target
        return geodesic_to_chordal(np.maximum(gap, 0.0))


@dataclass
class TransformedSet(SphericalSet):
    base: SphericalSet
    action: object
    label: str = "gA"

    @property
    def has_distance(self) -> bool:
        return self.base.has_distance

    def contains(self, X):
        return self.base.contains(self.action.apply_inverse(np.atleast_2d(X)))

    def distance(self, X):
        # g is an isometry: dist(x, gA) = dist(g^{-1} x, A)
        return self.base.distance(self.action.apply_inverse(np.atleast_2d(X)))


@dataclass
class Cover:
    sets: list[SphericalSet] = field(default_factory=list)

    def __iter__(self):
        return iter(self.sets)

    def __len__(self):
        return len(self.sets)

    def membership(self, X) -> np.ndarray:
        """Boolean matrix ``(len(sets), m)``."""
        return np.vstack([np.asarray(A.contains(X), dtype=bool) for A in self.sets])

    def uncovered(self, X) -> int:
        return int(np.sum(~self.membership(X).any(axis=0)))

    def covering_check(self, d: int, m: int, seed: int, field: str = "real") -> int:
        """Number of uniform samples that no element contains (0 for a cover)."""
        return self.uncovered(sample_uniform(d, m, seed, field, stream="cover-check"))


def hemisphere(d: int, axis: int = 0, sign: int = 1, label: str | None = None) -> HalfSpaceSet:
    n = np.zeros(d)
    n[axis] = 1.0
    return HalfSpaceSet(n, sign, label or f"{{x{axis + 1} {'>=' if sign > 0 else '<='} 0}}")


def labels(sets: Sequence[SphericalSet]) -> list[str]:
    return [A.label for A in sets]
