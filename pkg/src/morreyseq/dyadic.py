"""Dyadic cubes ``Q_{-j,m} = 2^j (m + [0,1)^d)`` on the integer lattice.

Only cubes of side ``>= 1`` are representable; unit cells ``Q_{0,k}`` are
the atoms every sequence is indexed by.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Point = tuple[int, ...]


@dataclass(frozen=True, order=True)
class DyadicCube:
    level: int
    origin: Point

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("cube level must be nonnegative")
        object.__setattr__(self, "origin", tuple(int(c) for c in self.origin))
        if not self.origin:
            raise ValueError("cube dimension must be positive")

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def side(self) -> int:
        return 1 << self.level

    @property
    def volume(self) -> int:
        return 1 << (self.level * self.dim)

    @property
    def corner(self) -> Point:
        """Smallest lattice point in the cube."""
        return tuple(self.side * m for m in self.origin)

    def contains(self, k: Sequence[int]) -> bool:
        return all(c <= x < c + self.side for c, x in zip(self.corner, k))

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level + 1, tuple(m >> 1 for m in self.origin))

    def __str__(self):
        return f"Q(level={self.level}, origin={list(self.origin)})"


def cells_in(cube: DyadicCube) -> Iterator[Point]:
    """Unit cells of ``cube`` in lexicographic order."""
    ranges = [range(c, c + cube.side) for c in cube.corner]
    return itertools.product(*ranges)


def ancestor(point: Sequence[int], level: int) -> DyadicCube:
    """The unique level-``level`` cube containing the cell ``Q_{0,point}``."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    # >> is floor division by 2**level, also for negative coordinates
    return DyadicCube(level, tuple(int(k) >> level for k in point))


def _sign_class(point: Sequence[int]) -> tuple[bool, ...]:
    return tuple(k < 0 for k in point)


def _merge_level(pts: list[Point]) -> int:
    # highest bit in which any coordinate differs from the first point;
    # exact for same-sign integers under two's-complement shifts
    first = pts[0]
    level = 0
    for k in pts[1:]:
        for a, b in zip(k, first):
            level = max(level, (a ^ b).bit_length())
    return level


def covering_level(points: Iterable[Sequence[int]]) -> int:
    """Least ``j`` such that one level-``j`` dyadic cube contains every point.

    Raises ``ValueError`` when the points lie in different sign orthants,
    since then no dyadic cube contains them all.
    """
    pts = [tuple(int(c) for c in k) for k in points]
    if not pts:
        raise ValueError("points must be nonempty")
    if len({_sign_class(k) for k in pts}) > 1:
        raise ValueError("points straddle a coordinate hyperplane; no dyadic cube covers them")
    return _merge_level(pts)


def stable_level(points: Iterable[Sequence[int]]) -> int:
    """Least ``J`` from which on the dyadic grouping of ``points`` is frozen.

    Dyadic cubes never straddle a coordinate hyperplane through the origin,
    so points of different sign patterns never share a cube. For every
    ``j >= J`` the level-``j`` cubes meeting ``points`` hold exactly one
    group per sign pattern. Equals :func:`covering_level` when the points
    share one orthant.
    """
    pts = [tuple(int(c) for c in k) for k in points]
    if not pts:
        raise ValueError("points must be nonempty")
    classes: dict[tuple[bool, ...], list[Point]] = {}
    for k in pts:
        classes.setdefault(_sign_class(k), []).append(k)
    return max(_merge_level(group) for group in classes.values())


def cubes_meeting(points: Iterable[Sequence[int]], level: int) -> dict[DyadicCube, list[Point]]:
    """Group ``points`` by their level-``level`` ancestor."""
    groups: dict[DyadicCube, list[Point]] = {}
    for k in points:
        k = tuple(int(c) for c in k)
        groups.setdefault(ancestor(k, level), []).append(k)
    return groups
