"""Coarse disjoint union of the levels of a chain.

Levels keep their word metrics.  Consecutive identity elements are separated
by more than both neighbouring diameters, and cross-level distances route
through the identities, so any subset of diameter below the smallest
separation stays inside a single level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SpecFormatError
from .groups import GroupChain

__all__ = [
    "BoxPoint",
    "BoxSpace",
    "assemble_box_space",
    "box_distance",
    "format_point",
    "parse_point",
]


class BoxPoint(NamedTuple):
    level: int
    element: int


@dataclass
class BoxSpace:
    """Disjoint union of chain levels with separated identity baselines."""

    chain: GroupChain
    separations: tuple[int, ...]
    level_offsets: tuple[int, ...]

    def __post_init__(self):
        self._points: list[BoxPoint] | None = None
        self._index: dict[BoxPoint, int] | None = None
        self._matrix: np.ndarray | None = None

    def points(self) -> list[BoxPoint]:
        if self._points is None:
            self._points = [
                BoxPoint(i, x)
                for i, q in enumerate(self.chain.levels)
                for x in range(q.order)
            ]
        return self._points

    def point_count(self) -> int:
        return sum(q.order for q in self.chain.levels)

    def point_index(self, point: BoxPoint) -> int:
        if self._index is None:
            self._index = {p: i for i, p in enumerate(self.points())}
        return self._index[point]

    def identity_point(self, level: int) -> BoxPoint:
        return BoxPoint(level, self.chain.levels[level].identity)

    def contains(self, point: BoxPoint) -> bool:
        return 0 <= point.level < len(self.chain.levels) and 0 <= point.element < self.chain.levels[point.level].order

    def distance(self, x: BoxPoint, y: BoxPoint) -> int:
        return box_distance(self, x, y)

    def distance_matrix(self) -> np.ndarray:
        """Dense distance matrix over ``points()`` order."""
        if self._matrix is None:
            pts = self.points()
            n = len(pts)
            mat = np.zeros((n, n), dtype=np.int64)
            for i in range(n):
                for j in range(i + 1, n):
                    mat[i, j] = mat[j, i] = box_distance(self, pts[i], pts[j])
            self._matrix = mat
        return self._matrix

    def diameter(self) -> int:
        return int(self.distance_matrix().max())


def assemble_box_space(chain: GroupChain) -> BoxSpace:
    """Build the box space with separations one above the larger neighbour diameter."""
    diams = [q.diameter() for q in chain.levels]
    separations = tuple(
        max(diams[i], diams[i + 1]) + 1 for i in range(len(diams) - 1)
    )
    offsets = [0]
    for s in separations:
        offsets.append(offsets[-1] + s)
    return BoxSpace(chain, separations, tuple(offsets))


def box_distance(space: BoxSpace, x: BoxPoint, y: BoxPoint) -> int:
    """Distance in the box space; cross-level paths pass through the identities."""
    if not (space.contains(x) and space.contains(y)):
        raise ValueError(f"point {x if not space.contains(x) else y} outside the space")
    if x.level == y.level:
        return space.chain.levels[x.level].cayley_distance(x.element, y.element)
    if x.level > y.level:
        x, y = y, x
    qx = space.chain.levels[x.level]
    qy = space.chain.levels[y.level]
    gap = space.level_offsets[y.level] - space.level_offsets[x.level]
    return (
        qx.cayley_distance(x.element, qx.identity)
        + gap
        + qy.cayley_distance(qy.identity, y.element)
    )


def format_point(point: BoxPoint) -> str:
    return f"L{point.level}:{point.element}"


def parse_point(text: str) -> BoxPoint:
    if not text.startswith("L") or ":" not in text:
        raise SpecFormatError(f"bad point name {text!r}, expected L<level>:<element>")
    level_text, _, elem_text = text[1:].partition(":")
    try:
        return BoxPoint(int(level_text), int(elem_text))
    except ValueError:
        raise SpecFormatError(
            f"bad point name {text!r}, expected L<level>:<element>"
        ) from None
