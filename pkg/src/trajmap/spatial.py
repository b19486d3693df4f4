"""Grid indexes for trajectory segments and graph edges, plus disc queries.

Buckets hold everything whose bounding box overlaps a cell, so a query first
collects a superset of candidates from the covered cells and then filters
exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .geo import point_segment_distance
from .trajectories import Trajectory

FORWARD = 1
REVERSE = -1


class Crossing(NamedTuple):
    """One maximal run of a trajectory inside a query disc, in one orientation."""

    traj: int      # index into TrajIndex.trajs
    traj_id: str
    enter: int     # first point of the run in travel order
    step: int      # FORWARD or REVERSE


def _cell_of(x: float, y: float, cell: float) -> tuple[int, int]:
    return math.floor(x / cell), math.floor(y / cell)


def _cells_in_box(x0: float, y0: float, x1: float, y1: float, cell: float,
                  ) -> Iterable[tuple[int, int]]:
    cx0, cy0 = _cell_of(x0, y0, cell)
    cx1, cy1 = _cell_of(x1, y1, cell)
    for cx in range(cx0, cx1 + 1):
        for cy in range(cy0, cy1 + 1):
            yield cx, cy


@dataclass
class TrajIndex:
    """Maps grid cells to the trajectory segments whose bbox overlaps them."""

    cell_size: float
    trajs: list[Trajectory]
    buckets: dict[tuple[int, int], list[tuple[int, int]]] = field(default_factory=dict)

    def segment(self, ti: int, si: int) -> tuple[np.ndarray, np.ndarray]:
        pts = self.trajs[ti].xy
        return pts[si], pts[si + 1]


def build_index(trajs: list[Trajectory], cell_size: float = 30.0) -> TrajIndex:
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    index = TrajIndex(cell_size=cell_size, trajs=trajs)
    for ti, traj in enumerate(trajs):
        xy = traj.xy
        for si in range(len(traj) - 1):
            x0 = min(xy[si, 0], xy[si + 1, 0])
            x1 = max(xy[si, 0], xy[si + 1, 0])
            y0 = min(xy[si, 1], xy[si + 1, 1])
            y1 = max(xy[si, 1], xy[si + 1, 1])
            for cell in _cells_in_box(x0, y0, x1, y1, cell_size):
                index.buckets.setdefault(cell, []).append((ti, si))
    return index


def _candidate_pairs(index: TrajIndex, center: tuple[float, float], r: float,
                     ) -> list[tuple[int, int]]:
    cx, cy = center
    seen: set[tuple[int, int]] = set()
    for cell in _cells_in_box(cx - r, cy - r, cx + r, cy + r, index.cell_size):
        for pair in index.buckets.get(cell, ()):
            seen.add(pair)
    return sorted(seen)


def query_segments(index: TrajIndex, center: tuple[float, float], r: float,
                   ) -> list[tuple[int, int]]:
    """Exactly the (traj, segment) pairs whose segment intersects the disc."""
    out = []
    for ti, si in _candidate_pairs(index, center, r):
        a, b = index.segment(ti, si)
        if point_segment_distance(center, (a[0], a[1]), (b[0], b[1])) <= r:
            out.append((ti, si))
    return out


def query_crossings(index: TrajIndex, center: tuple[float, float], r: float,
                    ) -> list[Crossing]:
    """Disc crossings: one per maximal in-disc point run, per orientation.

    A run's forward crossing enters at its first point, the reverse crossing
    at its last; undirected roads therefore see both directions of travel.
    """
    traj_ids = sorted({ti for ti, _ in _candidate_pairs(index, center, r)})
    cx, cy = center
    out: list[Crossing] = []
    for ti in traj_ids:
        traj = index.trajs[ti]
        d2 = (traj.xy[:, 0] - cx) ** 2 + (traj.xy[:, 1] - cy) ** 2
        inside = np.flatnonzero(d2 <= r * r)
        if inside.size == 0:
            continue
        breaks = np.flatnonzero(np.diff(inside) > 1)
        for run in np.split(inside, breaks + 1):
            out.append(Crossing(ti, traj.id, int(run[0]), FORWARD))
            out.append(Crossing(ti, traj.id, int(run[-1]), REVERSE))
    return out


def walk_to_circle_exit(traj: Trajectory, start: int, step: int,
                        center: tuple[float, float], radius: float,
                        ) -> tuple[float, float] | None:
    """Follow the trajectory from start until it leaves the circle.

    Returns the exit point interpolated onto the circle, or None when the
    trajectory terminates while still inside.
    """
    cx, cy = center
    r2 = radius * radius
    i = start
    while True:
        j = i + step
        if j < 0 or j >= len(traj):
            return None
        px, py = traj.xy[j]
        if (px - cx) ** 2 + (py - cy) ** 2 > r2:
            ax, ay = traj.xy[i]
            dx, dy = px - ax, py - ay
            fa, fb = ax - cx, ay - cy
            a = dx * dx + dy * dy
            b = 2.0 * (fa * dx + fb * dy)
            c = fa * fa + fb * fb - r2
            disc = max(b * b - 4.0 * a * c, 0.0)
            t = (-b + math.sqrt(disc)) / (2.0 * a)
            t = min(max(t, 0.0), 1.0)
            return (ax + t * dx, ay + t * dy)
        i = j


@dataclass
class SegmentIndex:
    """Grid over arbitrary planar segments; used for point-to-graph distances."""

    cell_size: float
    segments: list[tuple[tuple[float, float], tuple[float, float]]] = field(default_factory=list)
    buckets: dict[tuple[int, int], list[int]] = field(default_factory=dict)

    def add(self, a: tuple[float, float], b: tuple[float, float]) -> None:
        si = len(self.segments)
        self.segments.append((a, b))
        x0, x1 = min(a[0], b[0]), max(a[0], b[0])
        y0, y1 = min(a[1], b[1]), max(a[1], b[1])
        for cell in _cells_in_box(x0, y0, x1, y1, self.cell_size):
            self.buckets.setdefault(cell, []).append(si)

    def min_distance(self, p: tuple[float, float], cap: float) -> float:
        """Smallest distance from p to any segment, or inf if beyond cap."""
        best = math.inf
        seen: set[int] = set()
        for cell in _cells_in_box(p[0] - cap, p[1] - cap, p[0] + cap, p[1] + cap,
                                  self.cell_size):
            for si in self.buckets.get(cell, ()):
                if si in seen:
                    continue
                seen.add(si)
                d = point_segment_distance(p, *self.segments[si])
                if d < best:
                    best = d
        return best

    def any_within(self, p: tuple[float, float], d: float) -> bool:
        return self.min_distance(p, d) <= d
