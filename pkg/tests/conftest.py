"""Shared builders for tests: quick trajectories and graphs."""
from __future__ import annotations

import numpy as np
import pytest

from trajmap.graph import RoadGraph
from trajmap.trajectories import Trajectory


def make_traj(points, traj_id: str = "t0", t0: float = 0.0, dt: float = 1.0,
              ) -> Trajectory:
    """Trajectory through the given planar points at a fixed time step."""
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    times = t0 + dt * np.arange(len(xy))
    return Trajectory(traj_id, times, xy)


def make_graph(positions, edges, provenance: str = "base-map",
               support: int = 0) -> RoadGraph:
    """Graph with vertices 0..n-1 at the given positions."""
    g = RoadGraph()
    for pos in positions:
        g.add_vertex(pos)
    for a, b in edges:
        g.add_edge(a, b, support=support, provenance=provenance)
    return g


def comb_graphs() -> tuple[RoadGraph, RoadGraph]:
    """Base gates bracketing a 500 m inferred spine with ten 20 m teeth.

    The only gate-to-gate shortest path is the spine, so a correct prune
    rejects exactly the teeth.
    """
    base = make_graph([(-5.0, 0.0), (505.0, 0.0)], [(0, 1)])
    inferred = RoadGraph()
    for i in range(26):
        inferred.add_vertex((20.0 * i, 0.0))
    for i in range(25):
        inferred.add_edge(i, i + 1, support=4, provenance="traced")
    for k in range(10):
        x = 40.0 + 40.0 * k
        tip = inferred.add_vertex((x, 20.0))
        inferred.add_edge(int(x / 20.0), tip, support=2, provenance="traced")
    return base, inferred


@pytest.fixture
def rng():
    return np.random.default_rng(0)
