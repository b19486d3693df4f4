"""Spatial index queries checked against full scans of the raw data."""
from __future__ import annotations

import math

import numpy as np
import pytest

from trajmap.spatial import (
    FORWARD,
    REVERSE,
    SegmentIndex,
    build_index,
    query_crossings,
    query_segments,
    walk_to_circle_exit,
)
from trajmap.trajectories import Trajectory

from conftest import make_traj
from oracles import circle_exit_point, crossing_runs, disc_segments, seg_dist


def random_trajs(rng, n_trajs=60, span=400.0) -> list[Trajectory]:
    trajs = []
    for i in range(n_trajs):
        n = int(rng.integers(2, 25))
        start = rng.uniform(-span, span, 2)
        steps = rng.uniform(-40, 40, size=(n, 2))
        xy = start + np.cumsum(steps, axis=0)
        trajs.append(Trajectory(f"t{i}", np.arange(n, dtype=float), xy))
    return trajs


def crossing_tuples(crossings) -> set[tuple[int, int, int]]:
    return {(c.traj, c.enter, c.step) for c in crossings}


def test_empty_input_builds_empty_index():
    index = build_index([])
    assert index.buckets == {}
    assert query_crossings(index, (0, 0), 50.0) == []


def test_segment_spanning_cells_lands_in_each_bucket():
    t = make_traj([(5, 5), (95, 5)])
    index = build_index([t], cell_size=30.0)
    assert len(index.buckets) >= 3
    assert all((0, 0) in [(ti, si) for ti, si in bucket]
               for bucket in index.buckets.values())


def test_query_segments_equals_full_scan(rng):
    trajs = random_trajs(rng)
    index = build_index(trajs, cell_size=30.0)
    for _ in range(50):
        center = tuple(rng.uniform(-400, 400, 2))
        r = float(rng.uniform(5, 80))
        got = {(ti, si) for ti, si in query_segments(index, center, r)}
        assert got == disc_segments(trajs, center, r)


def test_straight_pass_yields_forward_and_reverse_crossing():
    t = make_traj([(x, 0.0) for x in range(-60, 61, 10)])
    index = build_index([t])
    crossings = query_crossings(index, (0, 0), 12.0)
    assert len(crossings) == 2
    steps = sorted(c.step for c in crossings)
    assert steps == [REVERSE, FORWARD]
    fwd = next(c for c in crossings if c.step == FORWARD)
    rev = next(c for c in crossings if c.step == REVERSE)
    # Points at x = -10, 0, 10 are inside: the run spans indices 5..7.
    assert fwd.enter == 5
    assert rev.enter == 7


def test_double_pass_yields_four_crossings():
    # Out and back through the same disc.
    xs = list(range(-60, 61, 10)) + list(range(50, -61, -10))
    t = make_traj([(x, 0.0) for x in xs])
    index = build_index([t])
    crossings = query_crossings(index, (0, 0), 12.0)
    assert len(crossings) == 4
    assert sorted(c.step for c in crossings) == [REVERSE, REVERSE, FORWARD, FORWARD]


def test_crossings_match_full_scan_on_thousand_queries(rng):
    trajs = random_trajs(rng, n_trajs=80)
    index = build_index(trajs, cell_size=30.0)
    for _ in range(1000):
        center = tuple(rng.uniform(-450, 450, 2))
        r = float(rng.uniform(3, 60))
        got = crossing_tuples(query_crossings(index, center, r))
        assert got == set(crossing_runs(trajs, center, r))


def test_crossings_translation_invariant(rng):
    trajs = random_trajs(rng, n_trajs=30)
    shift = np.array([512.0, -1024.0])
    moved = [Trajectory(t.id, t.times, t.xy + shift) for t in trajs]
    index_a = build_index(trajs)
    index_b = build_index(moved)
    for _ in range(100):
        center = rng.uniform(-300, 300, 2)
        r = float(rng.uniform(5, 50))
        got_a = crossing_tuples(query_crossings(index_a, tuple(center), r))
        got_b = crossing_tuples(query_crossings(index_b, tuple(center + shift), r))
        assert got_a == got_b


def test_walk_exit_interpolates_onto_circle():
    t = make_traj([(0, 0), (40, 0)])
    exit_p = walk_to_circle_exit(t, 0, 1, (0, 0), 30.0)
    assert exit_p == pytest.approx((30.0, 0.0))


def test_walk_exit_none_when_trajectory_ends_inside():
    t = make_traj([(0, 0), (10, 0)])
    assert walk_to_circle_exit(t, 0, 1, (0, 0), 30.0) is None


def test_walk_exit_matches_quadratic_solution(rng):
    trajs = random_trajs(rng, n_trajs=40)
    checked = 0
    for traj in trajs:
        center = tuple(traj.xy[0])
        radius = float(rng.uniform(10, 60))
        got = walk_to_circle_exit(traj, 0, 1, center, radius)
        want = circle_exit_point(traj, 0, 1, center, radius)
        if want is None:
            assert got is None
            continue
        assert got == pytest.approx(want, abs=1e-9)
        assert math.dist(got, center) == pytest.approx(radius, abs=1e-6)
        checked += 1
    assert checked >= 10


def test_segment_index_min_distance_matches_scan(rng):
    segs = [(tuple(rng.uniform(-200, 200, 2)), tuple(rng.uniform(-200, 200, 2)))
            for _ in range(80)]
    index = SegmentIndex(cell_size=25.0)
    for a, b in segs:
        index.add(a, b)
    for _ in range(500):
        p = tuple(rng.uniform(-250, 250, 2))
        cap = float(rng.uniform(10, 120))
        want = min(seg_dist(p, a, b) for a, b in segs)
        got = index.min_distance(p, cap)
        if want <= cap:
            assert got == pytest.approx(want, abs=1e-9)
            assert index.any_within(p, cap)
        else:
            assert got > cap or got == math.inf


def test_build_index_rejects_bad_cell_size():
    with pytest.raises(ValueError):
        build_index([], cell_size=0.0)
