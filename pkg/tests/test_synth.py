"""Ground-truth scenario graphs and the GPS trip simulator."""
from __future__ import annotations

import math

import numpy as np
import pytest

from trajmap.graph import RoadGraph
from trajmap.synth import SynthConfig, SynthError, make_ground_truth, simulate_trips

from oracles import seg_dist


# -- scenario graphs ---------------------------------------------------------

def test_straight_road_is_one_edge():
    g = make_ground_truth("straight(500)")
    assert sorted(g.vertices.values()) == [(0.0, 0.0), (500.0, 0.0)]
    assert len(g.edges) == 1


def test_grid_city_layout():
    g = make_ground_truth("grid(2,100)")
    assert len(g.vertices) == 9
    assert len(g.edges) == 12
    # Row-major ids: vertex 4 is the center at (100, 100).
    assert g.vertices[4] == (100.0, 100.0)
    assert g.has_edge(4, 1) and g.has_edge(4, 3) and g.has_edge(4, 5) and g.has_edge(4, 7)


def test_grid_dimensions_scale():
    g = make_ground_truth("grid(6,100)")
    assert len(g.vertices) == 49
    assert len(g.edges) == 84


def test_crossing_roads_share_no_vertex():
    g = make_ground_truth("two_crossing_no_connection")
    assert len(g.vertices) == 4
    assert len(g.edges) == 2
    assert len(g.connected_components()) == 2


def test_unknown_scenario_rejected():
    with pytest.raises(SynthError):
        make_ground_truth("mobius(3)")
    with pytest.raises(SynthError):
        make_ground_truth("straight(-5)")


# -- simulator ---------------------------------------------------------------

def test_noiseless_straight_trip_is_51_regular_points():
    truth = make_ground_truth("straight(500)")
    cfg = SynthConfig("straight(500)", n_trips=1, speed=10.0,
                      sample_interval=1.0, noise_sigma=0.0, rng_seed=0)
    (trip,) = simulate_trips(truth, cfg)
    assert len(trip) == 51
    assert np.allclose(trip.xy[:, 1], 0.0)
    gaps = np.hypot(np.diff(trip.xy[:, 0]), np.diff(trip.xy[:, 1]))
    assert np.allclose(gaps, 10.0, atol=1e-9)
    ends = {tuple(trip.xy[0]), tuple(trip.xy[-1])}
    assert ends == {(0.0, 0.0), (500.0, 0.0)}


def test_trip_times_regular_and_distinct_per_trip():
    truth = make_ground_truth("straight(500)")
    cfg = SynthConfig("straight(500)", n_trips=3, noise_sigma=0.0, rng_seed=0)
    trips = simulate_trips(truth, cfg)
    assert [t.id for t in trips] == ["trip-00000", "trip-00001", "trip-00002"]
    for i, trip in enumerate(trips):
        assert np.allclose(np.diff(trip.times), 1.0)
        assert trip.times[0] == pytest.approx(i * 1e4)


def test_noise_sigma_sets_rms_lateral_deviation():
    truth = make_ground_truth("straight(500)")
    cfg = SynthConfig("straight(500)", n_trips=200, noise_sigma=4.0, rng_seed=1)
    trips = simulate_trips(truth, cfg)
    lateral = np.concatenate([t.xy[:, 1] for t in trips])
    rms = math.sqrt(float(np.mean(lateral ** 2)))
    assert abs(rms - 4.0) <= 0.3


def test_bias_radius_gives_constant_per_trip_offset():
    truth = make_ground_truth("straight(500)")
    cfg = SynthConfig("straight(500)", n_trips=20, noise_sigma=0.0,
                      bias_radius=10.0, rng_seed=2)
    trips = simulate_trips(truth, cfg)
    offsets = []
    for trip in trips:
        dev = trip.xy[:, 1]
        assert np.allclose(dev, dev[0], atol=1e-9), "offset constant within trip"
        assert abs(dev[0]) <= 10.0 + 1e-9
        offsets.append(round(float(dev[0]), 6))
    assert len(set(offsets)) > 1, "offset varies across trips"


def test_same_seed_reproduces_different_seed_differs():
    truth = make_ground_truth("grid(2,100)")
    cfg = SynthConfig("grid(2,100)", n_trips=10, rng_seed=3)
    a = simulate_trips(truth, cfg)
    b = simulate_trips(truth, cfg)
    assert all(np.array_equal(x.xy, y.xy) for x, y in zip(a, b))
    c = simulate_trips(truth, SynthConfig("grid(2,100)", n_trips=10, rng_seed=4))
    assert any(not np.array_equal(x.xy, y.xy) for x, y in zip(a, c))


def test_trips_follow_shortest_paths_on_grid():
    truth = make_ground_truth("grid(3,100)")
    cfg = SynthConfig("grid(3,100)", n_trips=40, noise_sigma=0.0, rng_seed=5)
    for trip in simulate_trips(truth, cfg):
        segs = [(truth.vertices[a], truth.vertices[b]) for a, b in truth.edges]
        for p in trip.xy:
            assert min(seg_dist(tuple(p), a, b) for a, b in segs) <= 1e-6


def test_unroutable_graph_raises_after_budget():
    g = RoadGraph()
    g.add_vertex((0.0, 0.0))
    g.add_vertex((100.0, 0.0))  # no edges: nothing is routable
    with pytest.raises(SynthError):
        simulate_trips(g, SynthConfig("straight(100)", n_trips=3, rng_seed=0))


def test_grid_trips_cover_many_edges():
    truth = make_ground_truth("grid(4,100)")
    cfg = SynthConfig("grid(4,100)", n_trips=300, noise_sigma=0.0, rng_seed=6)
    trips = simulate_trips(truth, cfg)
    covered: set[tuple[int, int]] = set()
    for trip in trips:
        for p in trip.xy:
            for key, a, b in ((k, truth.vertices[k[0]], truth.vertices[k[1]])
                              for k in truth.edges):
                if seg_dist(tuple(p), a, b) <= 1e-6:
                    covered.add(key)
    assert len(covered) >= 0.9 * len(truth.edges)
