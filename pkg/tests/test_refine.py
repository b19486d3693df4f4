"""Junction snapping, chain smoothing, fragment drops, and base merging."""
from __future__ import annotations

import math

import numpy as np
import pytest

from trajmap.graph import RoadGraph
from trajmap.refine import (
    RefineConfig,
    merge_into_base,
    refine_geometry,
    snap_junctions,
)
from trajmap.spatial import build_index
from trajmap.synth import SynthConfig, make_ground_truth, simulate_trips
from trajmap.tracer import GpsOracle, TraceConfig, trace

from conftest import make_graph
from oracles import coverage_fraction, sample_graph_points, seg_dist

CFG = RefineConfig()


def rms_to_truth(graph, truth, spacing=2.0) -> float:
    segs = [(truth.vertices[a], truth.vertices[b]) for a, b in truth.edges]
    pts = sample_graph_points(graph, spacing)
    devs = [min(seg_dist(p, a, b) for a, b in segs) for p in pts]
    return math.sqrt(sum(d * d for d in devs) / len(devs))


def random_graph(rng):
    n = int(rng.integers(8, 15))
    positions = [tuple(p) for p in rng.uniform(0, 300, size=(n, 2))]
    edges = set()
    provenance = {}
    for _ in range(int(rng.integers(n, 2 * n))):
        a, b = rng.choice(n, size=2, replace=False)
        key = (min(int(a), int(b)), max(int(a), int(b)))
        edges.add(key)
        provenance[key] = "base-map" if rng.random() < 0.3 else "traced"
    g = make_graph(positions, [])
    for a, b in sorted(edges):
        g.add_edge(a, b, support=int(rng.integers(0, 9)),
                   provenance=provenance[(a, b)])
    return g


# -- junction snapping -----------------------------------------------------------

def test_two_close_junctions_merge_to_degree_four_midpoint():
    g = make_graph([(0.0, 0.0), (8.0, 0.0), (-20.0, 0.0), (0.0, 20.0),
                    (28.0, 0.0), (8.0, -20.0)],
                   [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)],
                   provenance="traced", support=3)
    out = refine_geometry(g, CFG)
    assert 1 not in out.vertices
    assert out.vertices[0] == pytest.approx((4.0, 0.0))
    assert out.degree(0) == 4
    assert sorted(out.neighbors(0)) == [2, 3, 4, 5]
    assert all(d.support == 3 for d in out.edges.values())


def test_junction_snap_is_idempotent(rng):
    for _ in range(50):
        g = random_graph(rng)
        once = snap_junctions(g, CFG)
        twice = snap_junctions(once, CFG)
        assert sorted(twice.vertices) == sorted(once.vertices)
        for vid, pos in once.vertices.items():
            assert twice.vertices[vid] == pytest.approx(pos, abs=1e-6)
        assert sorted(twice.edges) == sorted(once.edges)


def test_snap_never_moves_base_junctions():
    # A base junction flanked by two snappable inferred junctions keeps its
    # exact position; the inferred pair merges to its own centroid.
    positions = [(100.0, 0.0), (0.0, 0.0), (200.0, 0.0),        # base fork
                 (110.0, 0.0), (112.0, 0.0),                    # inferred pair
                 (110.0, 30.0), (110.0, -30.0), (142.0, 0.0), (112.0, 30.0)]
    g = make_graph(positions, [])
    g.add_edge(0, 1, provenance="base-map")
    g.add_edge(0, 2, provenance="base-map")
    for a, b in [(0, 3), (3, 4), (3, 5), (3, 6), (4, 7), (4, 8)]:
        g.add_edge(a, b, provenance="traced")
    out = snap_junctions(g, CFG)
    assert out.vertices[0] == (100.0, 0.0)
    assert 4 not in out.vertices
    assert out.vertices[3] == pytest.approx((111.0, 0.0))
    assert sorted(out.neighbors(3)) == [0, 5, 6, 7, 8]


# -- full refinement ---------------------------------------------------------------

def test_clean_grid_survives_refinement():
    truth = make_ground_truth("grid(2,100)")
    g = RoadGraph()
    for vid in sorted(truth.vertices):
        g.add_vertex(truth.vertices[vid], vid=vid)
    for (a, b) in sorted(truth.edges):
        g.add_edge(a, b, support=5, provenance="traced")
    out = refine_geometry(g, CFG)
    assert len(out.vertices) == 9
    assert len(out.edges) == 12
    for pos in out.vertices.values():
        assert min(math.dist(pos, p) for p in truth.vertices.values()) \
            <= CFG.simplify_tol + 1e-9
    assert len(out.connected_components()) == 1


def test_refinement_strictly_reduces_rms_deviation():
    truth = make_ground_truth("straight(500)")
    trips = simulate_trips(truth, SynthConfig("straight(500)", n_trips=50,
                                              noise_sigma=4.0, rng_seed=0))
    tcfg = TraceConfig()
    traced = trace(RoadGraph(), [(0.0, 0.0)],
                   GpsOracle(build_index(trips), tcfg), tcfg).graph
    refined = refine_geometry(traced, CFG)
    before = rms_to_truth(traced, truth)
    after = rms_to_truth(refined, truth)
    assert after < before


def test_short_floating_component_dropped_attached_spur_kept():
    g = make_graph([(0.0, 0.0), (100.0, 0.0), (110.0, 0.0),
                    (500.0, 500.0), (510.0, 500.0), (510.0, 510.0)], [])
    g.add_edge(0, 1, provenance="base-map")
    g.add_edge(1, 2, provenance="traced")          # short but base-attached
    for a, b in [(3, 4), (4, 5), (3, 5)]:          # floating 34 m triangle
        g.add_edge(a, b, provenance="traced")
    out = refine_geometry(g, CFG)
    assert set(out.vertices) == {0, 1, 2}
    assert out.has_edge(0, 1) and out.has_edge(1, 2)


def test_base_geometry_passes_through_untouched():
    g = make_graph([(0.0, 0.0), (100.0, 0.0), (200.0, 0.0),
                    (120.0, 5.0), (140.0, -5.0), (160.0, 0.0), (180.0, 0.0)], [])
    g.add_edge(0, 1, support=9, provenance="base-map")
    g.add_edge(1, 2, support=9, provenance="base-map")
    for a, b in [(1, 3), (3, 4), (4, 5), (5, 6)]:
        g.add_edge(a, b, support=2, provenance="traced")
    out = refine_geometry(g, CFG)
    for vid in (0, 1, 2):
        assert out.vertices[vid] == g.vertices[vid]
    for key in ((0, 1), (1, 2)):
        assert out.edges[key].provenance == "base-map"
        assert out.edges[key].support == 9
    # The wiggly inferred chain may lose interior vertices but stays attached.
    comp = [c for c in out.connected_components() if 1 in c]
    assert len(comp) == 1 and 6 in comp[0]


def test_refinement_never_adds_components_or_splits_base(rng):
    for _ in range(50):
        g = random_graph(rng)
        out = refine_geometry(g, CFG)
        assert len(out.connected_components()) <= len(g.connected_components())
        # every base edge survives, and base edges that started together in
        # one component end together in one component
        base_groups = []
        for comp in g.connected_components():
            keys = [k for k, d in g.edges.items()
                    if d.provenance == "base-map" and k[0] in comp]
            if keys:
                base_groups.append(keys)
        comp_of = {}
        for i, comp in enumerate(out.connected_components()):
            for v in comp:
                comp_of[v] = i
        for keys in base_groups:
            homes = set()
            for a, b in keys:
                assert out.edges[(a, b)].provenance == "base-map"
                homes.add(comp_of[a])
                homes.add(comp_of[b])
            assert len(homes) == 1


def test_refine_empty_graph():
    out = refine_geometry(RoadGraph(), CFG)
    assert len(out.vertices) == 0 and len(out.edges) == 0


# -- merging into the base map ------------------------------------------------------

def test_merge_with_no_segments_returns_equal_copy():
    base = make_graph([(0.0, 0.0), (100.0, 0.0)], [(0, 1)], support=4)
    out = merge_into_base(base, [])
    assert out.vertices == base.vertices
    assert sorted(out.edges) == sorted(base.edges)
    out.add_vertex((5.0, 5.0))
    assert len(base.vertices) == 2, "result must be an independent copy"


def test_merge_welds_endpoint_near_base_vertex():
    base = make_graph([(0.0, 0.0), (100.0, 0.0)], [(0, 1)])
    out = merge_into_base(base, [((103.0, 4.0), (150.0, 0.0), 5, "traced")])
    assert len(out.vertices) == 3
    new = (set(out.vertices) - {0, 1}).pop()
    assert out.vertices[new] == (150.0, 0.0)
    assert out.has_edge(1, new)
    assert out.edges[(min(1, new), max(1, new))].support == 5


def test_merge_skips_duplicates_and_collapsed_segments():
    base = make_graph([(0.0, 0.0), (100.0, 0.0)], [(0, 1)], support=4)
    out = merge_into_base(base, [
        ((1.0, 1.0), (99.0, 1.0), 7, "traced"),   # duplicates the base edge
        ((2.0, 0.0), (5.0, 0.0), 7, "traced"),    # both ends weld to vertex 0
    ])
    assert len(out.vertices) == 2
    assert sorted(out.edges) == [(0, 1)]
    assert out.edges[(0, 1)].support == 4


def test_merge_shares_repeated_new_endpoints():
    base = make_graph([(0.0, 0.0)], [])
    out = merge_into_base(base, [
        ((100.0, 0.0), (200.0, 0.0), 2, "traced"),
        ((200.0, 0.0), (300.0, 0.0), 2, "traced"),
    ])
    assert len(out.vertices) == 4  # (200, 0) inserted once, not per segment
    assert len(out.edges) == 2


def test_merge_completes_half_mapped_city():
    truth = make_ground_truth("grid(3,100)")
    base = RoadGraph()
    for vid in sorted(truth.vertices):
        base.add_vertex(truth.vertices[vid], vid=vid)
    vertical = []
    for (a, b) in sorted(truth.edges):
        pa, pb = truth.vertices[a], truth.vertices[b]
        if pa[1] == pb[1]:
            base.add_edge(a, b, provenance="base-map")
        else:
            vertical.append((pa, pb, 3, "traced"))
    merged = merge_into_base(base, vertical)

    base_recall = coverage_fraction(truth, base, 5.0, 15.0)
    merged_recall = coverage_fraction(truth, merged, 5.0, 15.0)
    assert merged_recall >= base_recall + 0.3
    assert merged_recall == 1.0
    # exact-subgraph invariant
    for vid, pos in base.vertices.items():
        assert merged.vertices[vid] == pos
    for key, data in base.edges.items():
        assert merged.edges[key].provenance == data.provenance
    assert len(merged.vertices) == 16
    assert len(merged.edges) == 24
