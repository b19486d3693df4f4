"""Synthetic ground-truth road graphs and simulated GPS trips over them.

Trips are routed between uniformly sampled vertex pairs along length-weighted
shortest paths (ties spread by a per-trip 1e-6 weight jitter), resampled at a
fixed spacing, and perturbed by isotropic per-point Gaussian noise plus an
optional constant per-trip offset drawn from a disc.  GPS readings are
typically a few meters off and per-unit errors are spatially correlated, which
is what the sigma and bias knobs model.  Everything is deterministic given
rng_seed: trip i draws from its own substream seeded by (rng_seed, i).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .geo import Projection
from .graph import RoadGraph
from .trajectories import Trajectory


class SynthError(Exception):
    """Raised when trip generation cannot complete."""


@dataclass
class SynthConfig:
    graph_kind: str
    n_trips: int
    speed: float = 10.0
    sample_interval: float = 1.0
    noise_sigma: float = 4.0
    bias_radius: float = 0.0
    rng_seed: int = 0


def make_ground_truth(kind: str) -> RoadGraph:
    """Build a named synthetic truth graph in a fresh planar workspace.

    Kinds: ``straight(length_m)``, ``grid(n_blocks,block_m)``, and
    ``two_crossing_no_connection`` (two perpendicular roads that cross in the
    plane without sharing a vertex, like a grade-separated interchange).
    """
    g = RoadGraph(projection=Projection(0.0, 0.0))
    m = re.fullmatch(r"straight\((\d+(?:\.\d+)?)\)", kind)
    if m:
        length = float(m.group(1))
        a = g.add_vertex((0.0, 0.0))
        b = g.add_vertex((length, 0.0))
        g.add_edge(a, b)
        return g
    m = re.fullmatch(r"grid\((\d+),(\d+(?:\.\d+)?)\)", kind)
    if m:
        n, block = int(m.group(1)), float(m.group(2))
        for i in range(n + 1):
            for j in range(n + 1):
                g.add_vertex((j * block, i * block), vid=i * (n + 1) + j)
        for i in range(n + 1):
            for j in range(n + 1):
                vid = i * (n + 1) + j
                if j < n:
                    g.add_edge(vid, vid + 1)
                if i < n:
                    g.add_edge(vid, vid + n + 1)
        return g
    if kind == "two_crossing_no_connection":
        half = 300.0
        a1 = g.add_vertex((-half, 0.0))
        a2 = g.add_vertex((half, 0.0))
        b1 = g.add_vertex((0.0, -half))
        b2 = g.add_vertex((0.0, half))
        g.add_edge(a1, a2)
        g.add_edge(b1, b2)
        return g
    raise SynthError(f"unknown ground-truth kind {kind!r}")


def _route_graph(truth: RoadGraph) -> nx.Graph:
    G = nx.Graph()
    for vid in truth.vertices:
        G.add_node(vid)
    for idx, key in enumerate(sorted(truth.edges)):
        G.add_edge(key[0], key[1], length=truth.edge_length(key), idx=idx)
    return G


def _resample_polyline(points: np.ndarray, spacing: float) -> np.ndarray:
    deltas = np.diff(points, axis=0)
    seg_len = np.hypot(deltas[:, 0], deltas[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    offsets = np.arange(0.0, total + spacing * 1e-9, spacing)
    x = np.interp(offsets, cum, points[:, 0])
    y = np.interp(offsets, cum, points[:, 1])
    return np.column_stack([x, y])


def simulate_trips(truth: RoadGraph, cfg: SynthConfig) -> list[Trajectory]:
    """Simulate cfg.n_trips noisy GPS trips over the truth graph.

    Unroutable or degenerate vertex pairs are resampled; generation fails once
    10 * n_trips sampling attempts have been wasted.
    """
    G = _route_graph(truth)
    vids = sorted(truth.vertices)
    n_edges = G.number_of_edges()
    spacing = cfg.speed * cfg.sample_interval
    if spacing <= 0:
        raise SynthError("speed * sample_interval must be positive")

    trips: list[Trajectory] = []
    failed = 0
    for i in range(cfg.n_trips):
        rng = np.random.default_rng([cfg.rng_seed, i])
        while True:
            s, t = vids[rng.integers(len(vids))], vids[rng.integers(len(vids))]
            jitter = rng.random(n_edges)
            if s != t:
                try:
                    path = nx.dijkstra_path(
                        G, s, t,
                        weight=lambda u, v, d: d["length"] * (1.0 + 1e-6 * jitter[d["idx"]]))
                    break
                except nx.NetworkXNoPath:
                    pass
            failed += 1
            if failed > 10 * cfg.n_trips:
                raise SynthError(
                    f"gave up after {failed} unroutable vertex-pair samples")

        polyline = np.array([truth.vertices[v] for v in path], dtype=float)
        xy = _resample_polyline(polyline, spacing)
        if cfg.bias_radius > 0:
            r = cfg.bias_radius * math.sqrt(rng.random())
            theta = rng.random() * 2.0 * math.pi
            xy = xy + np.array([r * math.cos(theta), r * math.sin(theta)])
        if cfg.noise_sigma > 0:
            xy = xy + rng.normal(0.0, cfg.noise_sigma, size=xy.shape)
        times = i * 1.0e4 + np.arange(len(xy)) * cfg.sample_interval
        trips.append(Trajectory(f"trip-{i:05d}", times, xy))
    return trips
