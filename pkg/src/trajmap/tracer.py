"""Iterative road tracing driven by trajectory exit-direction histograms.

The tracer grows a road graph one edge per iteration.  At a vertex it builds
a smoothed polar histogram (64 bins by default) over the bearings at which
nearby trajectories leave a circle around the vertex, finds unexplored peaks,
and steps a fixed distance toward the globally most confident peak.  Tracing
stops when the best remaining confidence falls below a threshold.

Two guards keep grade-separated crossings apart, where roads overlap in the
plane but share no junction:

* arrival gating: once a vertex has incident edges, only crossings that
  arrived roughly along a known road direction are counted, so traffic on an
  unrelated overlapping road cannot open a peak there;
* merge consent: stepping into the catchment of an existing vertex welds to
  it only when that vertex's own gated histogram shows trajectory mass back
  toward the stepping vertex, otherwise the new vertex is deflected to just
  outside the merge radius and tracing continues through.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Protocol

import numpy as np

from .geo import angle_to_bin, bearing, bin_center, circular_diff, dist
from .graph import RoadGraph
from .spatial import TrajIndex, query_crossings, walk_to_circle_exit


@dataclass(frozen=True)
class TraceConfig:
    n_bins: int = 64
    step_d: float = 20.0
    r_match: float = 12.0
    r_hist: float = 30.0
    smooth_sigma_bins: float = 2.0
    conf_threshold: float = 2.0
    merge_radius: float = 10.0
    exclusion_halfwidth: float = 30.0
    max_iterations: int = 100_000

    def __post_init__(self) -> None:
        if self.n_bins < 8:
            raise ValueError("n_bins must be at least 8")
        if self.step_d <= self.merge_radius:
            raise ValueError("step_d must exceed merge_radius")
        if self.r_hist <= self.r_match:
            raise ValueError("r_hist must exceed r_match")


@dataclass
class PolarHistogram:
    n_bins: int
    raw_counts: np.ndarray  # (n_bins,) int crossing counts per exit bin
    bins: np.ndarray        # (n_bins,) smoothed weights, same total mass


class TraceAction(NamedTuple):
    vertex: int
    bin: int
    confidence: float


class StepResult(NamedTuple):
    vertex: int          # endpoint the step reached (new or merged)
    added_edge: bool
    created_vertex: bool


class ConfidenceOracle(Protocol):
    def histogram(self, graph: RoadGraph, vertex: int) -> PolarHistogram: ...


def _ring_kernel(n_bins: int, sigma: float) -> np.ndarray:
    # Circular Gaussian over all bin offsets, normalized to sum 1 so that
    # smoothing preserves total mass exactly.
    offsets = np.arange(n_bins)
    d = np.minimum(offsets, n_bins - offsets)
    w = np.exp(-0.5 * (d / sigma) ** 2)
    return w / w.sum()


def _smooth(raw: np.ndarray, sigma: float) -> np.ndarray:
    n = len(raw)
    kernel = _ring_kernel(n, sigma)
    out = np.zeros(n, dtype=float)
    for j in range(n):
        if kernel[j] != 0.0:
            out += kernel[j] * np.roll(raw, j)
    return out


def crossing_exit_pairs(index: TrajIndex, center: tuple[float, float],
                        cfg: TraceConfig) -> list[tuple[float, float | None]]:
    """(departure bearing, arrival bearing) per crossing within r_match.

    The departure bearing is where the trajectory first exits the r_hist
    circle when walked onward from the crossing; crossings that terminate
    inside contribute nothing and are omitted.  The arrival bearing is the
    corresponding exit when walked the opposite way, or None when the
    trajectory starts inside the circle.
    """
    pairs: list[tuple[float, float | None]] = []
    for crossing in query_crossings(index, center, cfg.r_match):
        traj = index.trajs[crossing.traj]
        out = walk_to_circle_exit(traj, crossing.enter, crossing.step, center, cfg.r_hist)
        if out is None:
            continue
        back = walk_to_circle_exit(traj, crossing.enter, -crossing.step, center, cfg.r_hist)
        pairs.append((bearing(center, out),
                      bearing(center, back) if back is not None else None))
    return pairs


def histogram_from_pairs(pairs: list[tuple[float, float | None]], cfg: TraceConfig,
                         known_bearings: list[float] | None = None) -> PolarHistogram:
    raw = np.zeros(cfg.n_bins, dtype=int)
    for out_deg, back_deg in pairs:
        if known_bearings is not None and back_deg is not None:
            if all(circular_diff(back_deg, kb) > cfg.exclusion_halfwidth
                   for kb in known_bearings):
                continue
        raw[angle_to_bin(out_deg, cfg.n_bins)] += 1
    return PolarHistogram(cfg.n_bins, raw, _smooth(raw, cfg.smooth_sigma_bins))


def compute_polar_histogram(index: TrajIndex, center: tuple[float, float],
                            cfg: TraceConfig,
                            known_bearings: list[float] | None = None,
                            ) -> PolarHistogram:
    """Histogram of trajectory departure directions around a point.

    With known_bearings given, crossings whose arrival direction matches none
    of them (within exclusion_halfwidth) are skipped; by default every
    crossing counts.
    """
    return histogram_from_pairs(crossing_exit_pairs(index, center, cfg), cfg,
                                known_bearings)


def raw_mass_around(hist: PolarHistogram, idx: int) -> float:
    n = hist.n_bins
    return float(sum(hist.raw_counts[(idx + o) % n] for o in range(-2, 3)))


def find_unexplored_peaks(hist: PolarHistogram, explored: list[float],
                          cfg: TraceConfig) -> list[tuple[int, float]]:
    """Qualifying peaks as (bin, confidence), best first.

    A bin qualifies when it is a strict local max of the smoothed weights
    over the +/-2 circular neighborhood (ties go to the lower index), its
    raw mass within +/-2 bins reaches conf_threshold, and its center angle
    is more than exclusion_halfwidth away from every explored bearing.
    Sorted by confidence descending, then bin index ascending.
    """
    n = hist.n_bins
    bins = hist.bins
    out: list[tuple[int, float]] = []
    for i in range(n):
        is_max = True
        for o in (-2, -1, 1, 2):
            j = (i + o) % n
            if bins[j] > bins[i] or (bins[j] == bins[i] and j < i):
                is_max = False
                break
        if not is_max:
            continue
        mass = raw_mass_around(hist, i)
        if mass < cfg.conf_threshold:
            continue
        center = bin_center(i, n)
        if any(circular_diff(center, e) <= cfg.exclusion_halfwidth for e in explored):
            continue
        out.append((i, mass))
    out.sort(key=lambda p: (-p[1], p[0]))
    return out


def best_action(graph: RoadGraph, frontier: set[int], oracle: ConfidenceOracle,
                cfg: TraceConfig,
                extra_explored: dict[int, list[float]] | None = None,
                ) -> TraceAction | None:
    """Most confident unexplored peak across the frontier, or None.

    Ties break toward the lowest vertex id, then the lowest bin index.
    """
    best: TraceAction | None = None
    for vid in sorted(frontier):
        hist = oracle.histogram(graph, vid)
        explored = graph.incident_bearings(vid)
        if extra_explored:
            explored = explored + extra_explored.get(vid, [])
        peaks = find_unexplored_peaks(hist, explored, cfg)
        if not peaks:
            continue
        idx, conf = peaks[0]
        if best is None or conf > best.confidence:
            best = TraceAction(vid, idx, conf)
    return best


def _nearest_vertex_within(graph: RoadGraph, pos: tuple[float, float],
                           radius: float, skip: int | None = None) -> int | None:
    best_vid, best_d = None, radius
    for vid in sorted(graph.vertices):
        if vid == skip:
            continue
        d = dist(pos, graph.vertices[vid])
        if d < best_d:
            best_vid, best_d = vid, d
    return best_vid


def apply_step(graph: RoadGraph, action: TraceAction, cfg: TraceConfig,
               merge_consent: Callable[[int, int], bool] | None = None,
               ) -> StepResult:
    """Extend the graph one step from action.vertex along the bin center.

    A candidate landing within merge_radius of an existing vertex welds to it
    (closing loops and junctions); a would-be duplicate edge is a no-op.  When
    a merge_consent callback is given and vetoes the weld, the new vertex is
    deflected to sit just outside the merge radius so tracing can pass by
    without connecting.
    """
    theta = math.radians(bin_center(action.bin, cfg.n_bins))
    ox, oy = graph.vertices[action.vertex]
    candidate = (ox + cfg.step_d * math.cos(theta), oy + cfg.step_d * math.sin(theta))
    support = int(round(action.confidence))

    target = _nearest_vertex_within(graph, candidate, cfg.merge_radius)
    if target is not None:
        if graph.has_edge(action.vertex, target) or target == action.vertex:
            return StepResult(target, False, False)
        if merge_consent is None or merge_consent(target, action.vertex):
            graph.add_edge(action.vertex, target, support=support, provenance="traced")
            return StepResult(target, True, False)
        tx, ty = graph.vertices[target]
        dx, dy = candidate[0] - tx, candidate[1] - ty
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            dx, dy = candidate[0] - ox, candidate[1] - oy
            norm = math.hypot(dx, dy)
        deflected = (tx + cfg.merge_radius * dx / norm, ty + cfg.merge_radius * dy / norm)
        if _nearest_vertex_within(graph, deflected, cfg.merge_radius, skip=target) is not None:
            return StepResult(target, False, False)
        vid = graph.add_vertex(deflected)
        graph.add_edge(action.vertex, vid, support=support, provenance="traced")
        return StepResult(vid, True, True)

    vid = graph.add_vertex(candidate)
    graph.add_edge(action.vertex, vid, support=support, provenance="traced")
    return StepResult(vid, True, True)


class GpsOracle:
    """Confidence oracle backed by trajectory crossings around each vertex.

    At a vertex with incident edges the histogram is arrival-gated: only
    crossings that arrived within exclusion_halfwidth of a known road
    direction (or that start inside the circle) are counted.  Isolated
    vertices such as fresh seeds count everything.
    """

    def __init__(self, index: TrajIndex, cfg: TraceConfig):
        self.index = index
        self.cfg = cfg
        self._pairs: dict[tuple[int, float, float], list[tuple[float, float | None]]] = {}

    def _pairs_at(self, graph: RoadGraph, vertex: int) -> list[tuple[float, float | None]]:
        x, y = graph.vertices[vertex]
        key = (vertex, x, y)
        if key not in self._pairs:
            self._pairs[key] = crossing_exit_pairs(self.index, (x, y), self.cfg)
        return self._pairs[key]

    def histogram(self, graph: RoadGraph, vertex: int) -> PolarHistogram:
        known = graph.incident_bearings(vertex) or None
        return histogram_from_pairs(self._pairs_at(graph, vertex), self.cfg, known)

    def directed_mass(self, graph: RoadGraph, vertex: int, toward_deg: float) -> float:
        """Gated raw mass within +/-2 bins of the bin containing toward_deg."""
        hist = self.histogram(graph, vertex)
        return raw_mass_around(hist, angle_to_bin(toward_deg, self.cfg.n_bins))


def detect_seeds(index: TrajIndex, k: int, cfg: TraceConfig) -> list[tuple[float, float]]:
    """Up to k trace seeds at the densest distinct-trajectory cells.

    Cells are r_hist wide; they are taken in descending trajectory count with
    non-maximum suppression within 2 * r_hist, and each seed snaps to the mean
    of the trajectory points inside its cell.
    """
    size = cfg.r_hist
    count: dict[tuple[int, int], set[int]] = {}
    pos_sum: dict[tuple[int, int], np.ndarray] = {}
    pos_n: dict[tuple[int, int], int] = {}
    for ti, traj in enumerate(index.trajs):
        cells = np.floor(traj.xy / size).astype(int)
        for (cx, cy), pt in zip(map(tuple, cells), traj.xy):
            count.setdefault((cx, cy), set()).add(ti)
            pos_sum[(cx, cy)] = pos_sum.get((cx, cy), np.zeros(2)) + pt
            pos_n[(cx, cy)] = pos_n.get((cx, cy), 0) + 1

    ranked = sorted(count, key=lambda c: (-len(count[c]), c))
    seeds: list[tuple[float, float]] = []
    centers: list[tuple[float, float]] = []
    for cell in ranked:
        if len(seeds) >= k:
            break
        center = ((cell[0] + 0.5) * size, (cell[1] + 0.5) * size)
        if any(dist(center, c) < 2.0 * size for c in centers):
            continue
        centers.append(center)
        mean = pos_sum[cell] / pos_n[cell]
        seeds.append((float(mean[0]), float(mean[1])))
    return seeds


@dataclass
class TraceResult:
    graph: RoadGraph
    iterations: int
    edges_added: int
    stop_reason: str
    truncated: bool


def trace(base: RoadGraph, seeds: list[tuple[float, float]],
          oracle: GpsOracle, cfg: TraceConfig) -> TraceResult:
    """Grow the most confident road edge per iteration until below threshold.

    Seeds merge into the base graph when within merge_radius of an existing
    vertex; the frontier starts as every vertex and grows with each step.
    Base edges are never removed.  Hits the max_iterations cap set the
    truncated flag.
    """
    graph = base.copy()
    for seed in seeds:
        if _nearest_vertex_within(graph, seed, cfg.merge_radius) is None:
            graph.add_vertex(seed)

    frontier = set(graph.vertices)
    extra_explored: dict[int, list[float]] = {}
    best_peak: dict[int, tuple[float, int] | None] = {}
    dirty = set(frontier)

    def consent(target: int, source: int) -> bool:
        toward = bearing(graph.vertices[target], graph.vertices[source])
        return oracle.directed_mass(graph, target, toward) >= cfg.conf_threshold

    def mark_near(points: list[tuple[float, float]]) -> None:
        reach = cfg.r_hist + cfg.step_d
        for vid in frontier:
            vpos = graph.vertices[vid]
            if any(dist(vpos, p) <= reach for p in points):
                dirty.add(vid)

    iterations = 0
    edges_added = 0
    truncated = False
    while True:
        if iterations >= cfg.max_iterations:
            truncated = True
            stop_reason = "max_iterations"
            break
        for vid in sorted(dirty):
            hist = oracle.histogram(graph, vid)
            explored = graph.incident_bearings(vid) + extra_explored.get(vid, [])
            peaks = find_unexplored_peaks(hist, explored, cfg)
            best_peak[vid] = (peaks[0][1], peaks[0][0]) if peaks else None
        dirty.clear()

        action: TraceAction | None = None
        for vid in sorted(best_peak):
            entry = best_peak[vid]
            if entry is None:
                continue
            conf, idx = entry
            if action is None or conf > action.confidence:
                action = TraceAction(vid, idx, conf)
        if action is None:
            stop_reason = "converged"
            break

        result = apply_step(graph, action, cfg, merge_consent=consent)
        iterations += 1
        if result.added_edge:
            edges_added += 1
            if result.created_vertex:
                frontier.add(result.vertex)
                best_peak[result.vertex] = None
            dirty.update((action.vertex, result.vertex))
            mark_near([graph.vertices[action.vertex], graph.vertices[result.vertex]])
        else:
            extra_explored.setdefault(action.vertex, []).append(
                bin_center(action.bin, cfg.n_bins))
            dirty.add(action.vertex)

    return TraceResult(graph, iterations, edges_added, stop_reason, truncated)
