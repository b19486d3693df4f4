"""Geometric cleanup of inferred graphs and merging edits into a base map.

Inferred graphs come out topologically sound but geometrically rough:
junction vertices sit off-center and chains wobble around the true road.
Refinement snaps junction clusters to their centroid, smooths and simplifies
degree-2 chains, and drops tiny floating components.  Edges carrying
base-map provenance are never modified.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .geo import dist
from .graph import RoadGraph, chain_length, degree2_chains, edge_key
from .baseline import _simplify_chain


@dataclass(frozen=True)
class RefineConfig:
    junction_snap: float = 15.0
    simplify_tol: float = 3.0
    smooth_window: int = 3
    min_component_len: float = 50.0


def _base_vertices(graph: RoadGraph) -> set[int]:
    out: set[int] = set()
    for (a, b), data in graph.edges.items():
        if data.provenance == "base-map":
            out.add(a)
            out.add(b)
    return out


def snap_junctions(graph: RoadGraph, cfg: RefineConfig) -> RoadGraph:
    """Merge clusters of nearby junction vertices to their centroid.

    Junctions are vertices of degree >= 3; clusters are transitive closures of
    pairs within junction_snap.  Repeats until no pair remains, so the result
    is a fixed point: snapping twice equals snapping once.
    """
    g = graph.copy()
    frozen = _base_vertices(g)
    while True:
        junctions = sorted(v for v in g.vertices
                           if g.degree(v) >= 3 and v not in frozen)
        parent = {v: v for v in junctions}

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        merged_any = False
        for i, a in enumerate(junctions):
            for b in junctions[i + 1:]:
                if dist(g.vertices[a], g.vertices[b]) <= cfg.junction_snap:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
                        merged_any = True
        if not merged_any:
            return g

        clusters: dict[int, list[int]] = {}
        for v in junctions:
            clusters.setdefault(find(v), []).append(v)
        for root, members in sorted(clusters.items()):
            if len(members) < 2:
                continue
            cx = sum(g.vertices[v][0] for v in members) / len(members)
            cy = sum(g.vertices[v][1] for v in members) / len(members)
            g.vertices[root] = (cx, cy)
            for v in members:
                if v == root:
                    continue
                for nb in sorted(g.neighbors(v)):
                    data = g.edges[edge_key(v, nb)]
                    g.remove_edge(v, nb)
                    if nb == root or nb in members:
                        continue  # collapses inside the cluster
                    if g.has_edge(root, nb):
                        kept = g.edges[edge_key(root, nb)]
                        kept.support = max(kept.support, data.support)
                    else:
                        g.add_edge(root, nb, support=data.support,
                                   provenance=data.provenance)
                g.remove_vertex(v)


def _smooth_positions(coords: list[tuple[float, float]], window: int,
                      cap: float) -> list[tuple[float, float]]:
    half = max(1, window) // 2
    out = list(coords)
    for i in range(1, len(coords) - 1):
        lo, hi = max(0, i - half), min(len(coords) - 1, i + half)
        n = hi - lo + 1
        mx = sum(c[0] for c in coords[lo:hi + 1]) / n
        my = sum(c[1] for c in coords[lo:hi + 1]) / n
        dx, dy = mx - coords[i][0], my - coords[i][1]
        d = (dx * dx + dy * dy) ** 0.5
        if d > cap > 0:
            dx, dy = dx * cap / d, dy * cap / d
        out[i] = (coords[i][0] + dx, coords[i][1] + dy)
    return out


def refine_geometry(graph: RoadGraph, cfg: RefineConfig) -> RoadGraph:
    """Snap junctions, smooth and simplify chains, drop floating fragments.

    Chain interiors move by at most simplify_tol under the moving average
    (anchors stay fixed), then Douglas-Peucker at simplify_tol prunes
    redundant vertices.  Components shorter than min_component_len with no
    base-map edge are removed.  Base-map geometry is never altered.
    """
    g = snap_junctions(graph, cfg)

    for chain in degree2_chains(g):
        if len(chain) < 3:
            continue
        if any(g.edges[edge_key(a, b)].provenance == "base-map"
               for a, b in zip(chain, chain[1:])):
            continue
        coords = [g.vertices[v] for v in chain]
        smoothed = _smooth_positions(coords, cfg.smooth_window, cfg.simplify_tol)
        for vid, pos in zip(chain[1:-1], smoothed[1:-1]):
            g.vertices[vid] = pos
        kept = _simplify_chain(g, chain, cfg.simplify_tol)
        support = min(g.edges[edge_key(a, b)].support for a, b in zip(chain, chain[1:]))
        provenances = {g.edges[edge_key(a, b)].provenance for a, b in zip(chain, chain[1:])}
        provenance = provenances.pop() if len(provenances) == 1 else "refined"
        for a, b in zip(chain, chain[1:]):
            g.remove_edge(a, b)
        for vid in chain[1:-1]:
            if vid not in kept and g.degree(vid) == 0:
                g.remove_vertex(vid)
        for a, b in zip(kept, kept[1:]):
            if not g.has_edge(a, b):
                g.add_edge(a, b, support=support, provenance=provenance)

    for comp in g.connected_components():
        if any(g.edges[k].provenance == "base-map" for k in g.edges
               if k[0] in comp and k[1] in comp):
            continue
        length = sum(g.edge_length(k) for k in g.edges
                     if k[0] in comp and k[1] in comp)
        if length < cfg.min_component_len:
            for vid in comp:
                g.remove_vertex(vid)
    return g


def merge_into_base(base: RoadGraph, segments: Iterable[tuple],
                    weld_radius: float = 15.0) -> RoadGraph:
    """Insert accepted segments into a copy of the base graph.

    Each segment is (pos_a, pos_b, support, provenance).  Endpoints within
    weld_radius of a base vertex weld to it; other endpoints become new
    vertices, shared exactly across segments.  Base vertices and edges are
    never moved or removed, so the base stays an exact subgraph.
    """
    out = base.copy()
    base_vids = sorted(base.vertices)
    inserted: dict[tuple[float, float], int] = {}

    def resolve(pos: tuple[float, float]) -> int:
        best, best_d = None, weld_radius
        for vid in base_vids:
            d = dist(pos, base.vertices[vid])
            if d < best_d:
                best, best_d = vid, d
        if best is not None:
            return best
        key = (pos[0], pos[1])
        if key not in inserted:
            inserted[key] = out.add_vertex(pos)
        return inserted[key]

    for pos_a, pos_b, support, provenance in segments:
        u, v = resolve(tuple(pos_a)), resolve(tuple(pos_b))
        if u == v or out.has_edge(u, v):
            continue
        out.add_edge(u, v, support=support, provenance=provenance)
    return out
