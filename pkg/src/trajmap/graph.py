"""Undirected road graph with planar coordinates, text and GeoJSON serialization.

The text format is line oriented: ``#`` comment lines, then ``v <id> <lon> <lat>``
vertex lines, then ``e <id1> <id2> [support [provenance]]`` edge lines.  Every
vertex referenced by an edge must appear before it.  Coordinates are printed
with 7 decimal places so identical graphs serialize to identical bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .geo import Projection, bearing

PROVENANCES = ("traced", "baseline", "base-map", "refined")
DEFAULT_PROVENANCE = "base-map"


@dataclass
class EdgeData:
    support: int = 0
    provenance: str = DEFAULT_PROVENANCE


def edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


@dataclass
class RoadGraph:
    """Vertices (planar meters) plus undirected edges with support/provenance."""

    projection: Projection = field(default_factory=lambda: Projection(0.0, 0.0))
    vertices: dict[int, tuple[float, float]] = field(default_factory=dict)
    edges: dict[tuple[int, int], EdgeData] = field(default_factory=dict)
    _adj: dict[int, set[int]] = field(default_factory=dict, repr=False)

    # -- construction ------------------------------------------------------

    def add_vertex(self, pos: tuple[float, float], vid: int | None = None) -> int:
        if vid is None:
            vid = max(self.vertices, default=-1) + 1
        if vid in self.vertices:
            raise ValueError(f"duplicate vertex id {vid}")
        self.vertices[vid] = (float(pos[0]), float(pos[1]))
        self._adj[vid] = set()
        return vid

    def add_edge(self, a: int, b: int, support: int = 0,
                 provenance: str = DEFAULT_PROVENANCE) -> None:
        if a == b:
            raise ValueError(f"self loop at vertex {a}")
        for vid in (a, b):
            if vid not in self.vertices:
                raise ValueError(f"edge references unknown vertex {vid}")
        key = edge_key(a, b)
        if key in self.edges:
            raise ValueError(f"duplicate edge {key}")
        self.edges[key] = EdgeData(int(support), provenance)
        self._adj[a].add(b)
        self._adj[b].add(a)

    def remove_edge(self, a: int, b: int) -> None:
        key = edge_key(a, b)
        del self.edges[key]
        self._adj[a].discard(b)
        self._adj[b].discard(a)

    def remove_vertex(self, vid: int) -> None:
        for other in list(self._adj[vid]):
            self.remove_edge(vid, other)
        del self._adj[vid]
        del self.vertices[vid]

    def copy(self) -> "RoadGraph":
        g = RoadGraph(projection=self.projection)
        g.vertices = dict(self.vertices)
        g.edges = {k: EdgeData(d.support, d.provenance) for k, d in self.edges.items()}
        g._adj = {v: set(s) for v, s in self._adj.items()}
        return g

    # -- queries -----------------------------------------------------------

    def has_edge(self, a: int, b: int) -> bool:
        return edge_key(a, b) in self.edges

    def neighbors(self, vid: int) -> set[int]:
        return self._adj[vid]

    def degree(self, vid: int) -> int:
        return len(self._adj[vid])

    def edge_length(self, key: tuple[int, int]) -> float:
        (ax, ay), (bx, by) = self.vertices[key[0]], self.vertices[key[1]]
        return math.hypot(bx - ax, by - ay)

    def total_length(self) -> float:
        return sum(self.edge_length(k) for k in self.edges)

    def incident_bearings(self, vid: int) -> list[float]:
        """Bearings of every edge leaving vid, degrees CCW from east."""
        origin = self.vertices[vid]
        return [bearing(origin, self.vertices[n]) for n in sorted(self._adj[vid])]

    def connected_components(self) -> list[set[int]]:
        """Components as vertex-id sets, in ascending order of smallest member."""
        seen: set[int] = set()
        comps: list[set[int]] = []
        for start in sorted(self.vertices):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                cur = stack.pop()
                for nxt in self._adj[cur]:
                    if nxt not in comp:
                        comp.add(nxt)
                        stack.append(nxt)
            seen |= comp
            comps.append(comp)
        return comps

    def segments(self) -> Iterator[tuple[tuple[int, int], tuple[float, float], tuple[float, float]]]:
        """Yield (edge key, endpoint a, endpoint b) for every edge."""
        for key in self.edges:
            yield key, self.vertices[key[0]], self.vertices[key[1]]


def reproject(graph: RoadGraph, projection: Projection) -> RoadGraph:
    """The same graph expressed in another projection's planar frame."""
    if projection == graph.projection:
        return graph
    out = graph.copy()
    out.projection = projection
    for vid, pos in graph.vertices.items():
        out.vertices[vid] = projection.project(*graph.projection.unproject(*pos))
    return out


def degree2_chains(graph: RoadGraph) -> list[list[int]]:
    """Maximal paths whose interior vertices all have degree 2.

    Endpoints are anchors (degree != 2); components that are pure cycles come
    back as closed paths (first == last) anchored at their lowest vertex id.
    Every edge belongs to exactly one chain.
    """
    chains: list[list[int]] = []
    visited: set[tuple[int, int]] = set()

    def walk(start: int, first: int) -> list[int]:
        path = [start, first]
        visited.add(edge_key(start, first))
        while graph.degree(path[-1]) == 2 and path[-1] != path[0]:
            a, b = sorted(graph.neighbors(path[-1]))
            nxt = b if a == path[-2] else a
            if edge_key(path[-1], nxt) in visited:
                break
            visited.add(edge_key(path[-1], nxt))
            path.append(nxt)
        return path

    for anchor in sorted(v for v in graph.vertices if graph.degree(v) != 2):
        for nb in sorted(graph.neighbors(anchor)):
            if edge_key(anchor, nb) not in visited:
                chains.append(walk(anchor, nb))
    for vid in sorted(graph.vertices):
        if graph.degree(vid) != 2:
            continue
        for nb in sorted(graph.neighbors(vid)):
            if edge_key(vid, nb) not in visited:
                chains.append(walk(vid, nb))
    return chains


def chain_length(graph: RoadGraph, path: list[int]) -> float:
    return sum(graph.edge_length(edge_key(a, b)) for a, b in zip(path, path[1:]))


# -- serialization ---------------------------------------------------------


def write_graph(graph: RoadGraph) -> str:
    """Serialize to the text format; deterministic byte-for-byte."""
    lines = ["# road graph"]
    lines.append(f"# origin {graph.projection.origin_lon:.7f} {graph.projection.origin_lat:.7f}")
    for vid in sorted(graph.vertices):
        lon, lat = graph.projection.unproject(*graph.vertices[vid])
        lines.append(f"v {vid} {lon:.7f} {lat:.7f}")
    for (a, b) in sorted(graph.edges):
        d = graph.edges[(a, b)]
        lines.append(f"e {a} {b} {d.support} {d.provenance}")
    return "\n".join(lines) + "\n"


def read_graph(text: str) -> RoadGraph:
    """Parse the text format; raises ValueError naming the offending line."""
    projection: Projection | None = None
    graph: RoadGraph | None = None
    pending: list[tuple[int, int, int, int, str]] = []  # line no, a, b, support, provenance
    raw_vertices: list[tuple[int, int, float, float]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if len(fields) == 3 and fields[0] == "origin":
                try:
                    projection = Projection(float(fields[1]), float(fields[2]))
                except ValueError:
                    raise ValueError(f"line {lineno}: malformed origin comment")
            continue
        fields = line.split()
        if fields[0] == "v":
            if len(fields) != 4:
                raise ValueError(f"line {lineno}: vertex line needs 'v <id> <lon> <lat>'")
            try:
                vid, lon, lat = int(fields[1]), float(fields[2]), float(fields[3])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed vertex line")
            raw_vertices.append((lineno, vid, lon, lat))
        elif fields[0] == "e":
            if len(fields) < 3 or len(fields) > 5:
                raise ValueError(f"line {lineno}: edge line needs 'e <id1> <id2> [support [provenance]]'")
            try:
                a, b = int(fields[1]), int(fields[2])
                support = int(fields[3]) if len(fields) > 3 else 0
            except ValueError:
                raise ValueError(f"line {lineno}: malformed edge line")
            provenance = fields[4] if len(fields) > 4 else DEFAULT_PROVENANCE
            if provenance not in PROVENANCES:
                raise ValueError(f"line {lineno}: unknown provenance {provenance!r}")
            pending.append((lineno, a, b, support, provenance))
        else:
            raise ValueError(f"line {lineno}: unknown record type {fields[0]!r}")

    if projection is None:
        # Files without an origin header get one at the centroid of their vertices.
        if raw_vertices:
            lon0 = sum(v[2] for v in raw_vertices) / len(raw_vertices)
            lat0 = sum(v[3] for v in raw_vertices) / len(raw_vertices)
            projection = Projection(round(lon0, 7), round(lat0, 7))
        else:
            projection = Projection(0.0, 0.0)

    graph = RoadGraph(projection=projection)
    for lineno, vid, lon, lat in raw_vertices:
        try:
            graph.add_vertex(projection.project(lon, lat), vid=vid)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}")
    known = set(graph.vertices)
    for lineno, a, b, support, provenance in pending:
        for vid in (a, b):
            if vid not in known:
                raise ValueError(f"line {lineno}: edge references undefined vertex {vid}")
        try:
            graph.add_edge(a, b, support=support, provenance=provenance)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}")
    return graph


def load_graph(path: str) -> RoadGraph:
    with open(path, encoding="utf-8") as fh:
        return read_graph(fh.read())


def save_graph(graph: RoadGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_graph(graph))


def to_geojson(graph: RoadGraph) -> dict:
    """FeatureCollection with one LineString feature per edge, lon/lat coords."""
    features = []
    for (a, b) in sorted(graph.edges):
        d = graph.edges[(a, b)]
        coords = [
            [round(c, 7) for c in graph.projection.unproject(*graph.vertices[a])],
            [round(c, 7) for c in graph.projection.unproject(*graph.vertices[b])],
        ]
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": {"id1": a, "id2": b, "support": d.support, "provenance": d.provenance},
        })
    return {"type": "FeatureCollection", "features": features}


def geojson_str(graph: RoadGraph) -> str:
    return json.dumps(to_geojson(graph), sort_keys=True)
