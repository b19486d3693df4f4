"""Human-in-the-loop editing sessions over an inferred road overlay.

A session holds a read-only base map plus the inferred edges that are not
already on it, each a segment a human can accept or reject.  Bulk helpers
mirror what an operator actually does: prune minor connector edges that no
cross-map route would use, and teleport the viewport between undecided
components.  Every mutation is appended to a JSON-lines action log; replaying
the log reproduces the session state exactly.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import time
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .geo import dist
from .graph import RoadGraph, write_graph
from .refine import merge_into_base

PENDING, ACCEPTED, REJECTED = "pending", "accepted", "rejected"


@dataclass
class OverlaySegment:
    id: int
    a: int                      # inferred-graph vertex ids
    b: int
    a_pos: tuple[float, float]  # base-frame planar coordinates
    b_pos: tuple[float, float]
    support: int
    provenance: str
    status: str = PENDING


@dataclass
class Session:
    id: str
    base: RoadGraph
    inferred: RoadGraph
    merge_radius: float
    segments: dict[int, OverlaySegment]
    cursor: int = 0
    log_path: str | None = None
    events: list[dict] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        out = {PENDING: 0, ACCEPTED: 0, REJECTED: 0}
        for seg in self.segments.values():
            out[seg.status] += 1
        return out


def _is_duplicate_of_base(base: RoadGraph, a_pos, b_pos, merge_radius: float) -> bool:
    for key in base.edges:
        p, q = base.vertices[key[0]], base.vertices[key[1]]
        if (dist(a_pos, p) <= merge_radius and dist(b_pos, q) <= merge_radius) or \
           (dist(a_pos, q) <= merge_radius and dist(b_pos, p) <= merge_radius):
            return True
    return False


def create_session(base: RoadGraph, inferred: RoadGraph, session_id: str,
                   merge_radius: float = 10.0, log_path: str | None = None,
                   ) -> Session:
    """Build the overlay: inferred edges that do not duplicate a base edge.

    An inferred edge duplicates a base edge when both endpoints lie within
    merge_radius of that edge's endpoints.  Segment ids number the remaining
    edges in ascending endpoint-id order, so they are deterministic.
    """
    if inferred.projection != base.projection:
        raise ValueError(
            f"projection mismatch: inferred graph origin {inferred.projection} "
            f"differs from base origin {base.projection}")
    segments: dict[int, OverlaySegment] = {}
    sid = 0
    for key in sorted(inferred.edges):
        a_pos, b_pos = inferred.vertices[key[0]], inferred.vertices[key[1]]
        if _is_duplicate_of_base(base, a_pos, b_pos, merge_radius):
            continue
        data = inferred.edges[key]
        segments[sid] = OverlaySegment(sid, key[0], key[1], a_pos, b_pos,
                                       data.support, data.provenance)
        sid += 1
    return Session(session_id, base, inferred, merge_radius, segments,
                   log_path=log_path)


def _log(session: Session, event: dict) -> None:
    event = {"t": round(time.time(), 3), **event}
    session.events.append(event)
    if session.log_path:
        with open(session.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")


def set_status(session: Session, segment_id: int, action: str,
               source: str = "user") -> OverlaySegment:
    """Accept or reject one segment; repeated calls last-win."""
    if action not in ("accept", "reject"):
        raise ValueError(f"unknown action {action!r}")
    seg = session.segments.get(segment_id)
    if seg is None:
        raise KeyError(f"unknown segment {segment_id}")
    seg.status = ACCEPTED if action == "accept" else REJECTED
    _log(session, {"event": "status", "segment": segment_id,
                   "action": action, "source": source})
    return seg


def _pending_graph(session: Session) -> nx.Graph:
    G = nx.Graph()
    for seg in session.segments.values():
        if seg.status == PENDING:
            length = dist(seg.a_pos, seg.b_pos)
            G.add_edge(seg.a, seg.b, length=length, seg=seg.id)
    return G


def _pending_components(session: Session) -> list[tuple[list[int], float]]:
    """Pending overlay components as (sorted segment ids, total length),
    largest total length first, ties toward the smallest segment id."""
    G = _pending_graph(session)
    comps = []
    for nodes in nx.connected_components(G):
        sub = G.subgraph(nodes)
        segs = sorted(d["seg"] for _, _, d in sub.edges(data=True))
        total = sum(d["length"] for _, _, d in sub.edges(data=True))
        comps.append((segs, total))
    comps.sort(key=lambda c: (-c[1], c[0][0]))
    return comps


def _component_gates(session: Session, sub: nx.Graph) -> list[int]:
    base_pos = [session.base.vertices[v] for v in sorted(session.base.vertices)]
    gates = []
    for v in sorted(sub.nodes):
        pos = session.inferred.vertices[v]
        if any(dist(pos, bp) <= session.merge_radius for bp in base_pos):
            gates.append(v)
    if len(gates) >= 2:
        return gates
    # No two weldable endpoints: fall back to the farthest-apart vertex pair.
    if sub.number_of_nodes() < 2:
        return sorted(sub.nodes)
    best_pair, best_d = None, -1.0
    lengths = dict(nx.all_pairs_dijkstra_path_length(sub, weight="length"))
    for u in sorted(sub.nodes):
        for v in sorted(sub.nodes):
            if v <= u:
                continue
            d = lengths[u].get(v)
            if d is not None and d > best_d:
                best_pair, best_d = (u, v), d
    return list(best_pair) if best_pair else sorted(sub.nodes)[:2]


def prune(session: Session, min_component_len: float = 50.0,
          keep_importance_min: int = 1) -> list[int]:
    """Reject pending edges that no gate-to-gate route needs.

    Gates are component vertices weldable to the base map; every gate pair
    (capped at 200 pairs, sampled deterministically from the session id)
    contributes its shortest path, and pending edges used by fewer than
    keep_importance_min paths are rejected, as are whole pending components
    shorter than min_component_len.  Accepted and rejected segments are
    never touched.
    """
    G = _pending_graph(session)
    rejected: list[int] = []
    for nodes in nx.connected_components(G):
        sub = G.subgraph(nodes)
        seg_ids = sorted(d["seg"] for _, _, d in sub.edges(data=True))
        total = sum(d["length"] for _, _, d in sub.edges(data=True))
        if total < min_component_len:
            rejected.extend(seg_ids)
            continue
        gates = _component_gates(session, sub)
        pairs = list(itertools.combinations(sorted(gates), 2))
        if len(pairs) > 200:
            seed = int.from_bytes(hashlib.sha256(session.id.encode()).digest()[:8], "big")
            rng = np.random.default_rng(seed)
            picks = sorted(rng.choice(len(pairs), size=200, replace=False))
            pairs = [pairs[i] for i in picks]
        importance: dict[int, int] = {sid: 0 for sid in seg_ids}
        for u, v in pairs:
            try:
                path = nx.dijkstra_path(sub, u, v, weight="length")
            except nx.NetworkXNoPath:
                continue
            for a, b in zip(path, path[1:]):
                importance[sub.edges[a, b]["seg"]] += 1
        rejected.extend(sid for sid in seg_ids
                        if importance[sid] < keep_importance_min)

    rejected = sorted(set(rejected))
    for sid in rejected:
        seg = session.segments[sid]
        seg.status = REJECTED
        _log(session, {"event": "status", "segment": sid,
                       "action": "reject", "source": "prune"})
    return rejected


def teleport(session: Session) -> dict:
    """Viewport target for the next undecided component, cycling by size.

    Components are ordered by total pending length descending; the cursor
    walks that list cyclically, so the call after the largest component is
    cleared lands on what is now the largest remaining one.  With nothing
    pending, returns {"empty": True}.
    """
    comps = _pending_components(session)
    if not comps:
        _log(session, {"event": "teleport", "component": None})
        return {"empty": True}
    idx = session.cursor % len(comps)
    session.cursor = idx + 1
    seg_ids, _total = comps[idx]
    xs, ys = [], []
    for sid in seg_ids:
        seg = session.segments[sid]
        xs.extend((seg.a_pos[0], seg.b_pos[0]))
        ys.extend((seg.a_pos[1], seg.b_pos[1]))
    proj = session.base.projection
    west, south = proj.unproject(min(xs), min(ys))
    east, north = proj.unproject(max(xs), max(ys))
    cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)
    lon, lat = proj.unproject(cx, cy)
    _log(session, {"event": "teleport", "component": seg_ids[0]})
    return {"bbox": [west, south, east, north],
            "centroid": [lon, lat],
            "size_m": max(max(xs) - min(xs), max(ys) - min(ys))}


def export_graph(session: Session) -> RoadGraph:
    """Base map plus exactly the accepted overlay segments."""
    accepted = [(seg.a_pos, seg.b_pos, seg.support, seg.provenance)
                for sid, seg in sorted(session.segments.items())
                if seg.status == ACCEPTED]
    return merge_into_base(session.base, accepted)


def export_text(session: Session) -> str:
    return write_graph(export_graph(session))


def replay(base: RoadGraph, inferred: RoadGraph, session_id: str,
           events: list[dict], merge_radius: float = 10.0) -> Session:
    """Rebuild a session from its action log; no events are re-logged."""
    session = create_session(base, inferred, session_id, merge_radius)
    for event in events:
        if event.get("event") == "status":
            seg = session.segments[event["segment"]]
            seg.status = ACCEPTED if event["action"] == "accept" else REJECTED
        elif event.get("event") == "teleport":
            comps = _pending_components(session)
            if comps:
                session.cursor = (session.cursor % len(comps)) + 1
    return session
