"""Cell-density baseline: threshold a trajectory count grid, thin, vectorize.

The classic alternative to tracing: count distinct trajectories per grid
cell (exact segment-cell intersection, not just sample points), keep cells at
or above a threshold, skeletonize the mask, and turn the skeleton into a
graph.  Fast and simple, but every cell bridging two unrelated roads welds
them together, which is exactly the failure mode the tracer avoids.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage.measure import label
from skimage.morphology import skeletonize

from .geo import Projection, douglas_peucker_keep
from .graph import RoadGraph, chain_length, degree2_chains, edge_key
from .trajectories import Trajectory


@dataclass
class DensityGrid:
    origin: tuple[float, float]  # lower-left corner of cell (0, 0)
    cell_size: float
    counts: np.ndarray           # (ny, nx) distinct-trajectory counts


def _segment_hits_rect(ax: float, ay: float, bx: float, by: float,
                       x0: float, y0: float, x1: float, y1: float) -> bool:
    # Liang-Barsky clip; boundary touches count as hits.
    dx, dy = bx - ax, by - ay
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, ax - x0), (dx, x1 - ax), (-dy, ay - y0), (dy, y1 - ay)):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            r = q / p
            if p < 0.0:
                if r > t1:
                    return False
                if r > t0:
                    t0 = r
            else:
                if r < t0:
                    return False
                if r < t1:
                    t1 = r
    return True


def density_grid(trajs: list[Trajectory], cell_size: float) -> DensityGrid:
    """Distinct-trajectory count per cell over the data's bounding box."""
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    if not trajs or all(len(t) == 0 for t in trajs):
        return DensityGrid((0.0, 0.0), cell_size, np.zeros((0, 0), dtype=int))
    all_xy = np.vstack([t.xy for t in trajs if len(t)])
    cx0 = int(np.floor(all_xy[:, 0].min() / cell_size))
    cy0 = int(np.floor(all_xy[:, 1].min() / cell_size))
    cx1 = int(np.floor(all_xy[:, 0].max() / cell_size))
    cy1 = int(np.floor(all_xy[:, 1].max() / cell_size))
    counts = np.zeros((cy1 - cy0 + 1, cx1 - cx0 + 1), dtype=int)

    for traj in trajs:
        cells: set[tuple[int, int]] = set()
        xy = traj.xy
        for i in range(len(traj) - 1):
            ax, ay = xy[i]
            bx, by = xy[i + 1]
            lo_x = int(np.floor(min(ax, bx) / cell_size))
            hi_x = int(np.floor(max(ax, bx) / cell_size))
            lo_y = int(np.floor(min(ay, by) / cell_size))
            hi_y = int(np.floor(max(ay, by) / cell_size))
            for cx in range(lo_x, hi_x + 1):
                for cy in range(lo_y, hi_y + 1):
                    if (cx, cy) in cells:
                        continue
                    if _segment_hits_rect(ax, ay, bx, by,
                                          cx * cell_size, cy * cell_size,
                                          (cx + 1) * cell_size, (cy + 1) * cell_size):
                        cells.add((cx, cy))
        for cx, cy in cells:
            counts[cy - cy0, cx - cx0] += 1
    return DensityGrid((cx0 * cell_size, cy0 * cell_size), cell_size, counts)


def _simplify_chain(graph: RoadGraph, path: list[int], tol: float) -> list[int]:
    coords = [graph.vertices[v] for v in path]
    return [path[i] for i in douglas_peucker_keep(coords, tol)]


def _rebuild_with_chains(graph: RoadGraph, tol: float) -> RoadGraph:
    out = RoadGraph(projection=graph.projection)
    for chain in degree2_chains(graph):
        kept = _simplify_chain(graph, chain, tol) if len(chain) > 2 else chain
        for vid in kept:
            if vid not in out.vertices:
                out.add_vertex(graph.vertices[vid], vid=vid)
        support = min(graph.edges[edge_key(a, b)].support for a, b in zip(chain, chain[1:]))
        provenance = graph.edges[edge_key(chain[0], chain[1])].provenance
        for a, b in zip(kept, kept[1:]):
            if not out.has_edge(a, b):
                out.add_edge(a, b, support=support, provenance=provenance)
    for vid in sorted(graph.vertices):
        if graph.degree(vid) == 0 and vid not in out.vertices:
            out.add_vertex(graph.vertices[vid], vid=vid)
    return out


def extract_graph(grid: DensityGrid, threshold: int,
                  projection: Projection | None = None) -> RoadGraph:
    """Threshold the grid, thin the mask, and vectorize the skeleton.

    Mask components smaller than 3 cells are dropped as speckle, matching the
    spur rule.  The skeleton's cells become vertices at cell centers joined by
    8-neighbor adjacency; degree-2 chains collapse under Douglas-Peucker at
    cell_size tolerance and dead-end spurs shorter than 3 cells are removed.
    """
    graph = RoadGraph() if projection is None else RoadGraph(projection=projection)
    mask = grid.counts >= threshold
    if not mask.any():
        return graph

    labels = label(mask, connectivity=2)
    sizes = np.bincount(labels.ravel())
    for comp in range(1, len(sizes)):
        if sizes[comp] < 3:
            mask[labels == comp] = False
    if not mask.any():
        return graph

    skel = skeletonize(mask, method="zhang")
    ox, oy = grid.origin
    cell = grid.cell_size
    cells = [(int(iy), int(ix)) for iy, ix in np.argwhere(skel)]
    cells.sort()
    vid_of = {c: i for i, c in enumerate(cells)}
    for (iy, ix), vid in vid_of.items():
        graph.add_vertex((ox + (ix + 0.5) * cell, oy + (iy + 0.5) * cell), vid=vid)

    for (iy, ix) in cells:
        for dy, dx in ((0, 1), (1, 0)):
            other = (iy + dy, ix + dx)
            if other in vid_of:
                graph.add_edge(vid_of[(iy, ix)], vid_of[other], provenance="baseline")
    for (iy, ix) in cells:
        for dy, dx in ((1, 1), (1, -1)):
            other = (iy + dy, ix + dx)
            if other not in vid_of:
                continue
            # Skip the diagonal when an orthogonal two-step route exists.
            if (iy, ix + dx) in vid_of or (iy + dy, ix) in vid_of:
                continue
            graph.add_edge(vid_of[(iy, ix)], vid_of[other], provenance="baseline")

    graph = _rebuild_with_chains(graph, tol=cell)

    # Dead-end chains shorter than 3 cells are thinning artifacts.
    min_len = 3.0 * cell
    for chain in degree2_chains(graph):
        if chain[0] == chain[-1]:
            continue
        deg_a = graph.degree(chain[0])
        deg_b = graph.degree(chain[-1])
        if min(deg_a, deg_b) == 1 and max(deg_a, deg_b) != 1 \
                and chain_length(graph, chain) < min_len:
            body = chain if deg_a == 1 else chain[::-1]
            for a, b in zip(body, body[1:]):
                graph.remove_edge(a, b)
            for vid in body[:-1]:
                if graph.degree(vid) == 0:
                    graph.remove_vertex(vid)

    graph = _rebuild_with_chains(graph, tol=cell)

    # Thinning can shrink small blobs to fragments; drop anything that short.
    for comp in graph.connected_components():
        length = sum(graph.edge_length(k) for k in graph.edges
                     if k[0] in comp and k[1] in comp)
        if length < min_len:
            for vid in comp:
                graph.remove_vertex(vid)
    return graph
