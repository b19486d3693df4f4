"""Planar workspace geometry: local projection, bearings, angle binning.

All map geometry is handled in a local equirectangular plane (meters east /
north of a fixed origin).  Angles are degrees counterclockwise from east in
[0, 360).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class Projection:
    """Local equirectangular projection around a fixed lon/lat origin.

    The origin is chosen once per dataset and reused for every conversion so
    that all artifacts share one planar workspace.
    """

    origin_lon: float
    origin_lat: float

    def project(self, lon: float, lat: float) -> tuple[float, float]:
        """Convert degrees lon/lat to meters (x east, y north) of the origin."""
        if not (math.isfinite(lon) and math.isfinite(lat)):
            raise ValueError(f"non-finite coordinate ({lon}, {lat})")
        x = EARTH_RADIUS_M * math.cos(math.radians(self.origin_lat)) * math.radians(lon - self.origin_lon)
        y = EARTH_RADIUS_M * math.radians(lat - self.origin_lat)
        return x, y

    def unproject(self, x: float, y: float) -> tuple[float, float]:
        """Convert planar meters back to degrees lon/lat."""
        lon = self.origin_lon + math.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(self.origin_lat))))
        lat = self.origin_lat + math.degrees(y / EARTH_RADIUS_M)
        return lon, lat


def bearing(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Bearing of b as seen from a, degrees CCW from east in [0, 360)."""
    if a[0] == b[0] and a[1] == b[1]:
        raise ValueError(f"coincident points {a} have no bearing")
    deg = math.degrees(math.atan2(b[1] - a[1], b[0] - a[0]))
    return deg % 360.0


def angle_to_bin(deg: float, n_bins: int) -> int:
    """Map an angle to its histogram bin: floor(deg / (360 / n_bins)) mod n_bins."""
    return int(math.floor((deg % 360.0) / (360.0 / n_bins))) % n_bins


def bin_center(idx: int, n_bins: int) -> float:
    """Center angle of bin idx, degrees."""
    width = 360.0 / n_bins
    return (idx + 0.5) * width


def circular_diff(a: float, b: float) -> float:
    """Smallest absolute angular difference between two bearings, in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Euclidean distance between two planar points."""
    return math.hypot(b[0] - a[0], b[1] - a[1])


def point_segment_distance(p: tuple[float, float], a: tuple[float, float],
                           b: tuple[float, float]) -> float:
    """Exact distance from point p to segment ab."""
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len2
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def douglas_peucker_keep(coords: list[tuple[float, float]], tol: float) -> list[int]:
    """Indices of the points Douglas-Peucker keeps at the given tolerance.

    Endpoints always survive; interior points survive while some point
    deviates more than tol from the chord (farthest-first, ties to the
    earliest index).
    """
    n = len(coords)
    if n <= 2:
        return list(range(n))
    keep = {0, n - 1}
    stack = [(0, n - 1)]
    while stack:
        i0, i1 = stack.pop()
        if i1 <= i0 + 1:
            continue
        best_d, best_j = -1.0, -1
        for j in range(i0 + 1, i1):
            d = point_segment_distance(coords[j], coords[i0], coords[i1])
            if d > best_d:
                best_d, best_j = d, j
        if best_d > tol:
            keep.add(best_j)
            stack.append((i0, best_j))
            stack.append((best_j, i1))
    return sorted(keep)
