"""Trajectory storage: CSV interchange, cleaning, planar point arrays.

A trajectory is an ordered run of timestamped planar points from one vehicle.
CSV interchange uses ``traj_id,timestamp,lon,lat`` rows; internally points
live in the shared planar workspace as numpy arrays.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .geo import Projection


@dataclass
class Trajectory:
    id: str
    times: np.ndarray  # (n,) seconds, strictly increasing
    xy: np.ndarray     # (n, 2) meters in the shared workspace

    def __len__(self) -> int:
        return len(self.times)

    def point(self, i: int) -> tuple[float, float]:
        return float(self.xy[i, 0]), float(self.xy[i, 1])


def read_trajectories_csv(text: str, projection: Projection | None = None,
                          ) -> tuple[list[Trajectory], Projection]:
    """Parse CSV rows into trajectories grouped by id and sorted by time.

    Raises ValueError naming the offending row on malformed input.  When no
    projection is given, one is centered on the centroid of all points.
    """
    rows: list[tuple[str, float, float, float]] = []
    reader = csv.reader(io.StringIO(text))
    for rowno, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if rowno == 1 and [c.strip().lower() for c in row] == ["traj_id", "timestamp", "lon", "lat"]:
            continue
        if len(row) != 4:
            raise ValueError(f"row {rowno}: expected 4 fields traj_id,timestamp,lon,lat")
        try:
            rec = (row[0].strip(), float(row[1]), float(row[2]), float(row[3]))
        except ValueError:
            raise ValueError(f"row {rowno}: malformed numeric field")
        if not (-180.0 <= rec[2] <= 180.0 and -90.0 < rec[3] < 90.0):
            raise ValueError(f"row {rowno}: coordinate out of range ({rec[2]}, {rec[3]})")
        rows.append(rec)

    if projection is None:
        if rows:
            lon0 = sum(r[2] for r in rows) / len(rows)
            lat0 = sum(r[3] for r in rows) / len(rows)
            projection = Projection(round(lon0, 7), round(lat0, 7))
        else:
            projection = Projection(0.0, 0.0)

    grouped: dict[str, list[tuple[float, float, float]]] = {}
    order: list[str] = []
    for traj_id, t, lon, lat in rows:
        if traj_id not in grouped:
            grouped[traj_id] = []
            order.append(traj_id)
        grouped[traj_id].append((t, lon, lat))

    trajs = []
    for traj_id in order:
        pts = sorted(grouped[traj_id], key=lambda p: p[0])
        times = np.array([p[0] for p in pts], dtype=float)
        xy = np.array([projection.project(p[1], p[2]) for p in pts], dtype=float)
        trajs.append(Trajectory(traj_id, times, xy.reshape(len(pts), 2)))
    return trajs, projection


def write_trajectories_csv(trajs: list[Trajectory], projection: Projection) -> str:
    """Serialize trajectories to CSV with 7-decimal coordinates."""
    out = ["traj_id,timestamp,lon,lat"]
    for traj in trajs:
        for i in range(len(traj)):
            lon, lat = projection.unproject(*traj.point(i))
            out.append(f"{traj.id},{traj.times[i]:.3f},{lon:.7f},{lat:.7f}")
    return "\n".join(out) + "\n"


def load_trajectories(path: str, projection: Projection | None = None,
                      ) -> tuple[list[Trajectory], Projection]:
    with open(path, encoding="utf-8") as fh:
        return read_trajectories_csv(fh.read(), projection)


def save_trajectories(trajs: list[Trajectory], projection: Projection, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_trajectories_csv(trajs, projection))


def clean(trajs: list[Trajectory], gap_s: float = 30.0, v_max: float = 40.0,
          ) -> list[Trajectory]:
    """Drop GPS outliers and split stale runs.

    Points implying speed over v_max (m/s) from the previous kept point are
    dropped, then trajectories are split wherever consecutive kept points are
    more than gap_s apart, and pieces with fewer than 2 points are discarded.
    The operation is idempotent: cleaning a cleaned set is the identity.
    """
    out: list[Trajectory] = []
    for traj in trajs:
        keep = [0] if len(traj) else []
        for i in range(1, len(traj)):
            last = keep[-1]
            dt = traj.times[i] - traj.times[last]
            if dt <= 0:
                continue  # duplicate or out-of-order timestamp
            speed = float(np.hypot(*(traj.xy[i] - traj.xy[last]))) / dt
            if speed > v_max:
                continue
            keep.append(i)

        pieces: list[list[int]] = []
        cur: list[int] = []
        for idx in keep:
            if cur and traj.times[idx] - traj.times[cur[-1]] > gap_s:
                pieces.append(cur)
                cur = []
            cur.append(idx)
        if cur:
            pieces.append(cur)
        pieces = [p for p in pieces if len(p) >= 2]

        for k, piece in enumerate(pieces):
            pid = traj.id if len(pieces) == 1 else f"{traj.id}#{k}"
            sel = np.array(piece, dtype=int)
            out.append(Trajectory(pid, traj.times[sel].copy(), traj.xy[sel].copy()))
    return out
