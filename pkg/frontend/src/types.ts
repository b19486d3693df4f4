export interface LonLat {
  lon: number;
  lat: number;
}

/** Camera over the map: center plus meters-per-pixel zoom (always > 0). */
export interface ViewState {
  center: LonLat;
  scale: number;
}

export type SegmentStatus = 'pending' | 'accepted' | 'rejected';

/** One overlay segment, mirroring server state verbatim. */
export interface SegmentFeature {
  segmentId: number;
  /** Two lon/lat endpoints. */
  coordinates: [[number, number], [number, number]];
  status: SegmentStatus;
  support: number;
}

/** One base-map edge (no editable state). */
export interface BaseFeature {
  coordinates: [[number, number], [number, number]];
}

export interface StatusCounts {
  pending: number;
  accepted: number;
  rejected: number;
}

export interface TeleportTarget {
  /** [west, south, east, north] in degrees. */
  bbox: [number, number, number, number];
  centroid: [number, number];
  size_m: number;
}

export type TeleportResponse = TeleportTarget | { empty: true };
