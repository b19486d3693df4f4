import type { LonLat, ViewState } from './types.js';

const EARTH_RADIUS_M = 6_371_000;
const METERS_PER_DEG_LAT = (EARTH_RADIUS_M * Math.PI) / 180;

/** Extra room around a teleport target, as a fraction of its span. */
export const FIT_PADDING = 0.2;

export interface Pixel {
  x: number;
  y: number;
}

export interface CanvasSize {
  width: number;
  height: number;
}

function metersPerDegLon(lat: number): number {
  return METERS_PER_DEG_LAT * Math.cos((lat * Math.PI) / 180);
}

/** Project lon/lat into canvas pixels (x right, y down, view center mid-canvas). */
export function lonLatToPixel(view: ViewState, size: CanvasSize, p: LonLat): Pixel {
  const dxMeters = (p.lon - view.center.lon) * metersPerDegLon(view.center.lat);
  const dyMeters = (p.lat - view.center.lat) * METERS_PER_DEG_LAT;
  return {
    x: size.width / 2 + dxMeters / view.scale,
    y: size.height / 2 - dyMeters / view.scale,
  };
}

export function pixelToLonLat(view: ViewState, size: CanvasSize, p: Pixel): LonLat {
  const dxMeters = (p.x - size.width / 2) * view.scale;
  const dyMeters = (size.height / 2 - p.y) * view.scale;
  return {
    lon: view.center.lon + dxMeters / metersPerDegLon(view.center.lat),
    lat: view.center.lat + dyMeters / METERS_PER_DEG_LAT,
  };
}

/**
 * The view that shows the whole bbox plus FIT_PADDING of breathing room.
 *
 * A degenerate bbox (a point) keeps the fallback scale so the invariant
 * scale > 0 always holds.
 */
export function fitBounds(
  bbox: [number, number, number, number],
  size: CanvasSize,
  fallbackScale = 2,
): ViewState {
  const [west, south, east, north] = bbox;
  const center: LonLat = { lon: (west + east) / 2, lat: (south + north) / 2 };
  const spanX = (east - west) * metersPerDegLon(center.lat);
  const spanY = (north - south) * METERS_PER_DEG_LAT;
  const scale = Math.max(
    (spanX * (1 + FIT_PADDING)) / size.width,
    (spanY * (1 + FIT_PADDING)) / size.height,
  );
  return { center, scale: scale > 0 ? scale : fallbackScale };
}

/** Smallest bbox covering every endpoint, or null when there are none. */
export function boundsOfCoordinates(
  coordinateLists: [number, number][][],
): [number, number, number, number] | null {
  let west = Infinity;
  let south = Infinity;
  let east = -Infinity;
  let north = -Infinity;
  for (const coords of coordinateLists) {
    for (const [lon, lat] of coords) {
      west = Math.min(west, lon);
      south = Math.min(south, lat);
      east = Math.max(east, lon);
      north = Math.max(north, lat);
    }
  }
  if (west > east) {
    return null;
  }
  return [west, south, east, north];
}

/** Distance in pixels from a point to the segment a-b. */
export function pixelSegmentDistance(p: Pixel, a: Pixel, b: Pixel): number {
  const abx = b.x - a.x;
  const aby = b.y - a.y;
  const lengthSq = abx * abx + aby * aby;
  let t = 0;
  if (lengthSq > 0) {
    t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / lengthSq;
    t = Math.max(0, Math.min(1, t));
  }
  const cx = a.x + t * abx;
  const cy = a.y + t * aby;
  return Math.hypot(p.x - cx, p.y - cy);
}
