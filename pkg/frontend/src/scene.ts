import type { BaseFeature, SegmentFeature, SegmentStatus, ViewState } from './types.js';
import type { CanvasSize, Pixel } from './view.js';
import { lonLatToPixel, pixelSegmentDistance } from './view.js';

export const BASE_COLOR = '#9aa0a6';
export const BASE_WIDTH = 2;
export const OVERLAY_WIDTH = 4;
/** Clicks within this many pixels of a segment hit it. */
export const HIT_RADIUS_PX = 6;

const STATUS_COLORS: Record<SegmentStatus, string> = {
  pending: '#ff8c00',
  accepted: '#1d9a3f',
  rejected: '#d83a3a',
};

/** Drawing surface: the canvas adapter in the browser, a recorder in tests. */
export interface StrokeSink {
  clear(): void;
  strokeSegment(a: Pixel, b: Pixel, color: string, width: number): void;
}

export interface RenderSummary {
  baseDrawn: number;
  overlayDrawn: number;
  pendingCount: number;
  /** Set when there is nothing left for the editor to look at. */
  notice: string | null;
}

/**
 * Color for a segment status, or null when it should not be drawn.
 *
 * Pure function of server-reported status: the scene never shades a segment
 * by any local state.
 */
export function statusColor(status: SegmentStatus, showRejected: boolean): string | null {
  if (status === 'rejected' && !showRejected) {
    return null;
  }
  return STATUS_COLORS[status];
}

export function render(
  sink: StrokeSink,
  size: CanvasSize,
  view: ViewState,
  base: BaseFeature[],
  overlay: SegmentFeature[],
  showRejected: boolean,
): RenderSummary {
  sink.clear();
  for (const feature of base) {
    const [a, b] = feature.coordinates;
    sink.strokeSegment(
      lonLatToPixel(view, size, { lon: a[0], lat: a[1] }),
      lonLatToPixel(view, size, { lon: b[0], lat: b[1] }),
      BASE_COLOR,
      BASE_WIDTH,
    );
  }
  let overlayDrawn = 0;
  let pendingCount = 0;
  for (const segment of overlay) {
    if (segment.status === 'pending') {
      pendingCount += 1;
    }
    const color = statusColor(segment.status, showRejected);
    if (color === null) {
      continue;
    }
    const [a, b] = segment.coordinates;
    sink.strokeSegment(
      lonLatToPixel(view, size, { lon: a[0], lat: a[1] }),
      lonLatToPixel(view, size, { lon: b[0], lat: b[1] }),
      color,
      OVERLAY_WIDTH,
    );
    overlayDrawn += 1;
  }
  return {
    baseDrawn: base.length,
    overlayDrawn,
    pendingCount,
    notice: pendingCount === 0 ? 'no pending segments' : null,
  };
}

/**
 * The visible segment nearest the click, if within HIT_RADIUS_PX.
 *
 * Hidden (rejected, untoggled) segments are not clickable.  Ties go to the
 * higher segment id, which is drawn last and therefore on top.
 */
export function hitTest(
  view: ViewState,
  size: CanvasSize,
  overlay: SegmentFeature[],
  click: Pixel,
  showRejected: boolean,
): number | null {
  let bestId: number | null = null;
  let bestDistance = HIT_RADIUS_PX;
  for (const segment of overlay) {
    if (statusColor(segment.status, showRejected) === null) {
      continue;
    }
    const [a, b] = segment.coordinates;
    const distance = pixelSegmentDistance(
      click,
      lonLatToPixel(view, size, { lon: a[0], lat: a[1] }),
      lonLatToPixel(view, size, { lon: b[0], lat: b[1] }),
    );
    if (distance <= bestDistance) {
      bestDistance = distance;
      bestId = segment.segmentId;
    }
  }
  return bestId;
}
