import { ApiError } from './api.js';
import type { EditSessionApi } from './api.js';
import { hitTest, render } from './scene.js';
import type { RenderSummary } from './scene.js';
import type {
  BaseFeature,
  SegmentFeature,
  StatusCounts,
  ViewState,
} from './types.js';
import type { CanvasSize, Pixel } from './view.js';
import { boundsOfCoordinates, fitBounds } from './view.js';
import type { StrokeSink } from './scene.js';

export type MouseButton = 'left' | 'right';

/** Everything the app needs from the page, injectable for tests. */
export interface AppPorts {
  sink: StrokeSink;
  size: CanvasSize;
  /** Transient notices: prune results, teleport state, errors. */
  showBanner(text: string, kind: 'info' | 'error'): void;
  /** Persistent counts line under the map. */
  showCounts(counts: StatusCounts): void;
  /** Disable mutating controls while a request is in flight. */
  setBusy(busy: boolean): void;
  /** Move the camera; the browser shell may animate, tests jump. */
  moveView(view: ViewState): void;
}

const DEFAULT_VIEW: ViewState = { center: { lon: 0, lat: 0 }, scale: 2 };

export class EditorApp {
  private base: BaseFeature[] = [];
  private overlay: SegmentFeature[] = [];
  private counts: StatusCounts = { pending: 0, accepted: 0, rejected: 0 };
  private view: ViewState = DEFAULT_VIEW;
  private showRejected = false;
  private busy = false;
  private lastSummary: RenderSummary | null = null;

  constructor(
    private readonly api: EditSessionApi,
    private readonly sessionId: string,
    private readonly ports: AppPorts,
  ) {}

  /** Fetch everything, frame the whole map, draw. */
  async start(): Promise<void> {
    this.base = await this.api.base(this.sessionId);
    await this.refresh();
    const bbox = boundsOfCoordinates([
      ...this.base.map((f) => f.coordinates),
      ...this.overlay.map((s) => s.coordinates),
    ]);
    if (bbox !== null) {
      this.setView(fitBounds(bbox, this.ports.size));
    }
    this.draw();
  }

  viewState(): ViewState {
    return this.view;
  }

  overlaySnapshot(): SegmentFeature[] {
    return this.overlay.map((s) => ({ ...s }));
  }

  summary(): RenderSummary | null {
    return this.lastSummary;
  }

  isBusy(): boolean {
    return this.busy;
  }

  setShowRejected(show: boolean): void {
    this.showRejected = show;
    this.draw();
  }

  /** Draw the current data at an arbitrary camera (animation frames). */
  renderAt(view: ViewState): void {
    render(this.ports.sink, this.ports.size, view, this.base, this.overlay,
           this.showRejected);
  }

  /**
   * Re-fetch overlay and counts, then redraw.
   *
   * On fetch failure the previous scene stays up and the failure becomes a
   * non-blocking banner.
   */
  async refresh(): Promise<void> {
    try {
      this.overlay = await this.api.overlay(this.sessionId);
      this.counts = await this.api.counts(this.sessionId);
    } catch (err) {
      this.ports.showBanner(`refresh failed: ${String(err)}`, 'error');
      return;
    }
    this.draw();
  }

  /** Left accepts, right rejects; the server answers before anything changes. */
  async handleClick(at: Pixel, button: MouseButton): Promise<void> {
    if (this.busy) {
      return;
    }
    const segmentId = hitTest(this.view, this.ports.size, this.overlay, at,
                              this.showRejected);
    if (segmentId === null) {
      return;
    }
    await this.mutate(async () => {
      try {
        await this.api.setStatus(this.sessionId, segmentId,
                                 button === 'left' ? 'accept' : 'reject');
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          this.ports.showBanner(`segment ${segmentId} is gone; refreshed`, 'error');
        } else {
          throw err;
        }
      }
      await this.refresh();
    });
  }

  async handlePrune(): Promise<void> {
    if (this.busy) {
      return;
    }
    await this.mutate(async () => {
      const rejected = await this.api.prune(this.sessionId);
      this.ports.showBanner(`${rejected.length} segments pruned`, 'info');
      await this.refresh();
    });
  }

  async handleTeleport(): Promise<void> {
    if (this.busy) {
      return;
    }
    await this.mutate(async () => {
      const target = await this.api.teleport(this.sessionId);
      if ('empty' in target) {
        this.ports.showBanner('all caught up — no pending segments', 'info');
        return;
      }
      this.setView(fitBounds(target.bbox, this.ports.size, this.view.scale));
      await this.refresh();
    });
  }

  private async mutate(action: () => Promise<void>): Promise<void> {
    this.busy = true;
    this.ports.setBusy(true);
    try {
      await action();
    } finally {
      this.busy = false;
      this.ports.setBusy(false);
    }
  }

  private setView(view: ViewState): void {
    this.view = view;
    this.ports.moveView(view);
  }

  private draw(): void {
    this.lastSummary = render(this.ports.sink, this.ports.size, this.view,
                              this.base, this.overlay, this.showRejected);
    this.ports.showCounts(this.counts);
    if (this.lastSummary.notice !== null) {
      this.ports.showBanner(this.lastSummary.notice, 'info');
    }
  }
}
