import { ApiClient } from './api.js';
import { EditorApp } from './app.js';
import type { AppPorts } from './app.js';
import type { StrokeSink } from './scene.js';
import type { StatusCounts, ViewState } from './types.js';
import type { Pixel } from './view.js';

const ANIMATION_MS = 300;

function element<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing #${id}`);
  }
  return el as T;
}

function canvasSink(canvas: HTMLCanvasElement, ctx: CanvasRenderingContext2D): StrokeSink {
  return {
    clear: () => ctx.clearRect(0, 0, canvas.width, canvas.height),
    strokeSegment: (a, b, color, width) => {
      ctx.beginPath();
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.lineCap = 'round';
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    },
  };
}

async function boot(): Promise<void> {
  const canvas = element<HTMLCanvasElement>('map');
  const banner = element<HTMLDivElement>('banner');
  const countsBar = element<HTMLDivElement>('counts');
  const pruneButton = element<HTMLButtonElement>('prune');
  const teleportButton = element<HTMLButtonElement>('teleport');
  const showRejectedBox = element<HTMLInputElement>('show-rejected');

  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  const ctx = canvas.getContext('2d');
  if (ctx === null) {
    throw new Error('canvas 2d context unavailable');
  }

  const api = new ApiClient('');
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get('session');
  if (sessionId === null) {
    const basePath = params.get('base');
    const inferredPath = params.get('inferred');
    if (basePath === null || inferredPath === null) {
      banner.textContent =
        'open with ?session=ID or ?base=/path/base.graph&inferred=/path/inferred.graph';
      banner.className = 'error';
      return;
    }
    sessionId = await api.createSession(basePath, inferredPath);
    params.set('session', sessionId);
    history.replaceState(null, '', `?${params.toString()}`);
  }

  let bannerTimer: number | undefined;
  let presented: ViewState | null = null;

  const ports: AppPorts = {
    sink: canvasSink(canvas, ctx),
    size: { width: canvas.width, height: canvas.height },
    showBanner: (text, kind) => {
      banner.textContent = text;
      banner.className = kind;
      window.clearTimeout(bannerTimer);
      if (kind === 'info') {
        bannerTimer = window.setTimeout(() => {
          banner.textContent = '';
          banner.className = '';
        }, 4000);
      }
    },
    showCounts: (counts: StatusCounts) => {
      countsBar.textContent =
        `pending ${counts.pending} · accepted ${counts.accepted} · rejected ${counts.rejected}`;
    },
    setBusy: (busy) => {
      pruneButton.disabled = busy;
      teleportButton.disabled = busy;
      canvas.style.cursor = busy ? 'wait' : 'crosshair';
    },
    moveView: (target) => {
      const from = presented;
      presented = target;
      if (from === null) {
        return;
      }
      const started = performance.now();
      const step = (now: number) => {
        const t = Math.min(1, (now - started) / ANIMATION_MS);
        const k = t * (2 - t);
        app.renderAt({
          center: {
            lon: from.center.lon + (target.center.lon - from.center.lon) * k,
            lat: from.center.lat + (target.center.lat - from.center.lat) * k,
          },
          scale: from.scale + (target.scale - from.scale) * k,
        });
        if (t < 1) {
          requestAnimationFrame(step);
        }
      };
      requestAnimationFrame(step);
    },
  };

  const app = new EditorApp(api, sessionId, ports);

  const pixelOf = (event: MouseEvent): Pixel => {
    const rect = canvas.getBoundingClientRect();
    return { x: event.clientX - rect.left, y: event.clientY - rect.top };
  };
  canvas.addEventListener('click', (event) => {
    void app.handleClick(pixelOf(event), 'left');
  });
  canvas.addEventListener('contextmenu', (event) => {
    event.preventDefault();
    void app.handleClick(pixelOf(event), 'right');
  });
  pruneButton.addEventListener('click', () => void app.handlePrune());
  teleportButton.addEventListener('click', () => void app.handleTeleport());
  showRejectedBox.addEventListener('change', () => {
    app.setShowRejected(showRejectedBox.checked);
  });

  await app.start();
}

boot().catch((err) => {
  const banner = document.getElementById('banner');
  if (banner !== null) {
    banner.textContent = String(err);
    banner.className = 'error';
  }
});
