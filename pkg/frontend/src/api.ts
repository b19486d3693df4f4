import type {
  BaseFeature,
  SegmentFeature,
  SegmentStatus,
  StatusCounts,
  TeleportResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

interface RawFeature {
  geometry: { coordinates: [[number, number], [number, number]] };
  properties: Record<string, unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function segmentOf(feature: RawFeature): SegmentFeature {
  return {
    segmentId: feature.properties['segment_id'] as number,
    coordinates: feature.geometry.coordinates,
    status: feature.properties['status'] as SegmentStatus,
    support: feature.properties['support'] as number,
  };
}

/** What the app needs from the editing service; ApiClient is the real one. */
export interface EditSessionApi {
  base(sessionId: string): Promise<BaseFeature[]>;
  overlay(sessionId: string): Promise<SegmentFeature[]>;
  setStatus(sessionId: string, segmentId: number,
            action: 'accept' | 'reject'): Promise<SegmentFeature>;
  prune(sessionId: string): Promise<number[]>;
  teleport(sessionId: string): Promise<TeleportResponse>;
  counts(sessionId: string): Promise<StatusCounts>;
}

/** Typed client for the editing session HTTP API. */
export class ApiClient implements EditSessionApi {
  constructor(
    private readonly baseUrl = '',
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, `${path}: HTTP ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? '{}' : JSON.stringify(body),
    });
  }

  async createSession(baseGraphPath: string, inferredGraphPath: string): Promise<string> {
    const out = await this.post<{ session_id: string }>('/sessions', {
      base_graph_path: baseGraphPath,
      inferred_graph_path: inferredGraphPath,
    });
    return out.session_id;
  }

  async base(sessionId: string): Promise<BaseFeature[]> {
    const doc = await this.request<{ features: RawFeature[] }>(
      `/sessions/${sessionId}/base`);
    return doc.features.map((f) => ({ coordinates: f.geometry.coordinates }));
  }

  async overlay(sessionId: string): Promise<SegmentFeature[]> {
    const doc = await this.request<{ features: RawFeature[] }>(
      `/sessions/${sessionId}/overlay`);
    return doc.features.map(segmentOf);
  }

  async setStatus(
    sessionId: string,
    segmentId: number,
    action: 'accept' | 'reject',
  ): Promise<SegmentFeature> {
    const feature = await this.post<RawFeature>(
      `/sessions/${sessionId}/segments/${segmentId}/status`, { action });
    return segmentOf(feature);
  }

  async prune(sessionId: string): Promise<number[]> {
    const out = await this.post<{ rejected_ids: number[] }>(
      `/sessions/${sessionId}/prune`);
    return out.rejected_ids;
  }

  teleport(sessionId: string): Promise<TeleportResponse> {
    return this.post<TeleportResponse>(`/sessions/${sessionId}/teleport`);
  }

  counts(sessionId: string): Promise<StatusCounts> {
    return this.request<StatusCounts>(`/sessions/${sessionId}/counts`);
  }
}
