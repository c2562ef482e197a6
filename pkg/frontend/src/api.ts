/** Thin fetch client for the pipeline service API. All decisions happen
 * server-side; this module only moves JSON and surfaces error codes. */

import type { Alert, FaceEntry, PlateEntry } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'http_error';
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (detail && typeof detail === 'object') {
      code = typeof detail.code === 'string' ? detail.code : code;
      message = typeof detail.message === 'string' ? detail.message : JSON.stringify(detail);
    }
  } catch {
    // non-JSON body: keep the status line
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; frames_processed: number; open_alerts: number }> {
    return this.request('/api/health');
  }

  listAlerts(params?: { status?: string; since_seq?: number }): Promise<Alert[]> {
    const query = new URLSearchParams();
    if (params?.status) query.set('status', params.status);
    if (params?.since_seq !== undefined) query.set('since_seq', String(params.since_seq));
    const suffix = query.size > 0 ? `?${query}` : '';
    return this.request(`/api/alerts${suffix}`);
  }

  acknowledgeAlert(id: number): Promise<Alert> {
    return this.post(`/api/alerts/${id}/ack`);
  }

  dismissAlert(id: number): Promise<Alert> {
    return this.post(`/api/alerts/${id}/dismiss`);
  }

  listPlates(): Promise<PlateEntry[]> {
    return this.request('/api/watchlist/plates');
  }

  addPlate(plate: string, label = ''): Promise<PlateEntry> {
    return this.post('/api/watchlist/plates', { plate, label });
  }

  removePlate(id: string): Promise<{ removed: string }> {
    return this.request(`/api/watchlist/plates/${id}`, { method: 'DELETE' });
  }

  listFaces(): Promise<FaceEntry[]> {
    return this.request('/api/watchlist/faces');
  }

  addFace(personName: string, embedding: number[], linkedPlates: string[]): Promise<FaceEntry> {
    return this.post('/api/watchlist/faces', {
      person_name: personName,
      embedding,
      linked_plates: linkedPlates,
    });
  }

  removeFace(id: string): Promise<{ removed: string }> {
    return this.request(`/api/watchlist/faces/${id}`, { method: 'DELETE' });
  }
}
