/** A scripted stand-in for the pipeline service, just enough API surface
 * for the console: alerts, ack/dismiss with the real conflict rules,
 * watchlist endpoints, and a resumable SSE stream the tests can push
 * events into or yank connections from. */

import * as http from 'node:http';
import type { AddressInfo } from 'node:net';
import type { Alert, EventRecord, PlateEntry } from '../src/types.js';

export interface ScriptedServer {
  url: string;
  alerts: Map<number, Alert>;
  plates: PlateEntry[];
  events: EventRecord[];
  requests: string[];
  pushAlert(alert: Alert): void;
  pushEvent(record: EventRecord): void;
  dropStreamConnections(): void;
  close(): Promise<void>;
}

export async function startScriptedServer(): Promise<ScriptedServer> {
  const alerts = new Map<number, Alert>();
  const plates: PlateEntry[] = [];
  const events: EventRecord[] = [];
  const requests: string[] = [];
  const subscribers = new Set<http.ServerResponse>();
  let nextPlateId = 1;

  const sseFrame = (record: EventRecord) =>
    `id: ${record.seq}\ndata: ${JSON.stringify(record)}\n\n`;

  const json = (res: http.ServerResponse, status: number, body: unknown) => {
    res.writeHead(status, { 'Content-Type': 'application/json' });
    res.end(JSON.stringify(body));
  };

  const readBody = (req: http.IncomingMessage): Promise<string> =>
    new Promise((resolve) => {
      let data = '';
      req.on('data', (chunk) => (data += chunk));
      req.on('end', () => resolve(data));
    });

  const server = http.createServer(async (req, res) => {
    const url = new URL(req.url ?? '/', 'http://localhost');
    requests.push(`${req.method} ${url.pathname}`);

    if (req.method === 'GET' && url.pathname === '/api/health') {
      return json(res, 200, { status: 'ok', frames_processed: 0, open_alerts: alerts.size });
    }

    if (req.method === 'GET' && url.pathname === '/api/alerts') {
      const status = url.searchParams.get('status');
      const list = [...alerts.values()].filter((a) => !status || a.status === status);
      return json(res, 200, list);
    }

    const action = url.pathname.match(/^\/api\/alerts\/(\d+)\/(ack|dismiss)$/);
    if (req.method === 'POST' && action) {
      const alert = alerts.get(Number(action[1]));
      if (!alert) {
        return json(res, 404, { detail: { code: 'alert_not_found', alert_id: Number(action[1]) } });
      }
      if (alert.status !== 'open') {
        return json(res, 409, {
          detail: { code: 'alert_not_open', alert_id: alert.alert_id, status: alert.status },
        });
      }
      alert.status = action[2] === 'ack' ? 'acknowledged' : 'dismissed';
      return json(res, 200, alert);
    }

    if (url.pathname === '/api/watchlist/plates') {
      if (req.method === 'GET') return json(res, 200, plates);
      if (req.method === 'POST') {
        let body: { plate?: unknown; label?: unknown };
        try {
          body = JSON.parse(await readBody(req));
        } catch {
          return json(res, 422, { detail: { code: 'bad_body' } });
        }
        if (typeof body.plate !== 'string' || body.plate.length === 0) {
          return json(res, 422, { detail: { code: 'bad_body' } });
        }
        if (plates.some((p) => p.plate === body.plate)) {
          return json(res, 409, {
            detail: { code: 'duplicate_plate', message: `plate ${body.plate} is already watchlisted` },
          });
        }
        const entry: PlateEntry = {
          id: `p${nextPlateId++}`,
          plate: body.plate,
          label: typeof body.label === 'string' ? body.label : '',
        };
        plates.push(entry);
        return json(res, 201, entry);
      }
    }

    if (req.method === 'GET' && url.pathname === '/api/watchlist/faces') {
      return json(res, 200, []);
    }

    if (req.method === 'GET' && url.pathname === '/api/events/stream') {
      const lastRaw = req.headers['last-event-id'];
      const last = typeof lastRaw === 'string' ? Number(lastRaw) : 0;
      res.writeHead(200, {
        'Content-Type': 'text/event-stream',
        'Cache-Control': 'no-cache',
      });
      res.flushHeaders();
      res.write(': connected\n\n');
      for (const record of events) {
        if (record.seq > last) res.write(sseFrame(record));
      }
      subscribers.add(res);
      req.on('close', () => subscribers.delete(res));
      return;
    }

    json(res, 404, { detail: { code: 'not_found', path: url.pathname } });
  });

  await new Promise<void>((resolve) => server.listen(0, '127.0.0.1', resolve));
  const port = (server.address() as AddressInfo).port;

  return {
    url: `http://127.0.0.1:${port}`,
    alerts,
    plates,
    events,
    requests,
    pushAlert(alert: Alert) {
      alerts.set(alert.alert_id, alert);
      this.pushEvent({
        seq: events.length + 1,
        kind: 'alert',
        logical_time_ms: alert.created_at_ms,
        payload: alert as unknown as Record<string, unknown>,
      });
    },
    pushEvent(record: EventRecord) {
      events.push(record);
      for (const res of subscribers) res.write(sseFrame(record));
    },
    dropStreamConnections() {
      for (const res of subscribers) res.destroy();
      subscribers.clear();
    },
    close: () =>
      new Promise<void>((resolve) => {
        for (const res of subscribers) res.destroy();
        subscribers.clear();
        server.close(() => resolve());
      }),
  };
}

let alertCounter = 0;

export function makeAlert(overrides: Partial<Alert> = {}): Alert {
  alertCounter += 1;
  return {
    alert_id: alertCounter,
    kind: 'WATCHLISTED_PLATE',
    severity: 'medium',
    track_id: 1,
    evidence: {
      plate_decision: { kind: 'Exact', distance: 0, matched_entry_id: 'p1' },
      consensus_plate: 'KA01F555',
      face: null,
      frame_span: [1, 3],
      camera_id: 'cam1',
    },
    created_at_ms: alertCounter * 1000,
    status: 'open',
    ...overrides,
  };
}
