/** Read model for the console.
 *
 * State is built from one initial GET plus the event stream; there is no
 * polling. The store never decides anything about alerts itself: it
 * mirrors server state, with a single optimistic touch for ack/dismiss
 * that rolls back if the server says no.
 */

import type { Alert, AlertStatus, EventRecord } from './types.js';
import { SEVERITY_RANK } from './types.js';

export type StoreListener = () => void;

export class AlertStore {
  private alerts = new Map<number, Alert>();
  private listeners: StoreListener[] = [];
  connected = false;
  lastError = '';

  subscribe(listener: StoreListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Replace state from the initial GET /api/alerts. */
  applySnapshot(alerts: Alert[]): void {
    this.alerts = new Map(alerts.map((alert) => [alert.alert_id, alert]));
    this.notify();
  }

  /** Feed one stream record; only alert events touch the read model. */
  applyEvent(record: EventRecord): void {
    if (record.kind !== 'alert') return;
    const alert = record.payload as unknown as Alert;
    const existing = this.alerts.get(alert.alert_id);
    // a replayed alert event must not clobber a later status change
    this.alerts.set(alert.alert_id, existing ? { ...alert, status: existing.status } : alert);
    this.notify();
  }

  setConnected(connected: boolean): void {
    if (this.connected !== connected) {
      this.connected = connected;
      this.notify();
    }
  }

  setStatus(alertId: number, status: AlertStatus): void {
    const alert = this.alerts.get(alertId);
    if (alert) {
      this.alerts.set(alertId, { ...alert, status });
      this.notify();
    }
  }

  get(alertId: number): Alert | undefined {
    return this.alerts.get(alertId);
  }

  /** Severity first (critical, high, medium), then newest first; ids break
   * exact-time ties so the order is total. */
  sorted(status?: AlertStatus): Alert[] {
    const all = [...this.alerts.values()].filter(
      (alert) => status === undefined || alert.status === status,
    );
    return all.sort(
      (a, b) =>
        SEVERITY_RANK[a.severity] - SEVERITY_RANK[b.severity] ||
        b.created_at_ms - a.created_at_ms ||
        b.alert_id - a.alert_id,
    );
  }
}

export class AckDismissError extends Error {
  constructor(
    readonly alertId: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface AlertActions {
  acknowledgeAlert(id: number): Promise<Alert>;
  dismissAlert(id: number): Promise<Alert>;
}

/** Optimistic ack/dismiss: flip locally, roll back and rethrow on failure. */
export async function transition(
  store: AlertStore,
  api: AlertActions,
  alertId: number,
  to: 'acknowledged' | 'dismissed',
): Promise<void> {
  const before = store.get(alertId);
  if (!before) {
    throw new AckDismissError(alertId, 'unknown_alert', `no alert ${alertId} in view`);
  }
  store.setStatus(alertId, to);
  try {
    const updated =
      to === 'acknowledged' ? await api.acknowledgeAlert(alertId) : await api.dismissAlert(alertId);
    store.setStatus(alertId, updated.status);
  } catch (error) {
    store.setStatus(alertId, before.status);
    const code = (error as { code?: string }).code ?? 'network_error';
    throw new AckDismissError(alertId, code, (error as Error).message);
  }
}
