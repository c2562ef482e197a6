/** Pure rendering: alerts in, HTML strings out. Keeping this DOM-free
 * makes the sort order and evidence summaries testable without a browser. */

import type { Alert } from './types.js';

export function relativeTime(nowMs: number, thenMs: number): string {
  const delta = Math.max(0, nowMs - thenMs);
  if (delta < 1_000) return 'just now';
  if (delta < 60_000) return `${Math.floor(delta / 1000)}s ago`;
  if (delta < 3_600_000) return `${Math.floor(delta / 60_000)}m ago`;
  if (delta < 86_400_000) return `${Math.floor(delta / 3_600_000)}h ago`;
  return `${Math.floor(delta / 86_400_000)}d ago`;
}

export function evidenceSummary(alert: Alert): string {
  const parts: string[] = [];
  const face = alert.evidence.face;
  if (face) {
    parts.push(`face ${face.entry_id} (d=${face.distance.toFixed(3)})`);
  }
  const plate = alert.evidence.consensus_plate;
  if (plate) {
    const decision = alert.evidence.plate_decision;
    const hit = decision.kind !== 'None' ? ` ${decision.kind.toLowerCase()} hit` : '';
    parts.push(`plate ${plate}${hit}`);
  }
  if (alert.track_id !== null) {
    parts.push(`track ${alert.track_id} @ ${alert.evidence.camera_id}`);
  } else {
    parts.push(`no vehicle @ ${alert.evidence.camera_id}`);
  }
  return parts.join(' · ');
}

function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

export function alertRowHtml(alert: Alert, nowMs: number): string {
  const actions =
    alert.status === 'open'
      ? `<button data-action="ack" data-alert="${alert.alert_id}">ack</button>` +
        `<button data-action="dismiss" data-alert="${alert.alert_id}">dismiss</button>`
      : `<span class="status">${alert.status}</span>`;
  return (
    `<li class="alert ${alert.severity}" data-alert-id="${alert.alert_id}">` +
    `<span class="kind">${alert.kind}</span>` +
    `<span class="severity">${alert.severity}</span>` +
    `<span class="when">${relativeTime(nowMs, alert.created_at_ms)}</span>` +
    `<span class="evidence">${escapeHtml(evidenceSummary(alert))}</span>` +
    `<span class="actions">${actions}</span>` +
    `</li>`
  );
}

export function alertListHtml(alerts: Alert[], nowMs: number): string {
  if (alerts.length === 0) {
    return '<p class="empty">No alerts.</p>';
  }
  return `<ul class="alerts">${alerts.map((a) => alertRowHtml(a, nowMs)).join('')}</ul>`;
}

export function staleBannerHtml(connected: boolean): string {
  return connected
    ? ''
    : '<div class="stale-banner">Event stream disconnected; showing last known state. Retrying…</div>';
}
