/** Wire types mirrored from the pipeline service API. */

export type AlertKind = 'CONFIRMED_SUSPECT' | 'VEHICLE_SWITCH' | 'WATCHLISTED_PLATE';
export type AlertSeverity = 'critical' | 'high' | 'medium';
export type AlertStatus = 'open' | 'acknowledged' | 'dismissed';

export interface PlateDecisionEvidence {
  kind: 'Exact' | 'Fuzzy' | 'None';
  distance: number;
  matched_entry_id: string | null;
}

export interface AlertEvidence {
  plate_decision: PlateDecisionEvidence;
  consensus_plate: string | null;
  face: { entry_id: string; distance: number } | null;
  frame_span: number[];
  camera_id: string;
}

export interface Alert {
  alert_id: number;
  kind: AlertKind;
  severity: AlertSeverity;
  track_id: number | null;
  evidence: AlertEvidence;
  created_at_ms: number;
  status: AlertStatus;
  seq?: number;
}

export interface EventRecord {
  seq: number;
  kind:
    | 'frame_processed'
    | 'plate_read'
    | 'face_matched'
    | 'track_opened'
    | 'track_closed'
    | 'alert';
  logical_time_ms: number;
  payload: Record<string, unknown>;
}

export interface PlateEntry {
  id: string;
  plate: string;
  label: string;
}

export interface FaceEntry {
  id: string;
  person_name: string;
  embedding?: number[];
  linked_plates: string[];
}

/** Lower rank sorts first. */
export const SEVERITY_RANK: Record<AlertSeverity, number> = {
  critical: 0,
  high: 1,
  medium: 2,
};
