export interface AlertRecord {
  alert_id: number;
  session_id: string;
  backend: string;
  created_at: number;
  level: string;
  summary: string;
  clip_path?: string;
  thumbnail_path?: string;
  extra?: Record<string, unknown>;
}

/**
 * Reverse-chronological alert feed state.
 *
 * Pages from REST backfill and single records pushed over the socket all
 * funnel through merge(), which dedupes by alert_id and keeps the newest-
 * first ordering (created_at desc, alert_id desc on ties) regardless of
 * arrival order, so overlapping pagination can never reorder or duplicate
 * the feed.
 */
export class AlertFeed {
  total = 0;
  private byId = new Map<number, AlertRecord>();
  private ordered: AlertRecord[] = [];

  merge(records: AlertRecord[]): void {
    for (const record of records) {
      this.byId.set(record.alert_id, record);
    }
    this.ordered = [...this.byId.values()].sort(
      (a, b) => b.created_at - a.created_at || b.alert_id - a.alert_id
    );
    this.total = Math.max(this.total, this.ordered.length);
  }

  push(record: AlertRecord): void {
    this.merge([record]);
  }

  list(): readonly AlertRecord[] {
    return this.ordered;
  }

  get(alertId: number): AlertRecord | undefined {
    return this.byId.get(alertId);
  }

  clear(): void {
    this.total = 0;
    this.byId.clear();
    this.ordered = [];
  }
}
