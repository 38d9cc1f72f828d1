/**
 * Gap-free alert feed over the polling cursor.
 *
 * The server numbers alerts with a strictly increasing sequence and
 * GET /alerts?from=N returns everything after N. The feed persists its
 * cursor (localStorage in the browser, injectable in tests), so a page
 * reload resumes exactly where the stream left off: no duplicates, no
 * missing alerts.
 */

import type { ApiClient } from "./api.js";
import type { AlertDoc, AlertsResponse } from "./types.js";

export interface CursorStore {
  get(): number;
  set(value: number): void;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function storageCursor(key: string, storage: StorageLike): CursorStore {
  return {
    get: () => {
      const raw = storage.getItem(key);
      const parsed = raw === null ? NaN : Number(raw);
      return Number.isFinite(parsed) && parsed >= 0 ? parsed : 0;
    },
    set: (value: number) => storage.setItem(key, String(value)),
  };
}

export class AlertFeed {
  readonly alerts: AlertDoc[] = [];

  constructor(private readonly store: CursorStore) {}

  get cursor(): number {
    return this.store.get();
  }

  /** Append a response batch in order; returns the newly appended alerts. */
  ingest(response: AlertsResponse): AlertDoc[] {
    const cursor = this.cursor;
    const fresh = response.alerts
      .filter((a) => a.sequence > cursor)
      .sort((a, b) => a.sequence - b.sequence);
    this.alerts.push(...fresh);
    const last = fresh.length > 0 ? fresh[fresh.length - 1]!.sequence : cursor;
    if (last > cursor) {
      this.store.set(last);
    }
    return fresh;
  }

  async poll(api: ApiClient): Promise<AlertDoc[]> {
    return this.ingest(await api.alerts(this.cursor));
  }
}
