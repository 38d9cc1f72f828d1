/**
 * Dashboard state: one selected subject, its applicable KPIs with their
 * latest values. Values land verbatim from /evaluate responses;
 * not-computable results surface as rows with the server's reason.
 */

import { ApiClient, ApiError } from "./api.js";
import type { EntityId } from "./types.js";

export interface KpiReading {
  kpiId: string;
  value: number | null;
  unit: string | null;
  reason: string | null;
}

export class DashboardView {
  selectedSubject: EntityId | null = null;
  readings: KpiReading[] = [];

  async select(
    subject: EntityId,
    api: ApiClient,
    window?: { start: number; end: number },
  ): Promise<KpiReading[]> {
    const applicable = await api.applicableKpis(subject);
    const readings: KpiReading[] = [];
    for (const kpiId of applicable["kpi-ids"]) {
      try {
        const value = await api.evaluate({ kpi: kpiId, subject, window });
        readings.push({
          kpiId,
          value: value.value,
          unit: value.unit,
          reason: null,
        });
      } catch (err) {
        if (err instanceof ApiError && err.code === "not-computable") {
          readings.push({ kpiId, value: null, unit: null, reason: err.message });
        } else {
          throw err;
        }
      }
    }
    this.selectedSubject = subject;
    this.readings = readings;
    return readings;
  }
}
