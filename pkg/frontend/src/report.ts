/**
 * Render model for anticipation reports.
 *
 * The UI performs no indicator arithmetic: every displayed number comes
 * straight from the API payload. This module only attaches presentation
 * hints (badge classes, bar widths) to the untouched rows.
 */

import type { Overall, ReportDoc, ReportRowDoc } from "./types.js";

export type Badge = "pass" | "fail" | "unknown";

/** Unknown rows get an amber badge, never green. */
export function badgeFor(pass: boolean | null): Badge {
  if (pass === true) return "pass";
  if (pass === false) return "fail";
  return "unknown";
}

export function overallBadge(overall: Overall): Badge {
  if (overall === "pass") return "pass";
  if (overall === "fail") return "fail";
  return "unknown";
}

export interface RenderedRow {
  /** The payload row, verbatim. */
  row: ReportRowDoc;
  badge: Badge;
  /** Gap bar width in percent (presentation only; capped at 100). */
  barWidth: number;
  /** Bars for violations point the other way than margins. */
  barDirection: "over" | "under" | "none";
}

export interface ReportModel {
  candidateId: string;
  overall: Overall;
  overallBadge: Badge;
  rows: RenderedRow[];
  /** Failing rows, worst normalized gap first (ordering uses the
   * server-computed normalized-gap field, nothing recomputed). */
  weaknesses: ReportRowDoc[];
}

export function buildReportModel(report: ReportDoc): ReportModel {
  const rows = report.rows.map((row): RenderedRow => {
    const norm = row["normalized-gap"];
    return {
      row,
      badge: badgeFor(row.pass),
      barWidth: norm === null ? 0 : Math.min(100, Math.abs(norm) * 100),
      barDirection: norm === null ? "none" : norm > 0 ? "over" : "under",
    };
  });
  const weaknesses = report.rows
    .filter((row) => row.pass === false)
    .sort((a, b) => (b["normalized-gap"] ?? 0) - (a["normalized-gap"] ?? 0));
  return {
    candidateId: report["candidate-id"],
    overall: report.overall,
    overallBadge: overallBadge(report.overall),
    rows,
    weaknesses,
  };
}

export function formatBound(bound: ReportRowDoc["bound"]): string {
  if (bound.kind === "between") {
    return `between ${bound.lo} and ${bound.hi}`;
  }
  return `${bound.kind} ${bound.value}`;
}
