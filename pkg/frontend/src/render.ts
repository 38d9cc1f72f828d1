/**
 * Pure HTML renderers. Everything is a string function so the contract
 * tests can assert on output without a browser; main.ts owns the DOM.
 */

import type { AlertDoc } from "./types.js";
import type { KpiReading } from "./dashboard.js";
import type { ReportModel } from "./report.js";
import { formatBound } from "./report.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function formatValue(value: number | null): string {
  if (value === null) return "n/a";
  return Number.isInteger(value) ? String(value) : value.toPrecision(6);
}

export function renderReport(model: ReportModel, stale: boolean): string {
  const staleBanner = stale
    ? '<div class="stale-banner">draft changed since this report — re-run anticipation</div>'
    : "";
  const rows = model.rows
    .map((r) => {
      const row = r.row;
      const gap = row.gap === null ? "" : ` <span class="gap">gap ${formatValue(row.gap)}</span>`;
      const reason = row.reason
        ? ` <span class="reason">(${escapeHtml(row.reason)})</span>`
        : "";
      const bar =
        r.barDirection === "none"
          ? ""
          : `<div class="gap-bar ${r.barDirection}" style="width:${r.barWidth}%"></div>`;
      return `<tr class="row-${r.badge}">
  <td><span class="badge badge-${r.badge}">${r.badge}</span></td>
  <td>${escapeHtml(row["kpi-id"])}</td>
  <td>${escapeHtml(row.subject)}</td>
  <td class="num">${formatValue(row.value)}${row.unit ? " " + escapeHtml(row.unit) : ""}${reason}</td>
  <td>${escapeHtml(formatBound(row.bound))}${gap}${bar}</td>
</tr>`;
    })
    .join("\n");
  const weaknesses =
    model.weaknesses.length === 0
      ? ""
      : `<div class="weaknesses"><h3>Weaknesses</h3><ol>${model.weaknesses
          .map(
            (w) =>
              `<li>${escapeHtml(w["kpi-id"])} on ${escapeHtml(w.subject)} ` +
              `(normalized gap ${formatValue(w["normalized-gap"])})</li>`,
          )
          .join("")}</ol></div>`;
  return `${staleBanner}
<div class="overall ${stale ? "stale " : ""}badge-${model.overallBadge}">
  ${escapeHtml(model.candidateId)}: ${model.overall.toUpperCase()}
</div>
<table class="report"><thead>
<tr><th></th><th>KPI</th><th>Subject</th><th>Computed</th><th>Expected</th></tr>
</thead><tbody>
${rows}
</tbody></table>
${weaknesses}`;
}

export function renderAlerts(alerts: AlertDoc[]): string {
  if (alerts.length === 0) {
    return '<div class="empty-state">No alerts — all monitored indicators within bounds.</div>';
  }
  const items = alerts
    .map((a) => {
      const observed = a.observed
        ? `${formatValue(a.observed.value)} ${escapeHtml(a.observed.unit)}`
        : `unknown${a.reason ? ` (${escapeHtml(a.reason)})` : ""}`;
      const ratio =
        a["breach-ratio"] === null ? "" : ` breach ${formatValue(a["breach-ratio"])}`;
      return `<li class="alert alert-${a.severity}" data-sequence="${a.sequence}">
  <span class="severity">${a.severity}</span>
  <span class="monitor">${escapeHtml(a["monitor-id"])}</span>
  observed ${observed} (${escapeHtml(formatBound(a.bound))})${ratio}
  <span class="hint">${escapeHtml(a["remediation-hint"])}</span>
</li>`;
    })
    .join("\n");
  return `<ol class="alert-list">${items}</ol>`;
}

export function renderReadings(subject: string | null, readings: KpiReading[]): string {
  if (subject === null) {
    return '<div class="empty-state">Select a subject to see its applicable KPIs.</div>';
  }
  if (readings.length === 0) {
    return `<div class="empty-state">No KPIs apply to ${escapeHtml(subject)}.</div>`;
  }
  const rows = readings
    .map((r) => {
      const value =
        r.value === null
          ? `n/a <span class="reason">(${escapeHtml(r.reason ?? "not computable")})</span>`
          : `${formatValue(r.value)}${r.unit ? " " + escapeHtml(r.unit) : ""}`;
      return `<tr><td>${escapeHtml(r.kpiId)}</td><td class="num">${value}</td></tr>`;
    })
    .join("");
  return `<table class="readings"><thead><tr><th>KPI</th><th>Latest</th></tr></thead>
<tbody>${rows}</tbody></table>`;
}

export function renderConnectionBanner(lost: boolean): string {
  return lost
    ? '<div class="conn-banner">connection lost — retrying, the feed resumes without gaps</div>'
    : "";
}
