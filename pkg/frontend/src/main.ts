/**
 * Page bootstrap: wires the draft editor, anticipation panel, dashboard,
 * and alert feed to the DOM. All state logic lives in the imported
 * modules; this file only binds events and swaps innerHTML.
 */

import { ApiClient, ApiError } from "./api.js";
import { AlertFeed, storageCursor } from "./alerts.js";
import { CandidateDraft, knownEntities } from "./draft.js";
import { DashboardView } from "./dashboard.js";
import { buildReportModel } from "./report.js";
import {
  escapeHtml,
  renderAlerts,
  renderConnectionBanner,
  renderReadings,
  renderReport,
} from "./render.js";
import type { CandidateDoc, GraphDoc } from "./types.js";

const POLL_INTERVAL_MS = 3000;

// Same-origin by default; a static file server can point elsewhere with ?api=
const apiBase = new URLSearchParams(location.search).get("api") ?? "";
const api = new ApiClient(apiBase);
const feed = new AlertFeed(storageCursor("sovobe-alert-cursor", localStorage));
const dashboard = new DashboardView();

let graph: GraphDoc;
let draft: CandidateDraft;
const snapshots: CandidateDoc[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setError(message: string | null): void {
  el("error-box").innerHTML = message
    ? `<div class="error-banner">${escapeHtml(message)}</div>`
    : "";
}

function initialDraft(g: GraphDoc): CandidateDraft {
  const vo = g.vos[0];
  if (!vo) {
    return new CandidateDraft("draft-1", new Set(), [], []);
  }
  const processes = g.processes.filter((p) => (vo.processes ?? []).includes(p.id));
  const providerOf = new Map(g.services.map((s) => [s.id, s.provider]));
  return new CandidateDraft(
    `draft-${vo.id.split(":")[1] ?? "1"}`,
    new Set(vo.partners),
    processes.map((p) => ({
      "process-id": p.id,
      assignments: p.services.map((sid) => ({
        service: sid,
        provider: providerOf.get(sid) ?? "",
      })),
    })),
    [],
  );
}

function renderEditor(): void {
  const known = knownEntities(graph);
  const partnerBoxes = graph.partners
    .map((p) => {
      const checked = draft.partners.has(p.id) ? " checked" : "";
      return `<label class="partner-box"><input type="checkbox" data-partner="${p.id}"${checked}> ${escapeHtml(p.id)}</label>`;
    })
    .join("");
  const planRows = draft.plans
    .map((plan) => {
      const assignments = plan.assignments
        .map((a) => {
          const options = [...draft.partners]
            .sort()
            .map(
              (pid) =>
                `<option value="${pid}"${pid === a.provider ? " selected" : ""}>${escapeHtml(pid)}</option>`,
            )
            .join("");
          return `<div class="assignment">${escapeHtml(a.service)} ←
            <select data-service="${a.service}">${options}</select></div>`;
        })
        .join("");
      return `<div class="plan"><strong>${escapeHtml(plan["process-id"])}</strong>${assignments}</div>`;
    })
    .join("");
  const requirements = draft.requirements
    .map(
      (r, i) =>
        `<li>${escapeHtml(r["kpi-id"])} on ${escapeHtml(r.subject)} ` +
        `${escapeHtml(r.bound.kind)} ${r.bound.kind === "between" ? `${r.bound.lo}..${r.bound.hi}` : r.bound.value} ` +
        `<button data-drop-req="${i}">✕</button></li>`,
    )
    .join("");
  el("editor").innerHTML = `
    <div class="dirty-state">${draft.dirty ? "draft modified — report below is stale" : "draft in sync"}</div>
    <h3>Partners</h3><div class="partner-grid">${partnerBoxes}</div>
    <h3>Service assignments</h3>${planRows || '<div class="empty-state">no planned processes</div>'}
    <h3>Requirements</h3><ul class="requirements">${requirements || "<li class='empty-state'>none yet</li>"}</ul>`;

  el("editor").querySelectorAll("input[data-partner]").forEach((box) => {
    box.addEventListener("change", (event) => {
      const input = event.target as HTMLInputElement;
      const partner = input.dataset.partner!;
      const result = input.checked
        ? draft.addPartner(partner, known)
        : draft.removePartner(partner);
      if (!result.ok) {
        setError(result.error);
        input.checked = !input.checked;
        return;
      }
      setError(null);
      renderEditor();
      renderReportPanel();
    });
  });
  el("editor").querySelectorAll("select[data-service]").forEach((select) => {
    select.addEventListener("change", (event) => {
      const target = event.target as HTMLSelectElement;
      const result = draft.reassignService(target.dataset.service!, target.value, known);
      if (!result.ok) {
        setError(result.error);
        return;
      }
      setError(null);
      renderEditor();
      renderReportPanel();
    });
  });
  el("editor").querySelectorAll("button[data-drop-req]").forEach((button) => {
    button.addEventListener("click", (event) => {
      const index = Number((event.target as HTMLElement).dataset.dropReq);
      draft.requirements.splice(index, 1);
      draft.dirty = true;
      if (draft.lastReport) draft.reportStale = true;
      renderEditor();
      renderReportPanel();
    });
  });
}

function renderReportPanel(): void {
  if (!draft.lastReport) {
    el("report").innerHTML =
      '<div class="empty-state">No report yet — run anticipation.</div>';
    return;
  }
  el("report").innerHTML = renderReport(
    buildReportModel(draft.lastReport),
    draft.reportStale,
  );
}

async function runAnticipation(): Promise<void> {
  setError(null);
  try {
    const report = await api.anticipate(draft.toCandidateDoc());
    draft.applyReport(report);
    renderEditor();
    renderReportPanel();
  } catch (err) {
    if (err instanceof ApiError) {
      setError(`${err.code}: ${err.message}`);
    } else {
      setError(String(err));
    }
  }
}

async function runCompare(): Promise<void> {
  setError(null);
  if (snapshots.length < 2) {
    setError("snapshot at least two candidates to compare");
    return;
  }
  try {
    const ranking = await api.compare(snapshots);
    // Render in exactly the order the server returned.
    const items = ranking.ranking
      .map((cid, index) => {
        const report = ranking.reports[cid]!;
        const passing = report.rows.filter((r) => r.pass === true).length;
        return `<li>#${index + 1} ${escapeHtml(cid)} — ${passing}/${report.rows.length} passing, overall ${report.overall}</li>`;
      })
      .join("");
    el("compare").innerHTML = `<ol class="ranking">${items}</ol>`;
  } catch (err) {
    setError(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
}

async function pollAlerts(): Promise<void> {
  try {
    await feed.poll(api);
    el("conn").innerHTML = renderConnectionBanner(false);
    el("alerts").innerHTML = renderAlerts(feed.alerts);
  } catch {
    el("conn").innerHTML = renderConnectionBanner(true);
  }
}

function renderSubjectPicker(): void {
  const subjects = [
    ...graph.partners.map((p) => p.id),
    ...graph.processes.map((p) => p.id),
    ...graph.vos.map((v) => v.id),
    ...(Array.isArray(graph.vbe) ? graph.vbe : graph.vbe ? [graph.vbe] : []).map(
      (v) => v.id,
    ),
  ];
  el("subject-picker").innerHTML = subjects
    .map((s) => `<option value="${s}">${escapeHtml(s)}</option>`)
    .join("");
}

async function selectSubject(subject: string): Promise<void> {
  setError(null);
  try {
    await dashboard.select(subject, api);
    el("readings").innerHTML = renderReadings(dashboard.selectedSubject, dashboard.readings);
  } catch (err) {
    setError(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
}

async function boot(): Promise<void> {
  graph = await api.graph();
  draft = initialDraft(graph);
  renderEditor();
  renderReportPanel();
  renderSubjectPicker();
  el("alerts").innerHTML = renderAlerts(feed.alerts);

  el("run-anticipation").addEventListener("click", () => void runAnticipation());
  el("snapshot").addEventListener("click", () => {
    const doc = draft.toCandidateDoc();
    doc["candidate-id"] = `${doc["candidate-id"]}-v${snapshots.length + 1}`;
    snapshots.push(doc);
    el("snapshot-count").textContent = `${snapshots.length} snapshot(s)`;
  });
  el("run-compare").addEventListener("click", () => void runCompare());
  el<HTMLSelectElement>("subject-picker").addEventListener("change", (event) => {
    void selectSubject((event.target as HTMLSelectElement).value);
  });

  await pollAlerts();
  setInterval(() => void pollAlerts(), POLL_INTERVAL_MS);
}

void boot().catch((err) => setError(String(err)));
