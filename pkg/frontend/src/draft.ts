/**
 * Client-side candidate draft: the editable mirror of a candidate VO.
 *
 * Every mutation marks the draft dirty and its last report stale; the
 * report panel must never present a stale report as current. Mutations
 * validate against entities known from the graph endpoint and surface
 * violations inline instead of sending a broken candidate to the server.
 */

import type {
  AssignmentDoc,
  CandidateDoc,
  EntityId,
  GraphDoc,
  ProcessPlanDoc,
  ReportDoc,
  RequirementDoc,
} from "./types.js";

export type EditResult =
  | { ok: true; changed: boolean }
  | { ok: false; error: string };

/** Entities the graph endpoint reported; the draft validates against it. */
export interface KnownEntities {
  partners: Set<EntityId>;
  services: Set<EntityId>;
  providerOf: Map<EntityId, EntityId>;
}

export function knownEntities(graph: GraphDoc): KnownEntities {
  return {
    partners: new Set(graph.partners.map((p) => p.id)),
    services: new Set(graph.services.map((s) => s.id)),
    providerOf: new Map(graph.services.map((s) => [s.id, s.provider])),
  };
}

export class CandidateDraft {
  dirty = false;
  lastReport: ReportDoc | null = null;
  reportStale = false;

  constructor(
    public candidateId: string,
    public partners: Set<EntityId>,
    public plans: ProcessPlanDoc[],
    public requirements: RequirementDoc[] = [],
  ) {}

  static fromCandidate(doc: CandidateDoc): CandidateDraft {
    return new CandidateDraft(
      doc["candidate-id"],
      new Set(doc.partners),
      doc["process-plan"].map((plan) => ({
        "process-id": plan["process-id"],
        assignments: plan.assignments.map((a) => ({ ...a })),
      })),
      doc.requirements.map((r) => ({ ...r })),
    );
  }

  private touch(): void {
    this.dirty = true;
    if (this.lastReport !== null) {
      this.reportStale = true;
    }
  }

  addPartner(partner: EntityId, known: KnownEntities): EditResult {
    if (!known.partners.has(partner)) {
      return { ok: false, error: `unknown-entity: ${partner}` };
    }
    if (this.partners.has(partner)) {
      return { ok: true, changed: false };
    }
    this.partners.add(partner);
    this.touch();
    return { ok: true, changed: true };
  }

  removePartner(partner: EntityId): EditResult {
    if (!this.partners.has(partner)) {
      return { ok: true, changed: false };
    }
    const orphaned = this.assignmentsBy(partner);
    if (orphaned.length > 0) {
      const list = orphaned.map((a) => a.service).join(", ");
      return {
        ok: false,
        error: `partner ${partner} still provides: ${list}`,
      };
    }
    this.partners.delete(partner);
    this.touch();
    return { ok: true, changed: true };
  }

  /** Reassign a planned service to another provider; a no-op reassignment
   * (same provider) leaves the draft clean. */
  reassignService(service: EntityId, provider: EntityId, known: KnownEntities): EditResult {
    if (!known.partners.has(provider)) {
      return { ok: false, error: `unknown-entity: ${provider}` };
    }
    if (!this.partners.has(provider)) {
      return { ok: false, error: `${provider} is not in the candidate's partner set` };
    }
    let found = false;
    let changed = false;
    for (const plan of this.plans) {
      for (const assignment of plan.assignments) {
        if (assignment.service === service) {
          found = true;
          if (assignment.provider !== provider) {
            assignment.provider = provider;
            changed = true;
          }
        }
      }
    }
    if (!found) {
      return { ok: false, error: `unknown-entity: ${service} is not in the plan` };
    }
    if (changed) {
      this.touch();
    }
    return { ok: true, changed };
  }

  assignmentsBy(partner: EntityId): AssignmentDoc[] {
    return this.plans.flatMap((plan) =>
      plan.assignments.filter((a) => a.provider === partner),
    );
  }

  /** Store the report the server just computed; the draft is clean again. */
  applyReport(report: ReportDoc): void {
    this.lastReport = report;
    this.dirty = false;
    this.reportStale = false;
  }

  toCandidateDoc(): CandidateDoc {
    return {
      "candidate-id": this.candidateId,
      partners: [...this.partners].sort(),
      "process-plan": this.plans.map((plan) => ({
        "process-id": plan["process-id"],
        assignments: plan.assignments.map((a) => ({ ...a })),
      })),
      requirements: this.requirements.map((r) => ({ ...r })),
    };
  }
}
