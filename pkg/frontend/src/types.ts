/**
 * Wire types mirroring the service's JSON formats (kebab-case keys,
 * entity ids as "kind:local-id" strings). These shapes are pinned by
 * contract tests against payloads recorded from the real server.
 */

export type EntityId = string;

export interface BoundDoc {
  kind: "at-least" | "at-most" | "between";
  value?: number;
  lo?: number;
  hi?: number;
}

export interface PartnerDoc {
  id: EntityId;
  competences?: string[];
  "contracted-capacity"?: number;
  "maximum-capacity"?: number;
}

export interface ServiceDoc {
  id: EntityId;
  provider: EntityId;
  "declared-response-time"?: number;
  "declared-failure-rate"?: number;
  "unit-cost"?: number;
  "competences-required"?: string[];
}

export interface ProcessDoc {
  id: EntityId;
  services: EntityId[];
  "owning-vo"?: EntityId | null;
}

export interface VoDoc {
  id: EntityId;
  partners: EntityId[];
  processes?: EntityId[];
  status?: string;
}

export interface VbeDoc {
  id: EntityId;
  vos?: EntityId[];
  partners?: EntityId[];
}

export interface GraphDoc {
  revision: number;
  vbe: VbeDoc | VbeDoc[] | null;
  partners: PartnerDoc[];
  services: ServiceDoc[];
  processes: ProcessDoc[];
  vos: VoDoc[];
  relations: unknown[];
}

export interface KpiDoc {
  "kpi-id": string;
  name: string;
  "data-sources": string[];
  subjects: string[];
  scope: { kind: string; vbe?: EntityId; vo?: EntityId };
  performance: string[];
  expression: string;
  unit: string;
  direction: "maximize" | "minimize";
  target?: number;
  tolerance: number;
}

export interface IndicatorValueDoc {
  value: number;
  unit: string;
  "kpi-id": string;
  subject: EntityId;
  "computed-at": number;
  "inputs-digest": string;
}

export interface ReportRowDoc {
  "kpi-id": string;
  subject: EntityId;
  bound: BoundDoc;
  value: number | null;
  unit: string | null;
  reason: string | null;
  gap: number | null;
  "normalized-gap": number | null;
  pass: boolean | null;
}

export type Overall = "pass" | "fail" | "incomplete";

export interface ReportDoc {
  "candidate-id": string;
  rows: ReportRowDoc[];
  overall: Overall;
}

export interface RankingDoc {
  ranking: string[];
  reports: Record<string, ReportDoc>;
}

export interface AssignmentDoc {
  service: EntityId;
  provider: EntityId;
  declared?: Record<string, unknown>;
}

export interface ProcessPlanDoc {
  "process-id": EntityId;
  assignments: AssignmentDoc[];
}

export interface RequirementDoc {
  "kpi-id": string;
  subject: EntityId;
  bound: BoundDoc;
  params?: Record<string, unknown>;
}

export interface CandidateDoc {
  "candidate-id": string;
  partners: EntityId[];
  "process-plan": ProcessPlanDoc[];
  requirements: RequirementDoc[];
}

export interface AlertDoc {
  "alert-id": string;
  sequence: number;
  "monitor-id": string;
  at: number;
  observed: IndicatorValueDoc | null;
  bound: BoundDoc;
  "breach-ratio": number | null;
  severity: "warning" | "critical";
  "remediation-hint": string;
  reason?: string;
}

export interface AlertsResponse {
  alerts: AlertDoc[];
  "last-sequence": number;
}

export interface ErrorBody {
  error: { code: string; message: string };
}
