/**
 * Typed client over the service's HTTP endpoints. The fetch implementation
 * is injectable so contract tests can replay recorded payloads.
 */

import type {
  AlertsResponse,
  CandidateDoc,
  ErrorBody,
  GraphDoc,
  IndicatorValueDoc,
  KpiDoc,
  RankingDoc,
  ReportDoc,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Server-side failure carrying the machine-readable error code verbatim. */
export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let code = "internal-error";
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as ErrorBody;
        code = body.error.code;
        message = body.error.message;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(code, message, response.status);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  graph(): Promise<GraphDoc> {
    return this.request("/graph");
  }

  kpis(): Promise<KpiDoc[]> {
    return this.request("/kpis");
  }

  applicableKpis(subject: string): Promise<{ "kpi-ids": string[] }> {
    return this.request(`/kpis/applicable/${encodeURIComponent(subject)}`);
  }

  evaluate(body: {
    kpi: string;
    subject: string;
    window?: { start: number; end: number };
    params?: Record<string, unknown>;
  }): Promise<IndicatorValueDoc> {
    return this.post("/evaluate", body);
  }

  anticipate(candidate: CandidateDoc): Promise<ReportDoc> {
    return this.post("/anticipate", candidate);
  }

  compare(candidates: CandidateDoc[]): Promise<RankingDoc> {
    return this.post("/anticipate/compare", { candidates });
  }

  alerts(fromSequence: number): Promise<AlertsResponse> {
    return this.request(`/alerts?from=${fromSequence}`);
  }

  tick(now: number): Promise<{ alerts: unknown[] }> {
    return this.post("/tick", { now });
  }
}
