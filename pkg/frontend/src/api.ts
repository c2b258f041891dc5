/** Typed client for the service's four endpoints — nothing else is used. */

import type { CompanyEntry, RunRecord } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
  json(): Promise<unknown>;
}>;

/** What the console needs from the backend, as an interface for testability. */
export interface RunApi {
  listCompanies(): Promise<CompanyEntry[]>;
  triggerRun(companyId: string, requestedBy: string): Promise<string>;
  getRun(runId: string): Promise<RunRecord>;
  getReportHtml(runId: string): Promise<string>;
}

export class ApiClient implements RunApi {
  constructor(
    private readonly baseUrl: string = "",
    // Wrapped so the global keeps its own `this` when we call it.
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async listCompanies(): Promise<CompanyEntry[]> {
    return (await this.get("/companies")) as CompanyEntry[];
  }

  async triggerRun(companyId: string, requestedBy: string): Promise<string> {
    const response = await this.request("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ company_id: companyId, requested_by: requestedBy }),
    });
    const body = (await response.json()) as { run_id: string };
    return body.run_id;
  }

  async getRun(runId: string): Promise<RunRecord> {
    return (await this.get(`/runs/${encodeURIComponent(runId)}`)) as RunRecord;
  }

  async getReportHtml(runId: string): Promise<string> {
    const response = await this.request(
      `/runs/${encodeURIComponent(runId)}/report`,
    );
    return response.text();
  }

  private async get(path: string): Promise<unknown> {
    const response = await this.request(path);
    return response.json();
  }

  private async request(
    path: string,
    init?: Parameters<FetchLike>[1],
  ): Promise<Awaited<ReturnType<FetchLike>>> {
    let response: Awaited<ReturnType<FetchLike>>;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (cause) {
      throw new ApiError(`backend unreachable: ${String(cause)}`);
    }
    if (!response.ok) {
      throw new ApiError(await describeFailure(response), response.status);
    }
    return response;
  }
}

async function describeFailure(response: {
  status: number;
  text(): Promise<string>;
}): Promise<string> {
  let detail = "";
  try {
    const body = await response.text();
    const parsed = JSON.parse(body) as { detail?: unknown };
    detail = typeof parsed.detail === "string" ? parsed.detail : body;
  } catch {
    // Non-JSON error bodies are reported as-is via the status line below.
  }
  return detail
    ? `request failed (${response.status}): ${detail}`
    : `request failed (${response.status})`;
}
