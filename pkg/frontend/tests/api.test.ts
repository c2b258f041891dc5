import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, type FetchLike } from "../src/api.js";

type Call = { input: string; init?: Parameters<FetchLike>[1] };

function fetchStub(
  responder: (
    input: string,
    init?: Parameters<FetchLike>[1],
  ) => { ok: boolean; status: number; body: string },
): { fetchFn: FetchLike; calls: Call[] } {
  const calls: Call[] = [];
  const fetchFn: FetchLike = async (input, init) => {
    calls.push({ input, init });
    const result = responder(input, init);
    return {
      ok: result.ok,
      status: result.status,
      text: () => Promise.resolve(result.body),
      json: () => Promise.resolve(JSON.parse(result.body)),
    };
  };
  return { fetchFn, calls };
}

function okJson(body: unknown) {
  return { ok: true, status: 200, body: JSON.stringify(body) };
}

describe("ApiClient", () => {
  it("lists companies from the companies endpoint", async () => {
    const companies = [
      {
        company_id: "aegean-robotics",
        name: "Aegean Robotics",
        sector: "Industrial Automation",
        headquarters: "Athens",
        has_registry_number: true,
      },
    ];
    const { fetchFn, calls } = fetchStub(() => okJson(companies));
    const client = new ApiClient("http://backend.test", fetchFn);
    expect(await client.listCompanies()).toEqual(companies);
    expect(calls[0].input).toBe("http://backend.test/companies");
    expect(calls[0].init).toBeUndefined();
  });

  it("posts the trigger payload and returns the run id", async () => {
    const { fetchFn, calls } = fetchStub(() => okJson({ run_id: "run-000007" }));
    const client = new ApiClient("", fetchFn);
    const runId = await client.triggerRun("aegean-robotics", "analyst@fund.example");
    expect(runId).toBe("run-000007");
    expect(calls[0].input).toBe("/runs");
    expect(calls[0].init?.method).toBe("POST");
    expect(calls[0].init?.headers?.["Content-Type"]).toBe("application/json");
    expect(JSON.parse(calls[0].init?.body ?? "")).toEqual({
      company_id: "aegean-robotics",
      requested_by: "analyst@fund.example",
    });
  });

  it("fetches a run record by id, encoding the path segment", async () => {
    const { fetchFn, calls } = fetchStub(() =>
      okJson({ run_id: "a/b", state: "Running" }),
    );
    const client = new ApiClient("", fetchFn);
    const recorded = await client.getRun("a/b");
    expect(recorded.state).toBe("Running");
    expect(calls[0].input).toBe("/runs/a%2Fb");
  });

  it("returns the report as text", async () => {
    const { fetchFn, calls } = fetchStub(() => ({
      ok: true,
      status: 200,
      body: "<html><body><p>report</p></body></html>",
    }));
    const client = new ApiClient("", fetchFn);
    expect(await client.getReportHtml("run-000001")).toContain("<p>report</p>");
    expect(calls[0].input).toBe("/runs/run-000001/report");
  });

  it("surfaces the backend's error detail on a failed request", async () => {
    const { fetchFn } = fetchStub(() => ({
      ok: false,
      status: 404,
      body: JSON.stringify({ detail: "unknown company: acme" }),
    }));
    const client = new ApiClient("", fetchFn);
    const error = await client.triggerRun("acme", "a@b.c").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(404);
    expect(error.message).toBe("request failed (404): unknown company: acme");
  });

  it("falls back to the raw body when the error is JSON without a detail", async () => {
    const { fetchFn } = fetchStub(() => ({
      ok: false,
      status: 500,
      body: '{"oops": true}',
    }));
    const client = new ApiClient("", fetchFn);
    const error = await client.listCompanies().catch((e) => e);
    expect(error.message).toContain("request failed (500)");
    expect(error.message).toContain('{"oops": true}');
  });

  it("reports only the status when the error body is not JSON", async () => {
    const { fetchFn } = fetchStub(() => ({
      ok: false,
      status: 502,
      body: "<html>bad gateway</html>",
    }));
    const client = new ApiClient("", fetchFn);
    const error = await client.listCompanies().catch((e) => e);
    expect(error.message).toBe("request failed (502)");
  });

  it("wraps network failures as an unreachable-backend error", async () => {
    const fetchFn: FetchLike = () => Promise.reject(new TypeError("fetch failed"));
    const client = new ApiClient("", fetchFn);
    const error = await client.getRun("run-000001").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBeNull();
    expect(error.message).toContain("backend unreachable");
    expect(error.message).toContain("fetch failed");
  });
});
