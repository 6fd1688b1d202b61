import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, SessionView } from "../src/api.js";

interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

const VIEW: SessionView = {
  round: 0,
  verdict: "in-progress",
  pending: 4,
  history: [],
  residual_conflicts: 13,
  notes: [],
};

function jsonResponse(status: number, payload: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
    text: async () => JSON.stringify(payload),
  } as unknown as Response;
}

function textResponse(status: number, body: string): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => {
      throw new Error("not json");
    },
    text: async () => body,
  } as unknown as Response;
}

/** Stub fetch to always produce `response`; returns the recorded calls. */
function record(response: Response | ((url: string) => Response)): RecordedCall[] {
  const calls: RecordedCall[] = [];
  vi.stubGlobal("fetch", async (url: string, init?: RequestInit) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    return typeof response === "function" ? response(url) : response;
  });
  return calls;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient routes", () => {
  it("getSession issues GET /api/session", async () => {
    const calls = record(jsonResponse(200, VIEW));
    const view = await new ApiClient().getSession();
    expect(calls).toEqual([{ url: "/api/session", method: "GET", body: undefined }]);
    expect(view).toEqual(VIEW);
  });

  it("nextPrompt issues GET /api/prompts/next and resolves the prompt", async () => {
    const prompt = {
      id: 0,
      kind: "precedence",
      pair: ["(PLUS,3)", "(STAR,3)"],
      options: [{ leaf: "a" }, { leaf: "b" }],
    };
    const calls = record(jsonResponse(200, prompt));
    const got = await new ApiClient().nextPrompt();
    expect(calls[0]).toEqual({
      url: "/api/prompts/next",
      method: "GET",
      body: undefined,
    });
    expect(got).toEqual(prompt);
  });

  it("nextPrompt resolves null when the server has no pending prompt", async () => {
    record(jsonResponse(404, { error: "no pending prompt" }));
    expect(await new ApiClient().nextPrompt()).toBeNull();
  });

  it("answer POSTs the choice as a JSON body", async () => {
    const calls = record(jsonResponse(200, VIEW));
    await new ApiClient().answer(3, 1);
    expect(calls).toEqual([
      { url: "/api/prompts/3/answer", method: "POST", body: { choice: 1 } },
    ]);
  });

  it("step issues POST /api/step", async () => {
    const calls = record(jsonResponse(200, VIEW));
    await new ApiClient().step();
    expect(calls).toEqual([{ url: "/api/step", method: "POST", body: undefined }]);
  });

  it("currentGrammar returns the raw text body", async () => {
    const calls = record(textResponse(200, "%start s\ns : A ;\n"));
    const text = await new ApiClient().currentGrammar();
    expect(calls[0].url).toBe("/api/grammar/current");
    expect(text).toBe("%start s\ns : A ;\n");
  });

  it("getReport issues GET /api/report", async () => {
    const report = {
      rounds: 1,
      prompts_issued: 4,
      verdict: "repaired",
      timings_ms: {},
      residual_conflicts: 0,
      notes: [],
    };
    const calls = record(jsonResponse(200, report));
    expect(await new ApiClient().getReport()).toEqual(report);
    expect(calls[0].url).toBe("/api/report");
  });

  it("reset issues POST /api/reset", async () => {
    const calls = record(jsonResponse(200, VIEW));
    await new ApiClient().reset();
    expect(calls).toEqual([{ url: "/api/reset", method: "POST", body: undefined }]);
  });

  it("prefixes every route with the configured base", async () => {
    const calls = record(jsonResponse(200, VIEW));
    await new ApiClient("http://127.0.0.1:8642").getSession();
    expect(calls[0].url).toBe("http://127.0.0.1:8642/api/session");
  });
});

describe("ApiClient errors", () => {
  it("surfaces the server's error string with the HTTP status", async () => {
    record(jsonResponse(409, { error: "round-incomplete" }));
    const err = await new ApiClient().step().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).message).toBe("round-incomplete");
    expect((err as ApiError).status).toBe(409);
  });

  it("falls back to a status message when the error body is not JSON", async () => {
    record(textResponse(500, "boom"));
    const err = await new ApiClient().getSession().catch((e: unknown) => e);
    expect((err as ApiError).message).toBe("request failed with status 500");
  });

  it("currentGrammar throws on an error status instead of returning the body", async () => {
    record(jsonResponse(404, { error: "Not Found" }));
    const err = await new ApiClient().currentGrammar().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).message).toBe("Not Found");
  });
});
