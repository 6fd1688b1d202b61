/**
 * Typed client for the repair service JSON API.
 *
 * This is the UI's only source of truth: every displayed fact comes out of
 * one of these seven calls.  Error responses always carry {"error": string};
 * they surface here as ApiError so callers can show the server's own words.
 */

export interface TreeNodeJson {
  sym: string;
  rank: number;
  children: TreeJson[];
}

export interface TreeLeafJson {
  leaf: string;
  wildcard?: boolean;
}

export type TreeJson = TreeNodeJson | TreeLeafJson;

export interface PromptJson {
  id: number;
  kind: "associativity" | "precedence";
  pair: [string, string];
  options: [TreeJson, TreeJson];
}

export interface HistoryEntry {
  id: number;
  kind: string;
  pair: [string, string];
  choice: 0 | 1;
}

export interface SessionView {
  round: number;
  verdict: "in-progress" | "repaired" | "stalled" | "non-addressable";
  pending: number;
  history: HistoryEntry[];
  residual_conflicts: number;
  notes: string[];
}

export interface Report {
  rounds: number;
  prompts_issued: number;
  verdict: string;
  timings_ms: Record<string, number>;
  residual_conflicts: number;
  notes: string[];
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as { error?: string };
    if (typeof body.error === "string") {
      message = body.error;
    }
  } catch {
    // non-JSON error body; keep the status message
  }
  throw new ApiError(message, response.status);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  /** Current session snapshot. */
  getSession(): Promise<SessionView> {
    return fetch(`${this.base}/api/session`).then((r) => unwrap<SessionView>(r));
  }

  /** Next unanswered prompt, or null once the round's questions are done. */
  async nextPrompt(): Promise<PromptJson | null> {
    const response = await fetch(`${this.base}/api/prompts/next`);
    if (response.status === 404) {
      return null;
    }
    return unwrap<PromptJson>(response);
  }

  /** Record one binary choice; returns the refreshed session. */
  answer(promptId: number, choice: 0 | 1): Promise<SessionView> {
    return fetch(`${this.base}/api/prompts/${promptId}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ choice }),
    }).then((r) => unwrap<SessionView>(r));
  }

  /** Compile the round's answers into a rewrite. */
  step(): Promise<SessionView> {
    return fetch(`${this.base}/api/step`, { method: "POST" }).then((r) =>
      unwrap<SessionView>(r),
    );
  }

  /** The working grammar, serialized. */
  async currentGrammar(): Promise<string> {
    const response = await fetch(`${this.base}/api/grammar/current`);
    if (!response.ok) {
      await unwrap(response); // throws with the server's message
    }
    return response.text();
  }

  /** Outcome summary for the session so far. */
  getReport(): Promise<Report> {
    return fetch(`${this.base}/api/report`).then((r) => unwrap<Report>(r));
  }

  /** Throw the session away and start over from the original grammar. */
  reset(): Promise<SessionView> {
    return fetch(`${this.base}/api/reset`, { method: "POST" }).then((r) =>
      unwrap<SessionView>(r),
    );
  }
}
