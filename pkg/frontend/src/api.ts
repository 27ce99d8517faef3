// Thin typed client over the cfgen session API. Every method is a single
// round-trip; error bodies become ApiError so callers can show the detail.

import type {
  ExpectedReply,
  GenerateReply,
  GrammarsReply,
  Instruction,
  SessionHandle,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class PlaygroundClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: Parameters<FetchLike>[1] = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const detail =
        typeof payload?.detail === "string" ? payload.detail : "request failed";
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  grammars(): Promise<GrammarsReply> {
    return this.request("GET", "/grammars");
  }

  createSession(grammar: string, seed = 0): Promise<SessionHandle> {
    return this.request("POST", "/sessions", { grammar, seed });
  }

  closeSession(sessionId: string): Promise<void> {
    return this.request("DELETE", `/sessions/${sessionId}`);
  }

  /** Atomic feed: the server commits all of `text` or none of it. */
  feed(sessionId: string, text: string): Promise<Instruction> {
    return this.request("POST", `/sessions/${sessionId}/feed`, {
      text,
      atomic: true,
    });
  }

  step(
    sessionId: string,
    step: "sample" | "empty" | "stop",
  ): Promise<Instruction> {
    return this.request("POST", `/sessions/${sessionId}/feed`, { step });
  }

  expected(sessionId: string, significant = false): Promise<ExpectedReply> {
    const query = significant ? "?significant=true" : "";
    return this.request("GET", `/sessions/${sessionId}/expected${query}`);
  }

  generateJson(seed: number, budget = 4000): Promise<GenerateReply> {
    return this.request("POST", "/generate", {
      response_format: { type: "json_object" },
      seed,
      budget,
    });
  }

  generateUnconstrained(seed: number): Promise<GenerateReply> {
    return this.request("POST", "/generate", { unconstrained: true, seed });
  }
}
