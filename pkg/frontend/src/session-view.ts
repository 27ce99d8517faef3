// Interactive session state. The controller is a pure view over server
// replies: the preview is always the server's consumed text, the expected
// rows always mirror the last instruction, and nothing grammar-aware is
// computed locally. Actions are serialized so at most one request per
// session view is in flight.

import { ApiError, PlaygroundClient } from "./api.js";
import { toRows } from "./expected.js";
import type { ExpectedRow, Instruction } from "./types.js";

export interface Rejection {
  position: number;
  found: string;
  rows: ExpectedRow[];
  endAllowed: boolean;
}

export interface SessionState {
  sessionId: string | null;
  grammar: string;
  /** The accepted prefix, verbatim from the server. */
  preview: string;
  rows: ExpectedRow[];
  frames: string[];
  accepting: boolean;
  done: boolean;
  auto: boolean;
  busy: boolean;
  rejection: Rejection | null;
  /** Set on transport failure; the last action can simply be retried. */
  networkError: string | null;
  serverError: string | null;
}

type Listener = (state: SessionState) => void;

export class SessionController {
  private state: SessionState;
  private queue: Promise<void> = Promise.resolve();
  private listeners: Listener[] = [];
  private autoRunning = false;

  constructor(
    private readonly client: PlaygroundClient,
    grammar: string,
  ) {
    this.state = {
      sessionId: null,
      grammar,
      preview: "",
      rows: [],
      frames: [],
      accepting: false,
      done: false,
      auto: false,
      busy: false,
      rejection: null,
      networkError: null,
      serverError: null,
    };
  }

  get view(): SessionState {
    return { ...this.state };
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.view);
  }

  private patch(changes: Partial<SessionState>): void {
    this.state = { ...this.state, ...changes };
    this.notify();
  }

  /** Serialize an action; one request in flight per view. */
  private enqueue(action: () => Promise<void>): Promise<void> {
    this.queue = this.queue.then(action, action);
    return this.queue;
  }

  open(grammar?: string): Promise<void> {
    return this.enqueue(async () => {
      const name = grammar ?? this.state.grammar;
      this.patch({ busy: true });
      try {
        const old = this.state.sessionId;
        if (old !== null) {
          await this.client.closeSession(old).catch(() => undefined);
        }
        const handle = await this.client.createSession(name);
        const reply = await this.client.expected(handle.session_id);
        this.patch({
          sessionId: handle.session_id,
          grammar: name,
          preview: reply.text,
          rows: toRows(reply.expected),
          frames: [],
          accepting: reply.accepting,
          done: false,
          auto: false,
          rejection: null,
          networkError: null,
          serverError: null,
          busy: false,
        });
      } catch (err) {
        this.fail(err);
      }
    });
  }

  /** Feed one typed character; a rejection leaves the preview untouched. */
  stepInput(ch: string): Promise<void> {
    return this.enqueue(async () => {
      const id = this.state.sessionId;
      if (id === null || this.state.done) return;
      this.patch({ busy: true });
      try {
        this.apply(await this.client.feed(id, ch));
      } catch (err) {
        this.fail(err);
      }
    });
  }

  /** One server-sampled step. */
  next(): Promise<void> {
    return this.step("sample");
  }

  /** Take the empty/end branch when the grammar offers one. */
  nullStep(): Promise<void> {
    return this.step("empty");
  }

  /** Declare the text final; the server rejects this unless accepting. */
  stop(): Promise<void> {
    return this.step("stop");
  }

  private step(kind: "sample" | "empty" | "stop"): Promise<void> {
    return this.enqueue(async () => {
      const id = this.state.sessionId;
      if (id === null || this.state.done) return;
      this.patch({ busy: true });
      try {
        this.apply(await this.client.step(id, kind));
      } catch (err) {
        this.fail(err);
      }
    });
  }

  reset(): Promise<void> {
    return this.open();
  }

  /** Auto mode: sequential sampled steps until Eof or toggled off. */
  setAuto(on: boolean): void {
    if (this.state.auto === on) return;
    this.patch({ auto: on });
    if (on && !this.autoRunning) void this.runAuto();
  }

  private async runAuto(): Promise<void> {
    this.autoRunning = true;
    try {
      while (this.state.auto && !this.state.done) {
        await this.step("sample");
        if (this.state.rejection || this.state.networkError ||
            this.state.serverError) {
          break;
        }
      }
    } finally {
      this.autoRunning = false;
      if (this.state.auto) this.patch({ auto: false });
    }
  }

  private apply(instruction: Instruction): void {
    if (instruction.status === "rejected") {
      this.patch({
        busy: false,
        // preview: deliberately untouched (the server committed nothing)
        rejection: {
          position: instruction.position,
          found: instruction.found ?? "",
          rows: toRows(instruction.expected),
          endAllowed: instruction.end_allowed ?? false,
        },
        networkError: null,
        serverError: null,
      });
      return;
    }
    this.patch({
      busy: false,
      preview: instruction.text,
      rows: toRows(instruction.expected),
      frames: instruction.frames,
      accepting: instruction.accepting,
      done: instruction.status === "eof",
      rejection: null,
      networkError: null,
      serverError: null,
    });
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.patch({ busy: false, serverError: err.detail, auto: false });
    } else {
      const message = err instanceof Error ? err.message : String(err);
      // transport failure: no state moved on the server, so keep the view
      this.patch({ busy: false, networkError: message, auto: false });
    }
  }
}
