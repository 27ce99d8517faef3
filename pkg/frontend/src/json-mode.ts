// JSON-mode page state: a prompt box, a json-mode toggle, and a generate
// button. With the toggle on the server constrains output to the JSON
// grammar; off, the demo backend free-runs. The parse badge is computed
// client-side by actually parsing the rendered text.

import { ApiError, PlaygroundClient } from "./api.js";

export interface JsonModeState {
  prompt: string;
  jsonMode: boolean;
  output: string | null;
  /** null until the first generation */
  parseable: boolean | null;
  constrained: boolean;
  busy: boolean;
  error: string | null;
}

/** Deterministic seed from the prompt so equal prompts replay equally. */
export function promptSeed(prompt: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < prompt.length; i += 1) {
    hash ^= prompt.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash;
}

export class JsonModeController {
  private state: JsonModeState = {
    prompt: "",
    jsonMode: true,
    output: null,
    parseable: null,
    constrained: true,
    busy: false,
    error: null,
  };
  private listeners: ((state: JsonModeState) => void)[] = [];

  constructor(private readonly client: PlaygroundClient) {}

  get view(): JsonModeState {
    return { ...this.state };
  }

  onChange(listener: (state: JsonModeState) => void): void {
    this.listeners.push(listener);
  }

  private patch(changes: Partial<JsonModeState>): void {
    this.state = { ...this.state, ...changes };
    for (const listener of this.listeners) listener(this.view);
  }

  setPrompt(prompt: string): void {
    this.patch({ prompt });
  }

  setJsonMode(on: boolean): void {
    this.patch({ jsonMode: on });
  }

  async generate(): Promise<void> {
    this.patch({ busy: true, error: null });
    const seed = promptSeed(this.state.prompt);
    try {
      const reply = this.state.jsonMode
        ? await this.client.generateJson(seed)
        : await this.client.generateUnconstrained(seed);
      const output = reply.outputs[0] ?? "";
      this.patch({
        busy: false,
        output,
        parseable: isParseable(output),
        constrained: reply.constrained !== false,
      });
    } catch (err) {
      const message =
        err instanceof ApiError
          ? err.detail
          : err instanceof Error
            ? err.message
            : String(err);
      this.patch({ busy: false, error: message });
    }
  }
}

function isParseable(text: string): boolean {
  try {
    JSON.parse(text);
    return true;
  } catch {
    return false;
  }
}
