import { describe, expect, it } from "vitest";

import { PlaygroundClient } from "../src/api.js";
import { JsonModeController, promptSeed } from "../src/json-mode.js";
import { MockTransport } from "./mock-transport.js";

function makeController() {
  const transport = new MockTransport();
  const client = new PlaygroundClient("http://api", transport.fetch);
  const controller = new JsonModeController(client);
  return { transport, controller };
}

describe("promptSeed", () => {
  it("maps equal prompts to equal seeds", () => {
    expect(promptSeed("tell me about cats")).toBe(
      promptSeed("tell me about cats"),
    );
  });

  it("separates nearby prompts", () => {
    expect(promptSeed("a")).not.toBe(promptSeed("b"));
    expect(promptSeed("")).not.toBe(promptSeed(" "));
  });

  it("stays inside unsigned 32-bit range", () => {
    const seed = promptSeed("anything at all");
    expect(seed).toBeGreaterThanOrEqual(0);
    expect(seed).toBeLessThanOrEqual(0xffffffff);
    expect(Number.isInteger(seed)).toBe(true);
  });
});

describe("JsonModeController", () => {
  it("requests json_object output and reports it parseable", async () => {
    const { transport, controller } = makeController();
    controller.setPrompt("give me a config");
    transport.enqueue({
      outputs: ['{"key": [1, 2, false]}'],
      stats: [{ model_calls: 9, chars: 21, literal: false }],
    });
    await controller.generate();
    const view = controller.view;
    expect(view.output).toBe('{"key": [1, 2, false]}');
    expect(view.parseable).toBe(true);
    expect(view.constrained).toBe(true);
    expect(transport.requests[0]).toMatchObject({
      method: "POST",
      url: "http://api/generate",
      body: {
        response_format: { type: "json_object" },
        seed: promptSeed("give me a config"),
        budget: 4000,
      },
    });
  });

  it("sends an unconstrained request when the toggle is off", async () => {
    const { transport, controller } = makeController();
    controller.setPrompt("whatever");
    controller.setJsonMode(false);
    transport.enqueue({
      outputs: ['{"broken": tru'],
      stats: [],
      constrained: false,
    });
    await controller.generate();
    const view = controller.view;
    expect(view.constrained).toBe(false);
    expect(view.parseable).toBe(false);
    expect(transport.requests[0]?.body).toMatchObject({
      unconstrained: true,
      seed: promptSeed("whatever"),
    });
    expect(transport.requests[0]?.body).not.toHaveProperty("response_format");
  });

  it("keeps the error inline when the backend is unreachable", async () => {
    const { transport, controller } = makeController();
    transport.fail(new TypeError("fetch failed"));
    await controller.generate();
    const view = controller.view;
    expect(view.error).toContain("fetch failed");
    expect(view.parseable).toBeNull();
    expect(view.busy).toBe(false);
  });

  it("surfaces server-side detail messages", async () => {
    const { transport, controller } = makeController();
    transport.enqueue({ detail: "budget must be positive" }, 422);
    await controller.generate();
    expect(controller.view.error).toContain("budget must be positive");
  });
});
