// DOM bindings: dumb renderers over the controllers' state. Everything
// shown is taken from server replies; the handlers only translate user
// gestures into controller calls.

import type { JsonModeController } from "./json-mode.js";
import type { SessionController, SessionState } from "./session-view.js";
import type { JsonModeState } from "./json-mode.js";

function slot(root: HTMLElement, role: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(`[data-role="${role}"]`);
  if (!el) throw new Error(`missing element ${role}`);
  return el;
}

export function bindSession(
  root: HTMLElement,
  controller: SessionController,
): void {
  const preview = slot(root, "preview");
  const rows = slot(root, "expected-rows");
  const frames = slot(root, "frames");
  const accepting = slot(root, "accepting");
  const sessionId = slot(root, "session-id");
  const banner = slot(root, "banner");
  const input = slot(root, "symbol-input") as HTMLInputElement;
  const auto = slot(root, "auto") as HTMLInputElement;
  const stopButton = slot(root, "stop") as HTMLButtonElement;

  const render = (state: SessionState): void => {
    sessionId.textContent = state.sessionId
      ? `${state.grammar} · ${state.sessionId.slice(0, 8)}`
      : "connecting…";
    preview.textContent = state.preview;
    preview.classList.toggle("done", state.done);
    rows.innerHTML = "";
    for (const row of state.rows) {
      const tr = document.createElement("tr");
      const value = document.createElement("td");
      value.textContent = row.value;
      const type = document.createElement("td");
      type.textContent = row.type;
      tr.append(value, type);
      rows.append(tr);
    }
    frames.textContent = state.frames.length
      ? state.frames.join(" › ")
      : "—";
    accepting.textContent = state.done
      ? "complete"
      : state.accepting
        ? "accepting"
        : "incomplete";
    accepting.className = state.done || state.accepting ? "ok" : "pending";
    stopButton.disabled = !state.accepting || state.done;
    auto.checked = state.auto;
    input.disabled = state.done;

    banner.hidden = true;
    if (state.networkError) {
      banner.hidden = false;
      banner.className = "banner retry";
      banner.textContent = `Network error (${state.networkError}) — nothing was lost, try again`;
    } else if (state.serverError) {
      banner.hidden = false;
      banner.className = "banner error";
      banner.textContent = state.serverError;
    } else if (state.rejection) {
      const expected = state.rejection.rows.map((r) => r.value).join(", ");
      banner.hidden = false;
      banner.className = "banner reject";
      banner.textContent =
        `Rejected '${state.rejection.found}' at position ` +
        `${state.rejection.position}; expected: ${expected}` +
        (state.rejection.endAllowed ? " (or end)" : "");
    }
  };

  controller.onChange(render);
  render(controller.view);

  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      event.preventDefault();
      void controller.stepInput("\n");
    } else if (event.key.length === 1 && !event.ctrlKey && !event.metaKey) {
      event.preventDefault();
      void controller.stepInput(event.key);
    }
  });
  input.addEventListener("paste", (event) => {
    event.preventDefault();
    const text = event.clipboardData?.getData("text") ?? "";
    if (text) void controller.stepInput(text);
  });

  slot(root, "next").addEventListener("click", () => void controller.next());
  slot(root, "null").addEventListener("click", () =>
    void controller.nullStep(),
  );
  stopButton.addEventListener("click", () => void controller.stop());
  slot(root, "reset").addEventListener("click", () => void controller.reset());
  auto.addEventListener("change", () => controller.setAuto(auto.checked));
}

export function bindJsonMode(
  root: HTMLElement,
  controller: JsonModeController,
): void {
  const prompt = slot(root, "prompt") as HTMLTextAreaElement;
  const toggle = slot(root, "json-mode") as HTMLInputElement;
  const output = slot(root, "output");
  const badge = slot(root, "badge");
  const generate = slot(root, "generate") as HTMLButtonElement;

  const render = (state: JsonModeState): void => {
    toggle.checked = state.jsonMode;
    generate.disabled = state.busy;
    output.textContent = state.error ?? state.output ?? "";
    badge.hidden = state.parseable === null && !state.error;
    if (state.error) {
      badge.textContent = "backend error";
      badge.className = "badge error";
    } else if (state.parseable) {
      badge.textContent = "parses as JSON";
      badge.className = "badge ok";
    } else if (state.parseable === false) {
      badge.textContent = "not guaranteed parseable";
      badge.className = "badge warn";
    }
  };

  controller.onChange(render);
  render(controller.view);

  prompt.addEventListener("input", () => controller.setPrompt(prompt.value));
  toggle.addEventListener("change", () => controller.setJsonMode(toggle.checked));
  generate.addEventListener("click", () => void controller.generate());
}
