// Page bootstrap: one typing session view and one JSON-mode page, both
// talking to the API through the same-origin /api proxy.

import { PlaygroundClient } from "./api.js";
import { bindJsonMode, bindSession } from "./dom.js";
import { JsonModeController } from "./json-mode.js";
import { SessionController } from "./session-view.js";

export function boot(root: Document = document): void {
  const client = new PlaygroundClient("/api");
  const sessionRoot = root.getElementById("session-page");
  const jsonRoot = root.getElementById("json-page");
  const grammarSelect = root.getElementById("grammar") as HTMLSelectElement;
  if (!sessionRoot || !jsonRoot || !grammarSelect) {
    throw new Error("playground markup incomplete");
  }

  const session = new SessionController(client, "json");
  bindSession(sessionRoot, session);
  const jsonMode = new JsonModeController(client);
  bindJsonMode(jsonRoot, jsonMode);

  client
    .grammars()
    .then(({ grammars }) => {
      grammarSelect.innerHTML = "";
      for (const name of grammars) {
        const option = root.createElement("option");
        option.value = name;
        option.textContent = name;
        option.selected = name === "json";
        grammarSelect.append(option);
      }
    })
    .catch(() => undefined);
  grammarSelect.addEventListener("change", () => {
    void session.open(grammarSelect.value);
  });

  for (const tab of root.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
    tab.addEventListener("click", () => {
      const target = tab.dataset.tab;
      sessionRoot.hidden = target !== "session";
      jsonRoot.hidden = target !== "json";
      for (const other of root.querySelectorAll<HTMLButtonElement>(
        "[data-tab]",
      )) {
        other.classList.toggle("active", other === tab);
      }
    });
  }

  void session.open();
}

if (typeof document !== "undefined" && document.getElementById("session-page")) {
  boot();
}
