// DOM shell: paints renderBoard output into #app, binds form events to the
// controller, keeps the active session id in the URL hash so a reload
// restores the same board from server data, and polls coverage every 2 s.

import * as controller from "./controller.js";
import type { BoardState } from "./state.js";
import { renderBoard } from "./view.js";

const POLL_MS = 2000;

const root = document.getElementById("app") as HTMLElement;
let state: BoardState;

function sessionFromHash(): string | null {
  const match = location.hash.match(/session=([A-Za-z0-9-]+)/);
  return match ? match[1] : null;
}

function readForm(): { relevance: string; spec: string; by: string[]; reason: string } {
  const form = document.getElementById("decision-form") as HTMLFormElement | null;
  if (!form) return { relevance: "", spec: "", by: [], reason: "" };
  const data = new FormData(form);
  return {
    relevance: (data.get("relevance") as string) ?? "",
    spec: (data.get("spec") as string) ?? "",
    by: data.getAll("by").map(String),
    reason: (data.get("reason") as string) ?? "",
  };
}

function paint() {
  root.innerHTML = renderBoard(state);
}

async function update(next: Promise<BoardState>) {
  state = await next;
  if (state.sessionId) {
    location.hash = `session=${state.sessionId}`;
  }
  paint();
}

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.id === "start-session") {
    void update(controller.startSession(state));
  } else if (target.id === "retry") {
    void update(controller.loadBoard(state.base, sessionFromHash()));
  } else if (target.dataset.kind) {
    // decision buttons submit the form with their kind
    event.preventDefault();
    state = { ...state, form: readForm() };
    void update(controller.submitDecisionForm(state, target.dataset.kind as never, state.form));
  } else {
    const chipEl = target.closest(".chip") as HTMLElement | null;
    const cid = chipEl?.dataset.concern;
    if (cid && state.chips[cid] && state.chips[cid] !== "pending") {
      void update(controller.revisitConcern(state, cid));
    }
  }
});

// Keep the draft in state as the facilitator types, so repaints and failed
// submissions never lose text.
root.addEventListener("input", () => {
  state = { ...state, form: readForm() };
});

setInterval(() => {
  if (state?.sessionId && !document.querySelector(".form-error")) {
    void update(controller.refresh(state));
  }
}, POLL_MS);

void update(controller.loadBoard("", sessionFromHash()));
