// Board state and its pure derivations. Everything on the board is derived
// from server responses; the only client-side fields are the form draft and
// transient error text.

import type { CatalogDto, CoverageDto, PromptDto, SessionDto } from "./api.js";

export type ChipStatus =
  | "pending"
  | "skipped"
  | "na"
  | "desirable"
  | "important"
  | "essential";

export interface FormDraft {
  relevance: string;
  spec: string;
  by: string[];
  reason: string;
}

export interface BoardState {
  base: string;
  catalog: CatalogDto | null;
  sessionId: string | null;
  prompt: PromptDto | null;
  coverage: CoverageDto | null;
  chips: Record<string, ChipStatus>;
  form: FormDraft;
  banner: string | null; // fetch-level failure, with retry
  formError: string | null; // inline 409/422 code + message
}

export const emptyForm = (): FormDraft => ({ relevance: "", spec: "", by: [], reason: "" });

export const initialState = (base: string): BoardState => ({
  base,
  catalog: null,
  sessionId: null,
  prompt: null,
  coverage: null,
  chips: {},
  form: emptyForm(),
  banner: null,
  formError: null,
});

// Chip status comes from the session's status map plus the document entry:
// decided entries show their relevance (or n/a), the rest show traversal state.
export function deriveChips(session: SessionDto): Record<string, ChipStatus> {
  const chips: Record<string, ChipStatus> = {};
  for (const [cid, status] of Object.entries(session.status)) {
    chips[cid] = status === "skipped" ? "skipped" : "pending";
  }
  for (const entry of session.entries.entries) {
    if (entry.disposition === "applicable") {
      chips[entry.concern] = entry.relevance as ChipStatus;
    } else {
      chips[entry.concern] = "na";
    }
  }
  return chips;
}

// Related-concern highlights for the currently prompted concern.
export function relatedHighlights(prompt: PromptDto | null): Record<string, string> {
  const highlights: Record<string, string> = {};
  if (prompt && !prompt.done && prompt.related) {
    const labels: Record<string, string> = {
      influences: "influences",
      depends_on: "depends on",
      trade_off: "trade-off",
    };
    for (const related of prompt.related) {
      highlights[related.concern] = labels[related.kind] ?? related.kind;
    }
  }
  return highlights;
}

export function applySession(state: BoardState, session: SessionDto): BoardState {
  return {
    ...state,
    sessionId: session.id,
    chips: deriveChips(session),
    coverage: session.coverage,
    banner: null,
  };
}

export function applyPrompt(state: BoardState, prompt: PromptDto): BoardState {
  const coverage = prompt.coverage ?? state.coverage;
  return { ...state, prompt, coverage };
}
