// DOM-free application logic: every user action is a function from state to
// a promise of new state, talking only to the documented API. The DOM shell
// in app.ts just binds events to these and repaints.

import * as api from "./api.js";
import { ApiError, type DecisionBody } from "./api.js";
import { applyPrompt, applySession, emptyForm, initialState, type BoardState, type FormDraft } from "./state.js";

export async function loadBoard(base: string, sessionId: string | null): Promise<BoardState> {
  let state = initialState(base);
  try {
    state = { ...state, catalog: await api.getCatalog(base) };
    if (sessionId) {
      state = applySession(state, await api.getSession(base, sessionId));
      state = applyPrompt(state, await api.getPrompt(base, sessionId));
    }
    return state;
  } catch (error) {
    return { ...state, banner: describe(error) };
  }
}

export async function startSession(state: BoardState, project = ""): Promise<BoardState> {
  try {
    const session = await api.createSession(state.base, project);
    let next = applySession(state, session);
    next = applyPrompt(next, await api.getPrompt(state.base, session.id));
    return { ...next, form: emptyForm(), formError: null };
  } catch (error) {
    return { ...state, banner: describe(error) };
  }
}

// Refreshes chips/coverage/prompt from the server; used by the poller and
// after page reloads. Never touches the form draft.
export async function refresh(state: BoardState): Promise<BoardState> {
  if (!state.sessionId) return state;
  try {
    let next = applySession(state, await api.getSession(state.base, state.sessionId));
    return applyPrompt(next, await api.getPrompt(state.base, state.sessionId));
  } catch (error) {
    return { ...state, banner: describe(error) };
  }
}

export function decisionBody(concern: string, kind: DecisionBody["kind"], form: FormDraft): DecisionBody {
  const body: DecisionBody = { concern, kind };
  if (kind === "applicable") {
    if (form.relevance) body.relevance = form.relevance;
    if (form.spec) body.spec = form.spec;
    if (form.by.length) body.by = form.by;
  } else if (kind === "not_applicable" && form.reason) {
    body.reason = form.reason;
  }
  return body;
}

// Submits the decision for the prompted concern. On success the focus
// advances and the gauges refresh; on a 409/422 the server's code+message
// is surfaced inline and the typed draft is kept.
export async function submitDecisionForm(
  state: BoardState,
  kind: DecisionBody["kind"],
  form: FormDraft,
): Promise<BoardState> {
  if (!state.sessionId || !state.prompt || state.prompt.done || !state.prompt.concern) {
    return state;
  }
  const body = decisionBody(state.prompt.concern.id, kind, form);
  try {
    const prompt = await api.postDecision(state.base, state.sessionId, body);
    let next = applySession(state, await api.getSession(state.base, state.sessionId));
    next = applyPrompt(next, prompt);
    return { ...next, form: emptyForm(), formError: null };
  } catch (error) {
    if (error instanceof ApiError) {
      return { ...state, form, formError: `${error.code}: ${error.message}` };
    }
    return { ...state, form, banner: describe(error) };
  }
}

export async function revisitConcern(state: BoardState, concern: string): Promise<BoardState> {
  if (!state.sessionId) return state;
  try {
    const prompt = await api.postRevisit(state.base, state.sessionId, concern);
    return applyPrompt({ ...state, formError: null, form: emptyForm() }, prompt);
  } catch (error) {
    if (error instanceof ApiError) {
      return { ...state, formError: `${error.code}: ${error.message}` };
    }
    return { ...state, banner: describe(error) };
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}
