import { describe, expect, it } from "vitest";

import { decisionBody } from "../src/controller.js";
import { applyPrompt, applySession, deriveChips, initialState, relatedHighlights } from "../src/state.js";
import { miniPrompt, miniSession } from "./fixtures.js";

describe("deriveChips", () => {
  it("maps decided entries to their relevance", () => {
    const chips = deriveChips(miniSession);
    expect(chips.O1).toBe("essential");
  });

  it("keeps traversal state for undecided concerns", () => {
    const chips = deriveChips(miniSession);
    expect(chips.O2).toBe("pending");
    expect(chips.M1).toBe("skipped");
  });

  it("marks not-applicable entries as na", () => {
    const session = {
      ...miniSession,
      entries: { entries: [{ concern: "O1", disposition: "not_applicable" as const, reason: "x" }] },
    };
    expect(deriveChips(session).O1).toBe("na");
  });

  it("is derived purely from the server payload", () => {
    expect(deriveChips(miniSession)).toEqual(deriveChips(miniSession));
  });
});

describe("relatedHighlights", () => {
  it("labels related concerns by relationship kind", () => {
    const prompt = {
      ...miniPrompt,
      concern: { id: "M1", name: "Algorithm", prompt: "", description: "", experimental: true },
      related: [
        { concern: "O1", name: "Context", kind: "depends_on", direction: "in", rationale: "", status: "addressed" as const },
      ],
    };
    expect(relatedHighlights(prompt)).toEqual({ O1: "depends on" });
  });

  it("is empty when the session is done", () => {
    expect(relatedHighlights({ done: true, pass: 2 })).toEqual({});
  });
});

describe("state transitions", () => {
  it("applySession pulls chips and coverage from the server", () => {
    const state = applySession(initialState(""), miniSession);
    expect(state.sessionId).toBe("abc123");
    expect(state.coverage?.addressed).toBe(1);
    expect(state.chips.O1).toBe("essential");
  });

  it("applyPrompt prefers coverage carried by decision responses", () => {
    const base = applySession(initialState(""), miniSession);
    const next = applyPrompt(base, {
      ...miniPrompt,
      coverage: { ...miniSession.coverage, addressed: 2 },
    });
    expect(next.coverage?.addressed).toBe(2);
  });
});

describe("decisionBody", () => {
  it("carries relevance, spec and by for applicable decisions", () => {
    const body = decisionBody("O2", "applicable", {
      relevance: "important",
      spec: "text",
      by: ["BO"],
      reason: "",
    });
    expect(body).toEqual({ concern: "O2", kind: "applicable", relevance: "important", spec: "text", by: ["BO"] });
  });

  it("omits empty relevance so the server can reject it", () => {
    const body = decisionBody("O2", "applicable", { relevance: "", spec: "", by: [], reason: "" });
    expect(body).toEqual({ concern: "O2", kind: "applicable" });
  });

  it("carries the reason for n/a decisions", () => {
    const body = decisionBody("O2", "not_applicable", { relevance: "", spec: "", by: [], reason: "why" });
    expect(body).toEqual({ concern: "O2", kind: "not_applicable", reason: "why" });
  });
});
