// Small synthetic catalog/session payloads for the pure-logic tests.
// The real 59-concern catalog is exercised by the integration test.

import type { CatalogDto, PromptDto, SessionDto } from "../src/api.js";

export const miniCatalog: CatalogDto = {
  version: 1,
  perspectives: [
    { id: "objectives", display_name: "System objectives", color: "#1f77b4", description: "" },
    { id: "model", display_name: "Model", color: "#d62728", description: "" },
  ],
  roles: [
    { code: "BO", display_name: "Business owner", description: "" },
    { code: "DS", display_name: "Data scientist", description: "" },
  ],
  tasks: [
    {
      id: "T-OBJ-1",
      perspective: "objectives",
      name: "Understand the problem",
      description: "",
      suggested_roles: ["BO"],
      concern_ids: ["O1", "O2"],
    },
    {
      id: "T-MOD-1",
      perspective: "model",
      name: "Select the model",
      description: "",
      suggested_roles: ["DS"],
      concern_ids: ["M1"],
    },
  ],
  concerns: [
    { id: "O1", name: "Context", prompt: "What/How: context?", description: "", experimental: false },
    { id: "O2", name: "Need", prompt: "What/How: need?", description: "", experimental: false },
    { id: "M1", name: "Algorithm", prompt: "What/How: algorithms?", description: "", experimental: true },
  ],
  relationships: [
    { from: "O1", to: "M1", kind: "influences", rationale: "context narrows choices", provenance: "paper_cited" },
  ],
};

export const miniSession: SessionDto = {
  id: "abc123",
  project: "demo",
  pass: 1,
  cursor: "O2",
  status: { O1: "decided", O2: "pending", M1: "skipped" },
  entries: {
    entries: [{ concern: "O1", disposition: "applicable", relevance: "essential", spec: "ctx" }],
  },
  coverage: {
    addressed: 1,
    applicable: 1,
    total: 3,
    per_perspective: [
      { perspective: "objectives", addressed: 1, applicable: 1, total: 2, unaddressed: ["O2"] },
      { perspective: "model", addressed: 0, applicable: 0, total: 1, unaddressed: ["M1"] },
    ],
  },
};

export const miniPrompt: PromptDto = {
  done: false,
  pass: 1,
  position: 2,
  total: 3,
  concern: { id: "O2", name: "Need", prompt: "What/How: need?", description: "", experimental: false },
  perspective: { id: "objectives", display_name: "System objectives", color: "#1f77b4" },
  task: { id: "T-OBJ-1", name: "Understand the problem", suggested_roles: ["BO"] },
  related: [],
};
