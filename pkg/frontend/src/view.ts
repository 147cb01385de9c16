// Pure HTML rendering: BoardState in, markup out. No DOM access here, so
// the whole surface is testable without a browser.

import type { CatalogDto, PromptDto } from "./api.js";
import { exportUrl, renderUrl } from "./api.js";
import type { BoardState } from "./state.js";
import { relatedHighlights } from "./state.js";

const esc = (text: string): string =>
  text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

function gauge(addressed: number, total: number): string {
  const pct = total ? Math.round((addressed / total) * 100) : 0;
  return (
    `<span class="gauge" data-addressed="${addressed}" data-total="${total}">` +
    `<span class="gauge-bar" style="width:${pct}%"></span>` +
    `<span class="gauge-text">${addressed}/${total}</span></span>`
  );
}

function chip(state: BoardState, cid: string, highlights: Record<string, string>): string {
  const status = state.chips[cid] ?? "pending";
  const focused = !state.prompt?.done && state.prompt?.concern?.id === cid;
  const classes = ["chip", `chip--${status}`];
  if (focused) classes.push("chip--focus");
  let label = "";
  if (highlights[cid] !== undefined) {
    classes.push("chip--related");
    label = `<span class="chip-kind">${esc(highlights[cid])}</span>`;
  }
  return `<span class="${classes.join(" ")}" data-concern="${cid}" title="${cid}">${cid}${label}</span>`;
}

function column(state: BoardState, catalog: CatalogDto, pid: string, highlights: Record<string, string>): string {
  const perspective = catalog.perspectives.find((p) => p.id === pid)!;
  const tasks = catalog.tasks.filter((t) => t.perspective === pid);
  const coverage = state.coverage?.per_perspective.find((p) => p.perspective === pid);
  const cards = tasks
    .map(
      (task) =>
        `<div class="card" data-task="${task.id}">` +
        `<div class="card-head"><span class="card-roles">${task.suggested_roles
          .map((r) => `<span class="badge">${esc(r)}</span>`)
          .join("")}</span><span class="card-name">${esc(task.name)}</span></div>` +
        `<div class="card-chips">${task.concern_ids.map((cid) => chip(state, cid, highlights)).join("")}</div>` +
        `</div>`,
    )
    .join("");
  return (
    `<section class="column" data-perspective="${pid}" style="--col-color:${perspective.color}">` +
    `<h2 class="column-title">${esc(perspective.display_name)} ` +
    (coverage ? gauge(coverage.addressed, coverage.total) : "") +
    `</h2>${cards}</section>`
  );
}

function promptPanel(state: BoardState): string {
  const prompt = state.prompt;
  if (!state.sessionId) {
    return (
      `<div class="panel panel--idle">No active session.` +
      `<button id="start-session">Start a session</button></div>`
    );
  }
  if (!prompt || prompt.done) {
    return `<div class="panel panel--done">All concerns handled (pass ${prompt?.pass ?? ""}). Export below.</div>`;
  }
  const concern = prompt.concern!;
  const related = (prompt.related ?? [])
    .map(
      (r) =>
        `<li class="related related--${r.status}">${r.concern} ${esc(r.name)} ` +
        `<em>${esc(r.kind.replace("_", " "))}</em> (${r.status})</li>`,
    )
    .join("");
  const roles = prompt.task?.suggested_roles ?? [];
  const form = state.form;
  const errorHtml = state.formError
    ? `<p class="form-error" role="alert">${esc(state.formError)}</p>`
    : "";
  return (
    `<div class="panel" data-prompt="${concern.id}">` +
    `<h2>${concern.id} ${esc(concern.name)}${concern.experimental ? ' <span class="badge badge--exp">E</span>' : ""}</h2>` +
    `<p class="panel-meta">pass ${prompt.pass}, ${prompt.position}/${prompt.total} — ` +
    `${esc(prompt.perspective?.display_name ?? "")} / ${esc(prompt.task?.name ?? "")}</p>` +
    `<p class="panel-question">${esc(concern.prompt)}</p>` +
    (related ? `<ul class="related-list">${related}</ul>` : "") +
    `<form id="decision-form" data-concern="${concern.id}">` +
    errorHtml +
    `<fieldset class="relevance">` +
    ["desirable", "important", "essential"]
      .map(
        (level) =>
          `<label><input type="radio" name="relevance" value="${level}"` +
          `${form.relevance === level ? " checked" : ""}> ${level}</label>`,
      )
      .join("") +
    `</fieldset>` +
    `<textarea name="spec" placeholder="Specification text">${esc(form.spec)}</textarea>` +
    `<fieldset class="by">` +
    roles
      .map(
        (code) =>
          `<label><input type="checkbox" name="by" value="${code}"` +
          `${form.by.includes(code) ? " checked" : ""}> ${code}</label>`,
      )
      .join("") +
    `</fieldset>` +
    `<input name="reason" placeholder="Reason when not applicable" value="${esc(form.reason)}">` +
    `<div class="actions">` +
    `<button type="submit" data-kind="applicable">Applicable</button>` +
    `<button type="submit" data-kind="not_applicable">Not applicable</button>` +
    `<button type="submit" data-kind="skip">Skip</button>` +
    `</div></form></div>`
  );
}

function exportBar(state: BoardState): string {
  if (!state.sessionId) return "";
  const sid = state.sessionId;
  return (
    `<nav class="exports">` +
    `<a href="${exportUrl(state.base, sid)}" download="session.psml">Download .psml</a>` +
    `<a href="${renderUrl(state.base, sid, "diagram")}" download="diagram.dot">Diagram (DOT)</a>` +
    `<a href="${renderUrl(state.base, sid, "template")}" download="template.md">Template (Markdown)</a>` +
    `</nav>`
  );
}

export function renderBoard(state: BoardState): string {
  if (state.banner) {
    return (
      `<div class="banner" role="alert">${esc(state.banner)} ` +
      `<button id="retry">Retry</button></div>`
    );
  }
  if (!state.catalog) {
    return `<div class="banner">Loading catalog…</div>`;
  }
  const highlights = relatedHighlights(state.prompt);
  const columns = state.catalog.perspectives
    .map((p) => column(state, state.catalog!, p.id, highlights))
    .join("");
  const overall = state.coverage ? gauge(state.coverage.addressed, state.coverage.total) : "";
  return (
    `<header class="top"><h1>perspecml board</h1>` +
    `<span class="overall">${overall}</span>${exportBar(state)}</header>` +
    promptPanel(state) +
    `<main class="board">${columns}</main>`
  );
}

// Census helpers used by tests and by the smoke check in app.ts.
export function countMatches(html: string, pattern: RegExp): number {
  return (html.match(pattern) ?? []).length;
}

export const COLUMN_RE = /class="column"/g;
export const CARD_RE = /class="card"/g;
export const CHIP_RE = /class="chip /g;

export type { PromptDto };
