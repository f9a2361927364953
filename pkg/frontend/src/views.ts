/**
 * HTML renderers for the four manager views. Every function is pure: state
 * in, markup out. Interactive elements carry data-action attributes; the
 * browser glue (main.ts) delegates events back to App methods, so these
 * renderers stay testable without a DOM.
 */

import type { AppState, ManagerName } from "./app.js";
import { effectivePrefix, MIN_PREFIX_LENGTH } from "./filters.js";
import { rendering } from "./draft.js";
import { POINTERS } from "./types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const MANAGERS: Array<{ name: ManagerName; label: string }> = [
  { name: "keywords", label: "Keywords" },
  { name: "keychains", label: "Keychains" },
  { name: "patterns", label: "Patterns" },
  { name: "articles", label: "Articles" },
];

const LETTERS = "abcdefghijklmnopqrstuvwxyz".split("");

function letterPopup(selected: string | null, action: string): string {
  const options = LETTERS.map(
    (l) =>
      `<button class="letter${selected === l ? " active" : ""}" ` +
      `data-action="${action}" data-letter="${l}">${l.toUpperCase()}</button>`,
  ).join("");
  const clear =
    `<button class="letter${selected === null ? " active" : ""}" ` +
    `data-action="${action}" data-letter="">all</button>`;
  return `<div class="letter-popup">${clear}${options}</div>`;
}

function prefixField(input: string, action: string): string {
  const pending =
    input.trim().length > 0 && effectivePrefix(input) === null
      ? `<span class="hint">type at least ${MIN_PREFIX_LENGTH} characters</span>`
      : "";
  return (
    `<input class="prefix" type="text" placeholder="prefix…" ` +
    `value="${esc(input)}" data-action="${action}">${pending}`
  );
}

function draftPanel(state: AppState): string {
  const items = state.draft.keywords
    .map(
      (word, i) =>
        `<li>${esc(word)} ` +
        `<button data-action="draft-up" data-index="${i}">↑</button>` +
        `<button data-action="draft-down" data-index="${i}">↓</button>` +
        `<button data-action="draft-remove" data-index="${i}">×</button></li>`,
    )
    .join("");
  const preview = state.draft.keywords.length
    ? `<code>${esc(rendering(state.draft))}</code>`
    : `<em>click keywords in the filtered list to build a chain</em>`;
  return (
    `<section class="draft"><h3>Draft keychain</h3>` +
    `<ol>${items}</ol><p>${preview}</p>` +
    `<button data-action="draft-save">Save keychain</button></section>`
  );
}

function renderKeywords(state: AppState): string {
  const list = state.keywords
    .map(
      (word) =>
        `<li><button class="pick" data-action="pick-keyword" ` +
        `data-keyword="${esc(word)}">${esc(word)}</button></li>`,
    )
    .join("");
  return (
    `<section class="manager keywords"><h2>Keyword Manager</h2>` +
    letterPopup(state.keywordFilter.letter, "keyword-letter") +
    prefixField(state.keywordFilter.prefixInput, "keyword-prefix") +
    `<ul class="filtered">${list}</ul>` +
    `<form class="add" data-action="keyword-add">` +
    `<input type="text" placeholder="new keyword" value="${esc(state.newKeyword)}" ` +
    `data-action="keyword-new"><button type="submit">Add</button></form>` +
    draftPanel(state) +
    `</section>`
  );
}

function renderKeychains(state: AppState): string {
  const rows = state.keychains
    .map(
      (chain) =>
        `<tr><td><code>${esc(chain.rendering)}</code></td>` +
        `<td>${chain.keywords.map(esc).join(" · ")}</td></tr>`,
    )
    .join("");
  return (
    `<section class="manager keychains"><h2>Keychain Manager</h2>` +
    prefixField(state.keychainFilter.prefixInput, "keychain-prefix") +
    `<table class="list"><thead><tr><th>keychain</th><th>keywords</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    draftPanel(state) +
    `</section>`
  );
}

function renderPatterns(state: AppState): string {
  const selected = new Set(state.patternFilter.keychains ?? []);
  const chainFilter = state.keychains
    .map(
      (chain) =>
        `<label><input type="checkbox" data-action="pattern-keychain" ` +
        `data-keychain="${esc(chain.rendering)}"` +
        `${selected.has(chain.rendering) ? " checked" : ""}> ` +
        `${esc(chain.rendering)}</label>`,
    )
    .join("");
  const rows = state.patterns
    .map(
      (entry) =>
        `<tr><td>${esc(entry.id)}</td>` +
        `<td><code>${esc(entry.pattern)}</code></td>` +
        `<td>${entry.keys.map(esc).join("<br>")}</td>` +
        `<td><button data-action="pattern-edit" data-id="${esc(entry.id)}">edit</button>` +
        `<button data-action="pattern-delete" data-id="${esc(entry.id)}">delete</button></td></tr>`,
    )
    .join("");
  const form = state.patternForm;
  return (
    `<section class="manager patterns"><h2>Pattern Manager</h2>` +
    prefixField(state.patternFilter.prefixInput, "pattern-prefix") +
    `<details class="chain-filter"><summary>filter by keychain</summary>${chainFilter}</details>` +
    `<table class="list"><thead><tr><th>id</th><th>pattern</th><th>keychains</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<form class="edit" data-action="pattern-save">` +
    `<h3>${form.id === null ? "New entry" : `Replace ${esc(form.id)}`}</h3>` +
    `<input type="text" placeholder="pattern (alternatives with |)" ` +
    `value="${esc(form.pattern)}" data-action="pattern-field-pattern">` +
    `<input type="text" placeholder="keychains, separated by ;" ` +
    `value="${esc(form.keys)}" data-action="pattern-field-keys">` +
    `<input type="text" placeholder="note" value="${esc(form.note)}" ` +
    `data-action="pattern-field-note">` +
    `<button type="submit">Save</button></form>` +
    `</section>`
  );
}

function statusButton(
  keychain: string,
  status: string,
  current: string,
): string {
  return (
    `<button class="status-set${status === current ? " active" : ""}" ` +
    `data-action="report-status" data-keychain="${esc(keychain)}" ` +
    `data-status="${status}">${status}</button>`
  );
}

function renderReport(state: AppState): string {
  const report = state.report;
  if (!report) {
    return `<p class="placeholder">open a report from the article table</p>`;
  }
  const rows = report.assigned
    .map((row) => {
      const badges = row.sources
        .map((s) => `<span class="badge">${esc(s)}</span>`)
        .join("");
      const actions =
        statusButton(row.keychain, "confirmed", row.status) +
        statusButton(row.keychain, "rejected", row.status) +
        (row.manual ? "" : statusButton(row.keychain, "auto", row.status));
      return (
        `<tr class="row-${row.status}">` +
        `<td class="keychain">${esc(row.keychain)}</td>` +
        `<td>${badges}</td><td>${esc(row.status)}</td><td>${actions}</td></tr>`
      );
    })
    .join("");
  const preview = state.reportText
    ? `<pre class="download-preview">${esc(state.reportText)}</pre>`
    : "";
  return (
    `<section class="report"><h3>Report ${esc(report.source_id)}</h3>` +
    `<p class="meta">parts: ${report.pointers.map(esc).join(", ")}</p>` +
    `<table class="list"><thead>` +
    `<tr><th>keychain</th><th>sources</th><th>status</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<form class="manual-add" data-action="report-manual">` +
    `<input type="text" placeholder="add keychain manually" data-action="report-manual-text">` +
    `<button type="submit">Confirm into report</button></form>` +
    `<button data-action="report-download">Download canonical report</button>` +
    preview +
    `</section>`
  );
}

function renderArticles(state: AppState): string {
  const pointerBoxes = POINTERS.map(
    (p) =>
      `<label><input type="checkbox" data-action="toggle-pointer" ` +
      `data-pointer="${p}"${state.enqueuePointers.includes(p) ? " checked" : ""}> ` +
      `${p}</label>`,
  ).join("");
  const articleRows = state.articles
    .map(
      (a) =>
        `<tr><td>${esc(a.source_id)}</td><td>r${a.revision}</td>` +
        `<td><input type="text" class="profile-slac" placeholder="SLAC id" ` +
        `value="${esc(a.profile.slac_id ?? "")}" data-source="${esc(a.source_id)}">` +
        `<input type="text" class="profile-prefix" placeholder="prefix" ` +
        `value="${esc(a.profile.prefix ?? "")}" data-source="${esc(a.source_id)}">` +
        `<button data-action="profile-save" data-source="${esc(a.source_id)}">save</button></td>` +
        `<td><button data-action="enqueue" data-source="${esc(a.source_id)}">queue</button>` +
        `<button data-action="open-report" data-source="${esc(a.source_id)}">report</button></td></tr>`,
    )
    .join("");
  const queueRows = state.queue
    .map(
      (row) =>
        `<li>${esc(row.source_id)} <span class="meta">(${row.pointers
          .map(esc)
          .join(", ")})</span></li>`,
    )
    .join("");
  const outcomes = state.job
    ? state.job.outcomes
        .map(
          (o) =>
            `<li class="${o.ok ? "ok" : "failed"}">${esc(o.source_id)}: ` +
            `${o.ok ? `${o.keychains} keychains` : esc(o.error ?? "failed")}</li>`,
        )
        .join("")
    : "";
  const jobPanel = state.job
    ? `<div class="job"><h4>${esc(state.job.job_id)} — ${esc(state.job.status)}</h4>` +
      `<ul>${outcomes}</ul></div>`
    : "";
  return (
    `<section class="manager articles"><h2>Article Manager</h2>` +
    `<form class="upload" data-action="upload">` +
    `<input type="text" placeholder="source id (e.g. hep-ph/0000001)" ` +
    `value="${esc(state.upload.sourceId)}" data-action="upload-id">` +
    `<textarea placeholder="TeX source" data-action="upload-tex">${esc(
      state.upload.texSource,
    )}</textarea>` +
    `<button type="submit">Upload</button></form>` +
    `<fieldset class="pointers"><legend>parts to index</legend>${pointerBoxes}</fieldset>` +
    `<table class="list"><thead>` +
    `<tr><th>article</th><th>rev</th><th>profile</th><th></th></tr></thead>` +
    `<tbody>${articleRows}</tbody></table>` +
    `<div class="queue"><h3>Process queue</h3><ul>${queueRows || "<li><em>empty</em></li>"}</ul>` +
    `<button data-action="run-queue">Run batch</button>${jobPanel}</div>` +
    renderReport(state) +
    `</section>`
  );
}

export function renderApp(state: AppState): string {
  const tabs = MANAGERS.map(
    ({ name, label }) =>
      `<button class="tab${state.manager === name ? " active" : ""}" ` +
      `data-action="select-manager" data-manager="${name}">${label}</button>`,
  ).join("");
  const error = state.error
    ? `<div class="banner error">${esc(state.error)}</div>`
    : "";
  const notice = state.notice
    ? `<div class="banner notice">${esc(state.notice)}</div>`
    : "";
  let view = "";
  switch (state.manager) {
    case "keywords":
      view = renderKeywords(state);
      break;
    case "keychains":
      view = renderKeychains(state);
      break;
    case "patterns":
      view = renderPatterns(state);
      break;
    case "articles":
      view = renderArticles(state);
      break;
  }
  return `<nav class="tabs">${tabs}</nav>${error}${notice}<main>${view}</main>`;
}
