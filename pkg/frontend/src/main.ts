/**
 * Browser bootstrap: renders the app into #app and delegates DOM events to
 * App methods. All logic lives in app.ts; this file is the only one that
 * touches the document.
 *
 * The service origin defaults to the page origin and can be overridden with
 * `?api=http://host:port` for a file-served page.
 */

import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { renderApp } from "./views.js";

const apiBase =
  new URLSearchParams(window.location.search).get("api") ?? "";
const app = new App(new ApiClient(apiBase));
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}

function render(): void {
  const active = document.activeElement as HTMLElement | null;
  const activeAction = active?.dataset?.action;
  const selection =
    active instanceof HTMLInputElement ? active.selectionStart : null;
  root!.innerHTML = renderApp(app.state);
  if (activeAction) {
    const again = root!.querySelector<HTMLElement>(
      `[data-action="${activeAction}"]`,
    );
    if (again instanceof HTMLInputElement) {
      again.focus();
      if (selection !== null) {
        again.setSelectionRange(selection, selection);
      }
    } else {
      again?.focus();
    }
  }
}

app.subscribe(render);

function dataset(target: EventTarget | null): DOMStringMap {
  return target instanceof HTMLElement ? target.dataset : {};
}

function saveTextFile(name: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(url);
}

root.addEventListener("click", (event) => {
  const data = dataset(event.target);
  const action = data.action;
  if (!action) {
    return;
  }
  switch (action) {
    case "select-manager":
      void app.selectManager(data.manager as never);
      break;
    case "keyword-letter":
      void app.setKeywordLetter(data.letter || null);
      break;
    case "pick-keyword":
      app.clickKeyword(data.keyword ?? "");
      break;
    case "draft-up":
      app.moveDraftKeyword(Number(data.index), -1);
      break;
    case "draft-down":
      app.moveDraftKeyword(Number(data.index), +1);
      break;
    case "draft-remove":
      app.removeDraftKeyword(Number(data.index));
      break;
    case "draft-save":
      void app.saveDraft();
      break;
    case "pattern-edit":
      app.editPattern(data.id ?? "");
      break;
    case "pattern-delete":
      void app.deletePattern(data.id ?? "");
      break;
    case "toggle-pointer":
      app.togglePointer(data.pointer as never);
      break;
    case "enqueue":
      void app.enqueue(data.source ?? "");
      break;
    case "open-report":
      void app.openReport(data.source ?? "");
      break;
    case "run-queue":
      void app.runQueue();
      break;
    case "profile-save": {
      const source = data.source ?? "";
      const row = (event.target as HTMLElement).closest("tr");
      const slac = row?.querySelector<HTMLInputElement>(".profile-slac");
      const prefix = row?.querySelector<HTMLInputElement>(".profile-prefix");
      void app.saveProfile(source, {
        slac_id: slac?.value || null,
        prefix: prefix?.value || null,
      });
      break;
    }
    case "report-status":
      void app.correct(data.keychain ?? "", data.status as never);
      break;
    case "report-download":
      void app.downloadReport().then((text) => {
        if (text !== undefined && app.state.report) {
          const name =
            app.state.report.source_id.replace(/\//g, "__") + ".autex";
          saveTextFile(name, text);
        }
      });
      break;
    case "pattern-keychain":
      void app.togglePatternKeychain(data.keychain ?? "");
      break;
    default:
      break;
  }
});

root.addEventListener("input", (event) => {
  const target = event.target;
  if (!(target instanceof HTMLInputElement || target instanceof HTMLTextAreaElement)) {
    return;
  }
  switch (target.dataset.action) {
    case "keyword-prefix":
      void app.setKeywordPrefix(target.value);
      break;
    case "keychain-prefix":
      void app.setKeychainPrefix(target.value);
      break;
    case "pattern-prefix":
      void app.setPatternPrefix(target.value);
      break;
    case "keyword-new":
      app.setNewKeyword(target.value);
      break;
    case "pattern-field-pattern":
      app.setPatternForm({ pattern: target.value });
      break;
    case "pattern-field-keys":
      app.setPatternForm({ keys: target.value });
      break;
    case "pattern-field-note":
      app.setPatternForm({ note: target.value });
      break;
    case "upload-id":
      app.setUpload({ sourceId: target.value });
      break;
    case "upload-tex":
      app.setUpload({ texSource: target.value });
      break;
    default:
      break;
  }
});

root.addEventListener("submit", (event) => {
  const form = event.target;
  if (!(form instanceof HTMLFormElement)) {
    return;
  }
  event.preventDefault();
  switch (form.dataset.action) {
    case "keyword-add":
      void app.addKeyword();
      break;
    case "pattern-save":
      void app.savePattern();
      break;
    case "upload":
      void app.uploadArticle();
      break;
    case "report-manual": {
      const field = form.querySelector<HTMLInputElement>(
        '[data-action="report-manual-text"]',
      );
      const keychain = field?.value.trim();
      if (keychain) {
        void app.correct(keychain, "confirmed");
        field!.value = "";
      }
      break;
    }
    default:
      break;
  }
});

render();
void app.selectManager("keywords");
