/** Page wiring: a corpus picker, a query form, and a results pane
 * backed by the /v1 endpoints. */

import { ApiClient, ApiError } from "./api.js";
import type { SearchResult } from "./api.js";
import {
  beginRequest, canLoadMore, initialState, settleRequest, widenLimit,
  DEFAULT_MAX_DOCS,
} from "./state.js";
import type { QueryMode, UiState } from "./state.js";
import { renderBusy, renderCount, renderDocs, renderError } from "./ui.js";

export interface Mounted {
  state: UiState;
  /** Resolves when the corpus list has been fetched and rendered. */
  ready: Promise<void>;
  /** Resolves once no request is in flight; for tests. */
  idle(): Promise<void>;
}

export function mount(root: HTMLElement, apiBase = ""): Mounted {
  const doc = root.ownerDocument;
  const api = new ApiClient(apiBase);
  const state = initialState();

  root.textContent = "";
  const form = doc.createElement("form");
  form.className = "query-form";

  const corpusSelect = doc.createElement("select");
  corpusSelect.name = "corpus";
  const queryInput = doc.createElement("input");
  queryInput.name = "query";
  queryInput.type = "text";
  queryInput.placeholder = "exact substring";
  const modeSelect = doc.createElement("select");
  modeSelect.name = "mode";
  for (const mode of ["count", "documents"] as const) {
    const option = doc.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }
  const submit = doc.createElement("button");
  submit.type = "submit";
  submit.textContent = "search";

  form.append(corpusSelect, queryInput, modeSelect, submit);
  const results = doc.createElement("div");
  results.className = "results";
  root.append(form, results);

  let settled: (() => void) | null = null;
  const idle = () => state.inFlight
    ? new Promise<void>((resolve) => { settled = resolve; })
    : Promise.resolve();
  const finish = () => {
    if (!state.inFlight && settled) { settled(); settled = null; }
  };

  function show(node: HTMLElement): void {
    results.textContent = "";
    results.appendChild(node);
  }

  async function run(): Promise<void> {
    state.corpus = corpusSelect.value;
    state.query = queryInput.value;
    state.mode = modeSelect.value as QueryMode;
    const seq = beginRequest(state);
    show(renderBusy(doc));
    try {
      if (state.mode === "count") {
        const result = await api.count(state.corpus, state.query);
        if (!settleRequest(state, seq)) return;
        show(renderCount(doc, result, state.query));
      } else {
        const result = await api.search(
          state.corpus, state.query, state.maxDocs);
        if (!settleRequest(state, seq)) return;
        show(renderDocsPane(result));
      }
    } catch (err) {
      if (!settleRequest(state, seq)) return;
      const message = err instanceof ApiError
        ? err.message
        : `request failed: ${String(err)}`;
      show(renderError(doc, message));
    } finally {
      finish();
    }
  }

  function renderDocsPane(result: SearchResult): HTMLElement {
    const more = canLoadMore(state, result)
      ? () => { widenLimit(state); void run(); }
      : null;
    return renderDocs(doc, result, state.query, more);
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    state.maxDocs = DEFAULT_MAX_DOCS;
    void run();
  });

  const ready = (async () => {
    try {
      const indexes = await api.indexes();
      for (const info of indexes) {
        const option = doc.createElement("option");
        option.value = info.name;
        option.textContent =
          `${info.name} (${info.doc_count} docs, ${info.shard_count} shards)`;
        corpusSelect.appendChild(option);
      }
      if (indexes.length === 0) {
        show(renderError(doc, "no indexes are available"));
      }
    } catch (err) {
      const message = err instanceof ApiError
        ? err.message
        : `cannot reach the query service: ${String(err)}`;
      show(renderError(doc, message));
    }
  })();

  return { state, ready, idle };
}

if (typeof document !== "undefined") {
  const app = document.getElementById("app");
  if (app) mount(app);
}
