/** UI state transitions, kept free of DOM concerns for testability. */

import type { CountResult, SearchResult } from "./api.js";

export type QueryMode = "count" | "documents";

export interface HistoryEntry {
  corpus: string;
  query: string;
  mode: QueryMode;
}

export interface UiState {
  corpus: string;
  query: string;
  mode: QueryMode;
  maxDocs: number;
  /** Sequence number of the most recent request. */
  seq: number;
  inFlight: boolean;
  /** Past submissions, oldest first; append-only. */
  history: HistoryEntry[];
}

export const DEFAULT_MAX_DOCS = 10;
export const MAX_DOCS_LIMIT = 50;

export function initialState(): UiState {
  return {
    corpus: "",
    query: "",
    mode: "count",
    maxDocs: DEFAULT_MAX_DOCS,
    seq: 0,
    inFlight: false,
    history: [],
  };
}

/**
 * Record a submission: bump the sequence number, mark a request in
 * flight, and append to history.  Returns the sequence number the
 * caller must present to settleRequest when the response lands.
 */
export function beginRequest(state: UiState): number {
  state.seq += 1;
  state.inFlight = true;
  state.history.push({
    corpus: state.corpus,
    query: state.query,
    mode: state.mode,
  });
  return state.seq;
}

/**
 * A response for request `seq` arrived.  Returns true when it is the
 * latest request and should be rendered; responses from superseded
 * requests are stale and must be dropped.
 */
export function settleRequest(state: UiState, seq: number): boolean {
  if (seq !== state.seq) return false;
  state.inFlight = false;
  return true;
}

/** Double the document limit for "load more", capped by the server. */
export function widenLimit(state: UiState): number {
  state.maxDocs = Math.min(state.maxDocs * 2, MAX_DOCS_LIMIT);
  return state.maxDocs;
}

/** True when a search response was truncated by the document limit. */
export function canLoadMore(state: UiState, result: SearchResult): boolean {
  return result.docs.length < result.count &&
    state.maxDocs < MAX_DOCS_LIMIT;
}

export type QueryOutcome =
  | { kind: "count"; result: CountResult }
  | { kind: "documents"; result: SearchResult }
  | { kind: "error"; message: string };
