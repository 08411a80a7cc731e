/** DOM rendering for query results.  No innerHTML: every piece of
 * document text and metadata goes through textContent. */

import type { CountResult, DocumentHit, SearchResult } from "./api.js";
import { highlight } from "./highlight.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document, tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderCount(
  doc: Document, result: CountResult, query: string,
): HTMLElement {
  const root = el(doc, "div", "result-count");
  root.appendChild(el(
    doc, "p", "count-total",
    `${result.count} occurrence${result.count === 1 ? "" : "s"} ` +
      `of "${query}" (${result.latency_ms} ms)`));
  const list = el(doc, "ul", "per-shard");
  result.per_shard.forEach((n, i) => {
    list.appendChild(el(doc, "li", undefined, `shard ${i}: ${n}`));
  });
  root.appendChild(list);
  return root;
}

function renderDocCard(
  doc: Document, hit: DocumentHit, query: string,
): HTMLElement {
  const card = el(doc, "article", "doc-card");
  card.appendChild(el(
    doc, "header", "doc-head",
    `doc ${hit.doc_id} (shard ${hit.shard_id}, ` +
      `match at byte ${hit.match_offset})`));

  const body = el(doc, "p", "doc-text");
  for (const frag of highlight(hit.doc_text, query)) {
    if (frag.hit) {
      body.appendChild(el(doc, "mark", undefined, frag.text));
    } else {
      body.appendChild(doc.createTextNode(frag.text));
    }
  }
  card.appendChild(body);

  const keys = Object.keys(hit.metadata);
  if (keys.length > 0) {
    const details = el(doc, "details", "doc-meta");
    details.appendChild(el(doc, "summary", undefined, "metadata"));
    const dl = el(doc, "dl");
    for (const key of keys) {
      dl.appendChild(el(doc, "dt", undefined, key));
      dl.appendChild(el(doc, "dd", undefined, hit.metadata[key]));
    }
    details.appendChild(dl);
    card.appendChild(details);
  }
  return card;
}

export function renderDocs(
  doc: Document, result: SearchResult, query: string,
  onLoadMore: (() => void) | null,
): HTMLElement {
  const root = el(doc, "div", "result-docs");
  root.appendChild(el(
    doc, "p", "docs-summary",
    `${result.docs.length} of ${result.count} matching document` +
      `${result.count === 1 ? "" : "s"} (${result.latency_ms} ms)`));
  for (const hit of result.docs) {
    root.appendChild(renderDocCard(doc, hit, query));
  }
  if (onLoadMore) {
    const button = el(doc, "button", "load-more", "load more");
    button.type = "button";
    button.addEventListener("click", onLoadMore);
    root.appendChild(button);
  }
  return root;
}

export function renderError(doc: Document, message: string): HTMLElement {
  return el(doc, "p", "query-error", message);
}

export function renderBusy(doc: Document): HTMLElement {
  return el(doc, "p", "query-busy", "searching ...");
}
