/** Split document text into highlighted and plain fragments. */

export interface Fragment {
  text: string;
  hit: boolean;
}

/**
 * Mark every case-sensitive occurrence of `query` in `text`.
 *
 * Occurrences may overlap; overlapping or touching matches merge into
 * one highlighted span, so "ana" over "banana" highlights "anana" as a
 * single fragment.  An empty query or a query with no occurrences
 * yields the whole text as one plain fragment.
 */
export function highlight(text: string, query: string): Fragment[] {
  if (query.length === 0 || text.length === 0) {
    return text.length ? [{ text, hit: false }] : [];
  }

  // All match starts, overlapping ones included.
  const starts: number[] = [];
  for (let i = text.indexOf(query); i >= 0; i = text.indexOf(query, i + 1)) {
    starts.push(i);
  }
  if (starts.length === 0) return [{ text, hit: false }];

  // Merge into disjoint [start, end) spans.
  const spans: Array<[number, number]> = [];
  for (const s of starts) {
    const e = s + query.length;
    const last = spans[spans.length - 1];
    if (last && s <= last[1]) {
      last[1] = Math.max(last[1], e);
    } else {
      spans.push([s, e]);
    }
  }

  const out: Fragment[] = [];
  let pos = 0;
  for (const [s, e] of spans) {
    if (s > pos) out.push({ text: text.slice(pos, s), hit: false });
    out.push({ text: text.slice(s, e), hit: true });
    pos = e;
  }
  if (pos < text.length) out.push({ text: text.slice(pos), hit: false });
  return out;
}
