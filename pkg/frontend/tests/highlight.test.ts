import { describe, expect, it } from "vitest";

import { highlight } from "../src/highlight.js";

describe("highlight", () => {
  it("merges overlapping matches into one span", () => {
    expect(highlight("banana", "ana")).toEqual([
      { text: "b", hit: false },
      { text: "anana", hit: true },
    ]);
  });

  it("marks a single interior match", () => {
    expect(highlight("apple pie", "pie")).toEqual([
      { text: "apple ", hit: false },
      { text: "pie", hit: true },
    ]);
  });

  it("keeps disjoint matches separate", () => {
    expect(highlight("cat dog cat", "cat")).toEqual([
      { text: "cat", hit: true },
      { text: " dog ", hit: false },
      { text: "cat", hit: true },
    ]);
  });

  it("merges touching matches", () => {
    expect(highlight("aaaa", "aa")).toEqual([{ text: "aaaa", hit: true }]);
  });

  it("covers a whole-document match", () => {
    expect(highlight("exact", "exact")).toEqual([
      { text: "exact", hit: true },
    ]);
  });

  it("returns plain text when the query is absent", () => {
    expect(highlight("banana", "xyz")).toEqual([
      { text: "banana", hit: false },
    ]);
  });

  it("is case sensitive", () => {
    expect(highlight("Banana", "banana")).toEqual([
      { text: "Banana", hit: false },
    ]);
  });

  it("returns plain text for an empty query", () => {
    expect(highlight("banana", "")).toEqual([
      { text: "banana", hit: false },
    ]);
  });

  it("returns nothing for empty text", () => {
    expect(highlight("", "x")).toEqual([]);
  });

  it("round-trips the original text", () => {
    const text = "she sells sea shells by the sea shore";
    const joined = highlight(text, "s").map((f) => f.text).join("");
    expect(joined).toBe(text);
  });

  it("handles matches at both ends", () => {
    expect(highlight("abcba", "a")).toEqual([
      { text: "a", hit: true },
      { text: "bcb", hit: false },
      { text: "a", hit: true },
    ]);
  });
});
