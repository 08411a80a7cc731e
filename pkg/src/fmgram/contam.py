"""Benchmark contamination auditing over a corpus index.

For each benchmark entry we slide 50-character windows (counted in Unicode
scalar values) starting at whitespace-delimited word starts, count each
window in the corpus, and report the fraction eta of windows that occur at
least once.  Entries classify as clean (eta < 0.2), suspicious
(0.2 <= eta < 0.8), or dirty (eta >= 0.8).  Matching is case-sensitive and
exact; windows pass through the same byte sanitization as indexed text so a
window can never contain a reserved byte.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .engine import CorpusIndex
from .errors import MalformedBenchmark
from .ingest import sanitize_document

WINDOW_CHARS = 50
SUSPICIOUS_ETA = 0.20
DIRTY_ETA = 0.80
DEFAULT_SAMPLE_CAP = 1000


@dataclass(frozen=True)
class BenchmarkEntry:
    benchmark_name: str
    entry_id: str
    text: str
    subtask: str | None = None


@dataclass
class EntryResult:
    entry_id: str
    subtask: str | None
    substring_count: int
    hit_count: int
    eta: float
    label: str  # "clean" | "suspicious" | "dirty"


@dataclass
class ContamReport:
    benchmark_name: str
    corpus_name: str
    sampled_size: int
    dirty_rate: float
    suspicious_rate: float
    entries: list[EntryResult] = field(default_factory=list)


def classify(eta: float) -> str:
    if eta >= DIRTY_ETA:
        return "dirty"
    if eta >= SUSPICIOUS_ETA:
        return "suspicious"
    return "clean"


def extract_substrings(text: str) -> list[bytes]:
    """Fixed-width windows at word starts, re-encoded as UTF-8 bytes.

    Positions and widths count Unicode scalar values.  A word start is the
    first character of a maximal non-whitespace run; every start with at
    least WINDOW_CHARS characters remaining yields one window.  Texts
    shorter than one window yield the whole text once.
    """
    if len(text) < WINDOW_CHARS:
        return [text.encode("utf-8")]
    windows = []
    prev_space = True
    for i, ch in enumerate(text):
        if i + WINDOW_CHARS > len(text):
            break
        if prev_space and not ch.isspace():
            windows.append(text[i:i + WINDOW_CHARS].encode("utf-8"))
        prev_space = ch.isspace()
    return windows


def entry_eta(ci: CorpusIndex, entry: BenchmarkEntry) -> EntryResult:
    """Count every window of one entry and classify it."""
    windows = extract_substrings(entry.text)
    hits = 0
    for w in windows:
        if ci.count(sanitize_document(w)).total > 0:
            hits += 1
    eta = hits / len(windows)
    return EntryResult(entry.entry_id, entry.subtask, len(windows), hits,
                       eta, classify(eta))


def sample_entries(entries: list[BenchmarkEntry], cap: int,
                   seed: int) -> list[BenchmarkEntry]:
    """Downsample past the cap, proportionally per subtask, deterministically.

    Group shares are allocated by largest remainder so they sum to the cap;
    within a group the selection is a seeded choice without replacement,
    and the original entry order is preserved.
    """
    if len(entries) <= cap:
        return list(entries)
    groups: dict[str, list[int]] = {}
    for i, e in enumerate(entries):
        groups.setdefault(e.subtask or "", []).append(i)
    names = sorted(groups)
    exact = {g: cap * len(groups[g]) / len(entries) for g in names}
    alloc = {g: int(exact[g]) for g in names}
    leftover = cap - sum(alloc.values())
    for g in sorted(names, key=lambda g: (exact[g] - alloc[g], g),
                    reverse=True)[:leftover]:
        alloc[g] += 1
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for g in names:
        idx = groups[g]
        take = min(alloc[g], len(idx))
        picked = rng.choice(len(idx), size=take, replace=False)
        chosen.extend(idx[int(j)] for j in picked)
    return [entries[i] for i in sorted(chosen)]


def audit_benchmark(ci: CorpusIndex, entries: list[BenchmarkEntry],
                    sample_cap: int = DEFAULT_SAMPLE_CAP, seed: int = 0,
                    threads: int = 4) -> ContamReport:
    if not entries:
        raise MalformedBenchmark("benchmark has no entries")
    sampled = sample_entries(entries, sample_cap, seed)
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        results = list(pool.map(lambda e: entry_eta(ci, e), sampled))
    dirty = sum(r.label == "dirty" for r in results)
    suspicious = sum(r.label == "suspicious" for r in results)
    return ContamReport(
        benchmark_name=entries[0].benchmark_name,
        corpus_name=ci.name,
        sampled_size=len(results),
        dirty_rate=dirty / len(results),
        suspicious_rate=suspicious / len(results),
        entries=results)


def emit_bulletin(reports: list[ContamReport], path: str | Path) -> dict:
    """Write the audit bulletin as deterministic JSON; returns the payload."""
    payload = {
        "tool": "fmgram",
        "version": __version__,
        "bulletinFormat": 1,
        "windowChars": WINDOW_CHARS,
        "thresholds": {"suspicious": SUSPICIOUS_ETA, "dirty": DIRTY_ETA},
        "reports": [{
            "benchmarkName": r.benchmark_name,
            "corpusName": r.corpus_name,
            "sampledSize": r.sampled_size,
            "dirtyRate": r.dirty_rate,
            "suspiciousRate": r.suspicious_rate,
            "entries": [{
                "entryId": e.entry_id,
                "subtask": e.subtask,
                "substringCount": e.substring_count,
                "hitCount": e.hit_count,
                "eta": e.eta,
                "class": e.label,
            } for e in r.entries],
        } for r in reports],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
    return payload


def load_benchmark_jsonl(path: str | Path, text_field: str = "text",
                         benchmark_name: str | None = None,
                         ) -> list[BenchmarkEntry]:
    """Load benchmark entries from JSON Lines.

    Each line is an object; the entry text comes from text_field, with
    optional "id" and "subtask" keys.  Text must be nonempty once stripped.
    """
    path = Path(path)
    name = benchmark_name or path.stem
    entries: list[BenchmarkEntry] = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedBenchmark(
                    f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(obj, dict) or not isinstance(
                    obj.get(text_field), str):
                raise MalformedBenchmark(
                    f"{path}:{lineno}: object with a string "
                    f"{text_field!r} field required")
            text = obj[text_field].strip()
            if not text:
                raise MalformedBenchmark(
                    f"{path}:{lineno}: entry text is empty")
            subtask = obj.get("subtask")
            if subtask is not None and not isinstance(subtask, str):
                raise MalformedBenchmark(
                    f"{path}:{lineno}: 'subtask' must be a string")
            entry_id = str(obj.get("id", lineno - 1))
            entries.append(BenchmarkEntry(name, entry_id, text, subtask))
    if not entries:
        raise MalformedBenchmark(f"{path}: benchmark has no entries")
    return entries
