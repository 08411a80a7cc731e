"""Corpus-level queries across shards: count, document retrieval, benching.

A corpus is an ordered list of shard index files described by a manifest.
Counting fans out to every shard concurrently and sums the per-shard range
lengths.  Document retrieval walks SA ranks round-robin across shards in
ascending rank order, deduplicates by enclosing document, and reconstructs
each hit document chunk-concurrently.  All shard state is read-only, so any
number of queries may overlap.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .builder import load_manifest
from .errors import (EmptyCorpus, EmptyQuery, InvalidQuery,
                     ShardUnavailable)
from .fmcore import FmShard
from .ingest import SENTINEL, SEPARATOR
from .store import ShardFile

DEFAULT_MAX_DOCS = 10
RECONSTRUCT_CHUNKS = 10
SHORT_DOC_CHUNK = 100


@dataclass
class CountResult:
    total: int
    per_shard: list[int]
    latency_ms: float


@dataclass
class DocumentHit:
    shard_id: int
    doc_id: int                  # corpus-wide document index
    match_offset: int            # lowest located occurrence within the doc
    doc_text: bytes
    metadata: dict
    doc_span: tuple[int, int]    # (start, length) in the shard's text blob


@dataclass
class SearchResult:
    total: int
    hits: list[DocumentHit]
    latency_ms: float


@dataclass
class BenchReport:
    corpus: str
    trials: int
    count_ms: dict[int, float] = field(default_factory=dict)
    reconstruct_ms: dict[int, float] = field(default_factory=dict)


def prepare_query(query: str | bytes) -> bytes:
    """Validate and encode a query; reserved bytes can never match."""
    if isinstance(query, str):
        q = query.encode("utf-8")
    else:
        q = bytes(query)
        try:
            q.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidQuery(f"query is not valid UTF-8: {exc}") from exc
    if not q:
        raise EmptyQuery("query is empty")
    if SENTINEL in q or SEPARATOR in q:
        raise InvalidQuery("query contains a reserved byte (0x00 or 0xFF)")
    return q


def chunk_sizes(length: int) -> list[int]:
    """Split a document length into reconstruction chunks.

    Long documents (>= 1000 bytes) split into 10 near-equal chunks, the
    remainder spread over the first ones; shorter documents split into
    chunks of at most 100 bytes.
    """
    if length <= 0:
        return []
    if length >= 1000:
        base, rem = divmod(length, RECONSTRUCT_CHUNKS)
        return [base + 1] * rem + [base] * (RECONSTRUCT_CHUNKS - rem)
    full, rem = divmod(length, SHORT_DOC_CHUNK)
    return [SHORT_DOC_CHUNK] * full + ([rem] if rem else [])


class CorpusIndex:
    """Opened corpus: shard handles plus the thread pool that fans out."""

    def __init__(self, corpus_dir: Path, manifest: dict,
                 shard_files: list[ShardFile]):
        self.corpus_dir = corpus_dir
        self.manifest = manifest
        self.name = manifest["name"]
        self.shard_files = shard_files
        self.shards: list[FmShard] = [sf.shard for sf in shard_files]
        self.doc_bases = [s["doc_base"] for s in manifest["shards"]]
        self.doc_count = manifest["doc_count"]
        self.total_text_bytes = manifest["total_text_bytes"]
        workers = max(len(shard_files), RECONSTRUCT_CHUNKS)
        self._pool = ThreadPoolExecutor(max_workers=workers)

    @classmethod
    def open(cls, corpus_dir: str | Path, verify: bool = False) -> "CorpusIndex":
        corpus_dir = Path(corpus_dir)
        manifest = load_manifest(corpus_dir)
        shard_files: list[ShardFile] = []
        try:
            for entry in manifest["shards"]:
                path = corpus_dir / entry["file"]
                try:
                    shard_files.append(ShardFile.open(path, verify=verify))
                except FileNotFoundError as exc:
                    raise ShardUnavailable(f"shard file missing: {path}") \
                        from exc
        except Exception:
            for sf in shard_files:
                sf.close()
            raise
        return cls(corpus_dir, manifest, shard_files)

    def close(self) -> None:
        self._pool.shutdown(wait=False)
        for sf in self.shard_files:
            sf.close()
        self.shards = []

    def __enter__(self) -> "CorpusIndex":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def shard_count(self) -> int:
        return len(self.shard_files)

    # ------------------------------------------------------------- count

    def count(self, query: str | bytes) -> CountResult:
        q = prepare_query(query)
        t0 = time.perf_counter()
        ranges = list(self._pool.map(lambda s: s.text.find(q), self.shards))
        per_shard = [hi - lo for lo, hi in ranges]
        latency = (time.perf_counter() - t0) * 1000.0
        return CountResult(sum(per_shard), per_shard, latency)

    # ----------------------------------------------------------- search

    def find_docs(self, query: str | bytes,
                  max_docs: int = DEFAULT_MAX_DOCS) -> SearchResult:
        if max_docs < 1:
            raise InvalidQuery(f"max_docs must be at least 1, got {max_docs}")
        q = prepare_query(query)
        t0 = time.perf_counter()
        ranges = list(self._pool.map(lambda s: s.text.find(q), self.shards))
        total = sum(hi - lo for lo, hi in ranges)

        # round-robin across shards, ascending rank within each; stop as
        # soon as max_docs distinct documents have been seen
        cursors = [lo for lo, _ in ranges]
        best: dict[tuple[int, int], int] = {}
        live = [s for s in range(len(self.shards)) if cursors[s] < ranges[s][1]]
        stop = False
        while live and not stop:
            next_live = []
            for s in live:
                rank = cursors[s]
                cursors[s] += 1
                shard = self.shards[s]
                pos = shard.text.locate(rank)
                key = (s, shard.doc_of(pos))
                if key in best:
                    best[key] = min(best[key], pos)
                else:
                    best[key] = pos
                    if len(best) >= max_docs:
                        stop = True
                        break
                if cursors[s] < ranges[s][1]:
                    next_live.append(s)
            live = [s for s in next_live if cursors[s] < ranges[s][1]]

        hits = []
        for (s, d), pos in best.items():
            shard = self.shards[s]
            start, end = shard.doc_span(d)
            text = self._reconstruct_span(shard, start, end - start)
            lo_m, hi_m = shard.meta_span(d)
            metadata = json.loads(
                shard.meta.extract(lo_m, hi_m - lo_m).decode("utf-8"))
            hits.append(DocumentHit(
                shard_id=s, doc_id=self.doc_bases[s] + d,
                match_offset=pos - start, doc_text=text, metadata=metadata,
                doc_span=(start, end - start)))
        hits.sort(key=lambda h: h.doc_id)
        latency = (time.perf_counter() - t0) * 1000.0
        return SearchResult(total, hits, latency)

    def _reconstruct_span(self, shard: FmShard, start: int,
                          length: int) -> bytes:
        sizes = chunk_sizes(length)
        if len(sizes) <= 1:
            return shard.text.extract(start, length)
        offs = [start]
        for sz in sizes[:-1]:
            offs.append(offs[-1] + sz)
        parts = list(self._pool.map(
            lambda t: shard.text.extract(t[0], t[1]), zip(offs, sizes)))
        return b"".join(parts)

    def document(self, doc_id: int) -> DocumentHit:
        """Fetch one document by corpus-wide index, without a query."""
        if not 0 <= doc_id < self.doc_count:
            raise InvalidQuery(f"document {doc_id} of {self.doc_count}")
        s = int(np.searchsorted(np.asarray(self.doc_bases), doc_id,
                                side="right")) - 1
        shard = self.shards[s]
        d = doc_id - self.doc_bases[s]
        start, end = shard.doc_span(d)
        text = self._reconstruct_span(shard, start, end - start)
        lo_m, hi_m = shard.meta_span(d)
        metadata = json.loads(
            shard.meta.extract(lo_m, hi_m - lo_m).decode("utf-8"))
        return DocumentHit(s, doc_id, 0, text, metadata,
                           (start, end - start))

    # ------------------------------------------------------------ bench

    def _sample_window(self, rng: np.random.Generator, length: int,
                       tries: int = 1000) -> tuple[int, int, bytes]:
        """Uniformly sample a reserved-byte-free window from the corpus."""
        sizes = np.array([s.text.n for s in self.shards], dtype=np.int64)
        eligible = np.flatnonzero(sizes > length + 1)
        if len(eligible) == 0:
            raise InvalidQuery(f"no shard can fit a {length}-byte window")
        weights = sizes[eligible] / sizes[eligible].sum()
        for _ in range(tries):
            s = int(rng.choice(eligible, p=weights))
            pos = int(rng.integers(0, self.shards[s].text.n - length - 1))
            window = self.shards[s].text.extract(pos, length)
            if SENTINEL not in window and SEPARATOR not in window:
                return s, pos, window
        raise InvalidQuery(
            f"could not sample a clean {length}-byte window after {tries} "
            f"tries")

    def bench(self, query_lengths: list[int], context_lengths: list[int],
              trials: int = 100, seed: int = 0) -> BenchReport:
        if self.doc_count == 0 or self.total_text_bytes == 0:
            raise EmptyCorpus("cannot bench an empty corpus")
        rng = np.random.default_rng(seed)
        report = BenchReport(self.name, trials)
        # untimed warmup so one-time JIT compilation stays out of the means
        s, _, window = self._sample_window(rng, 1)
        self.count(window)
        lo, _ = self.shards[s].text.find(window)
        self.shards[s].text.locate(lo)
        self._reconstruct_span(self.shards[s], 0, min(4, self.shards[s].text.n - 1))
        for qlen in query_lengths:
            elapsed = 0.0
            for _ in range(trials):
                _, _, window = self._sample_window(rng, qlen)
                t0 = time.perf_counter()
                self.count(window)
                elapsed += time.perf_counter() - t0
            report.count_ms[qlen] = elapsed / trials * 1000.0
        for ctx in context_lengths:
            elapsed = 0.0
            done = 0
            for _ in range(trials):
                s, _, window = self._sample_window(rng, 10)
                shard = self.shards[s]
                d = min(ctx, shard.text.n - 1)
                t0 = time.perf_counter()
                lo, hi = shard.text.find(window)
                pos = shard.text.locate(lo)
                cstart = max(0, min(pos + 5 - d // 2, shard.text.n - 1 - d))
                self._reconstruct_span(shard, cstart, d)
                elapsed += time.perf_counter() - t0
                done += 1
            report.reconstruct_ms[ctx] = elapsed / max(done, 1) * 1000.0
        return report
