"""Corpus index construction: plan shards, build each one, write a manifest.

A corpus directory holds one index file per shard plus corpus.json
describing them.  Construction writes the intermediate blob and offset
files under tmp/ while a shard is in flight and removes them once its
index file is safely on disk, so an interrupted build leaves its partial
state visible.  Shard index bytes are a pure function of the documents and
the build parameters; thread count and timings never leak into them.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .errors import UnknownIndex
from .fmcore import (DEFAULT_ISA_RATE, DEFAULT_SA_RATE, FmShard,
                     build_fm_part)
from .ingest import (RawDocument, build_blob, plan_shards,
                     write_offsets_file)
from .store import serialize_shard

DEFAULT_SHARD_BYTES = 512 * 1024 * 1024
MANIFEST_NAME = "corpus.json"
MANIFEST_FORMAT = 1


@dataclass
class ShardReport:
    """Result of building one shard."""

    index: int
    file: str
    docs: int
    doc_base: int
    text_bytes: int
    index_bytes: int


@dataclass
class BuildReport:
    """Summary of one corpus build."""

    name: str
    out_dir: Path
    doc_count: int
    shard_count: int
    total_text_bytes: int
    total_index_bytes: int
    timings: dict[str, float]
    shards: list[ShardReport] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.total_index_bytes / self.total_text_bytes


def shard_filename(i: int) -> str:
    return f"shard-{i:05d}.fgmi"


def build_corpus(docs: Sequence[RawDocument], out_dir: str | Path,
                 name: str,
                 sa_rate: int = DEFAULT_SA_RATE,
                 isa_rate: int = DEFAULT_ISA_RATE,
                 shard_bytes: int = DEFAULT_SHARD_BYTES,
                 threads: int = 1,
                 progress: Callable[[ShardReport], None] | None = None,
                 ) -> BuildReport:
    """Index a document sequence into out_dir and write its manifest."""
    if shard_bytes < 2:
        raise ValueError(f"shard size must be at least 2 bytes, got "
                         f"{shard_bytes}")
    # separator byte counts toward the packed size
    plan = plan_shards([len(d.text) + 1 for d in docs], shard_bytes)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp_dir = out_dir / "tmp"
    tmp_dir.mkdir(exist_ok=True)
    timings: dict[str, float] = {}
    lock = threading.Lock()

    def build_one(i: int, lo: int, hi: int) -> ShardReport:
        stem = f"shard-{i:05d}"
        text, meta, offsets = build_blob(docs[lo:hi])
        scratch = [tmp_dir / (stem + ".text.blob"),
                   tmp_dir / (stem + ".offsets.bin"),
                   tmp_dir / (stem + ".meta.blob"),
                   tmp_dir / (stem + ".meta_offsets.bin")]
        scratch[0].write_bytes(text.data)
        write_offsets_file(scratch[1], offsets.starts)
        scratch[2].write_bytes(meta.data)
        write_offsets_file(scratch[3], offsets.meta_starts)
        local: dict[str, float] = {}
        text_part = build_fm_part(text.data, sa_rate, isa_rate, local)
        meta_part = build_fm_part(meta.data, sa_rate, isa_rate, local)
        shard = FmShard(text_part, meta_part, offsets.starts,
                        offsets.meta_starts)
        size = serialize_shard(shard, out_dir / shard_filename(i))
        for p in scratch:
            p.unlink()
        with lock:
            for step, dt in local.items():
                timings[step] = timings.get(step, 0.0) + dt
        report = ShardReport(i, shard_filename(i), hi - lo, lo, text.n, size)
        if progress is not None:
            with lock:
                progress(report)
        return report

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(build_one, i, lo, hi)
                       for i, (lo, hi) in enumerate(plan.assignments)]
            shards = [f.result() for f in futures]
    else:
        shards = [build_one(i, lo, hi)
                  for i, (lo, hi) in enumerate(plan.assignments)]
    shards.sort(key=lambda r: r.index)
    try:
        tmp_dir.rmdir()
    except OSError:
        pass
    report = BuildReport(
        name=name, out_dir=out_dir, doc_count=len(docs),
        shard_count=len(shards),
        total_text_bytes=sum(s.text_bytes for s in shards),
        total_index_bytes=sum(s.index_bytes for s in shards),
        timings=timings, shards=shards)
    write_manifest(report, sa_rate, isa_rate, shard_bytes)
    return report


def write_manifest(report: BuildReport, sa_rate: int, isa_rate: int,
                   shard_bytes: int) -> None:
    manifest = {
        "format": MANIFEST_FORMAT,
        "name": report.name,
        "sa_rate": sa_rate,
        "isa_rate": isa_rate,
        "shard_bytes": shard_bytes,
        "doc_count": report.doc_count,
        "shard_count": report.shard_count,
        "total_text_bytes": report.total_text_bytes,
        "total_index_bytes": report.total_index_bytes,
        "ratio": report.ratio,
        "timings": {k: round(v, 6) for k, v in sorted(report.timings.items())},
        "shards": [{
            "file": s.file, "docs": s.docs, "doc_base": s.doc_base,
            "text_bytes": s.text_bytes, "index_bytes": s.index_bytes,
        } for s in report.shards],
    }
    path = report.out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def load_manifest(corpus_dir: str | Path) -> dict:
    path = Path(corpus_dir) / MANIFEST_NAME
    if not path.is_file():
        raise UnknownIndex(f"no corpus manifest at {path}")
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if manifest.get("format") != MANIFEST_FORMAT:
        raise UnknownIndex(f"{path}: unsupported manifest format "
                           f"{manifest.get('format')!r}")
    for key in ("name", "sa_rate", "isa_rate", "doc_count", "shard_count",
                "shards"):
        if key not in manifest:
            raise UnknownIndex(f"{path}: manifest is missing {key!r}")
    return manifest
