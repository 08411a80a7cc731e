"""Corpus ingestion: sanitize raw documents, concatenate them into shard
blobs with separators, and plan document-to-shard assignment.

Blob layout for a shard holding documents d_1 .. d_D:

    d_1 0xFF d_2 0xFF ... d_D 0xFF 0x00

Every document is followed by one 0xFF separator and the whole blob ends
with a single 0x00 sentinel, the unique lexicographically smallest byte.
Sanitization guarantees neither reserved byte occurs inside a document.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import BadMagic, DocTooLarge, EmptyCorpus, VersionMismatch

SEPARATOR = 0xFF
SENTINEL = 0x00
# UTF-8 encoding of U+FFFD, substituted for either reserved byte.
REPLACEMENT = b"\xef\xbf\xbd"

OFFSETS_MAGIC = b"FGMO"
OFFSETS_VERSION = 1


@dataclass(frozen=True)
class RawDocument:
    """One input document: UTF-8 payload bytes plus a flat string map."""

    text: bytes
    metadata: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CorpusBlob:
    """Concatenated sanitized bytes of one shard, separators included."""

    data: bytes
    doc_count: int

    @property
    def n(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class OffsetTable:
    """Document start positions in the text and metadata blobs.

    Both arrays hold doc_count + 1 entries: entry i is the first byte of
    document i and the final entry is the sentinel position (n - 1), so
    document i always spans [starts[i], starts[i+1] - 1) with the byte at
    starts[i+1] - 1 being its separator.
    """

    starts: np.ndarray
    meta_starts: np.ndarray


@dataclass(frozen=True)
class ShardPlan:
    """Contiguous document ranges assigned to each shard."""

    shard_count: int
    assignments: list[tuple[int, int]]  # half-open [lo, hi) doc ranges
    target_shard_bytes: int


def sanitize_document(raw: bytes) -> bytes:
    """Replace every 0x00 and 0xFF byte with the UTF-8 bytes of U+FFFD.

    Total function: all other bytes pass through unchanged, in order.
    """
    if SENTINEL not in raw and SEPARATOR not in raw:
        return raw
    return raw.replace(b"\x00", REPLACEMENT).replace(b"\xff", REPLACEMENT)


def metadata_line(metadata: Mapping[str, str]) -> bytes:
    """Serialize a metadata map to one compact JSON line.

    json escapes control characters, so the output never contains a raw
    newline or either reserved byte.
    """
    return json.dumps(dict(metadata), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def build_blob(docs: Sequence[RawDocument]) -> tuple[CorpusBlob, CorpusBlob, OffsetTable]:
    """Concatenate documents into a text blob and a parallel metadata blob.

    Documents must already be sanitized. Returns (text, meta, offsets)
    where offsets.starts[i] is the first byte of document i in the text
    blob and offsets.meta_starts[i] the same in the metadata blob.
    """
    if not docs:
        raise EmptyCorpus("cannot build a blob from zero documents")
    text_parts: list[bytes] = []
    meta_parts: list[bytes] = []
    starts = np.empty(len(docs) + 1, dtype=np.uint64)
    meta_starts = np.empty(len(docs) + 1, dtype=np.uint64)
    pos = 0
    meta_pos = 0
    sep = bytes([SEPARATOR])
    for i, doc in enumerate(docs):
        starts[i] = pos
        meta_starts[i] = meta_pos
        line = sanitize_document(metadata_line(doc.metadata))
        text_parts.append(doc.text)
        text_parts.append(sep)
        meta_parts.append(line)
        meta_parts.append(sep)
        pos += len(doc.text) + 1
        meta_pos += len(line) + 1
    starts[len(docs)] = pos
    meta_starts[len(docs)] = meta_pos
    tail = bytes([SENTINEL])
    text_parts.append(tail)
    meta_parts.append(tail)
    text = CorpusBlob(b"".join(text_parts), len(docs))
    meta = CorpusBlob(b"".join(meta_parts), len(docs))
    return text, meta, OffsetTable(starts, meta_starts)


def split_blob(blob: CorpusBlob) -> list[bytes]:
    """Recover the sanitized documents from a blob (inverse of build_blob)."""
    body = blob.data
    if not body or body[-1] != SENTINEL:
        raise ValueError("blob does not end with the sentinel byte")
    parts = body[:-1].split(bytes([SEPARATOR]))
    # the final separator leaves one empty trailing piece
    if parts and parts[-1] == b"":
        parts.pop()
    return parts


def recover_offsets(blob: CorpusBlob) -> np.ndarray:
    """Recompute document start positions (including the final sentinel
    entry) from the blob alone."""
    arr = np.frombuffer(blob.data, dtype=np.uint8)
    seps = np.flatnonzero(arr == SEPARATOR)
    starts = np.empty(len(seps) + 1, dtype=np.uint64)
    starts[0] = 0
    starts[1:] = seps + 1
    return starts


def plan_shards(doc_sizes: Sequence[int], target_shard_bytes: int) -> ShardPlan:
    """Greedy sequential packing preserving document order.

    A shard closes when adding the next document would push its running
    size past target_shard_bytes. Sizes are whatever the caller wants
    packed (typically sanitized length + 1 for the separator).
    """
    if len(doc_sizes) == 0:
        raise EmptyCorpus("cannot plan shards for zero documents")
    assignments: list[tuple[int, int]] = []
    lo = 0
    cur = 0
    for i, size in enumerate(doc_sizes):
        if size > target_shard_bytes:
            raise DocTooLarge(
                f"document {i} is {size} bytes, larger than the "
                f"{target_shard_bytes}-byte shard target")
        if cur and cur + size > target_shard_bytes:
            assignments.append((lo, i))
            lo = i
            cur = 0
        cur += size
    assignments.append((lo, len(doc_sizes)))
    return ShardPlan(len(assignments), assignments, target_shard_bytes)


def iter_jsonl(path: str | Path) -> Iterator[RawDocument]:
    """Yield sanitized documents from a JSON Lines file.

    Each line must be an object with a string field "text"; an optional
    object field "meta" carries flat string-to-string metadata.
    """
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                raise ValueError(f"{path}:{lineno}: object with a string "
                                 f"'text' field required")
            meta = obj.get("meta") or {}
            if not isinstance(meta, dict):
                raise ValueError(f"{path}:{lineno}: 'meta' must be an object")
            meta = {str(k): str(v) for k, v in meta.items()}
            yield RawDocument(sanitize_document(obj["text"].encode("utf-8")), meta)


def read_documents(paths: Iterable[str | Path]) -> list[RawDocument]:
    """Read and sanitize all documents from the given JSONL files, in order."""
    docs: list[RawDocument] = []
    for path in paths:
        docs.extend(iter_jsonl(path))
    return docs


def write_offsets_file(path: str | Path, starts: np.ndarray) -> None:
    """Write a construction-time offsets file (magic FGMO, little-endian)."""
    with open(path, "wb") as fh:
        fh.write(OFFSETS_MAGIC)
        fh.write(struct.pack("<IQ", OFFSETS_VERSION, len(starts)))
        fh.write(np.ascontiguousarray(starts, dtype="<u8").tobytes())


def read_offsets_file(path: str | Path) -> np.ndarray:
    """Read back a construction-time offsets file."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != OFFSETS_MAGIC:
            raise BadMagic(f"{path}: expected {OFFSETS_MAGIC!r}, got {magic!r}")
        version, count = struct.unpack("<IQ", fh.read(12))
        if version != OFFSETS_VERSION:
            raise VersionMismatch(f"{path}: version {version} unsupported")
        data = fh.read(8 * count)
        return np.frombuffer(data, dtype="<u8").copy()
