"""On-disk shard index format and the memory-mapped reader.

One file holds everything needed to query one shard: the text part, the
metadata part, and both document offset tables.  Layout:

    header   magic "FGMI", u32 version, u64 n, u64 doc_count,
             u32 sa_rate, u32 isa_rate, u32 section_count
    table    per section: 16-byte name, u64 offset, u64 length,
             u64 checksum (BLAKE2b-64 of the section payload)
    payload  sections at 4096-byte-aligned offsets, in fixed order

Inside a section each array is written as a u64 byte length followed by the
raw little-endian array data, zero-padded to an 8-byte boundary.  Every
array therefore lands 8-byte aligned in the file, so the reader wraps the
mapped bytes in numpy views without copying.  Serialization is a pure
function of the index contents: identical shards produce identical files.
"""

from __future__ import annotations

import hashlib
import mmap
import struct
from pathlib import Path

import numpy as np

from .bitvec import EliasFano
from .errors import BadMagic, ChecksumMismatch, VersionMismatch
from .fmcore import FmPart, FmShard, SampledISA, SampledSA
from .wavelet import WaveletTree

MAGIC = b"FGMI"
VERSION = 1
ALIGN = 4096

_HEADER = struct.Struct("<4sIQQIII")
_ENTRY = struct.Struct("<16sQQQ")

SECTION_NAMES = (
    "wavelet", "ctable", "ssa_marks", "ssa_values", "sisa", "offsets",
    "meta_wavelet", "meta_ctable", "meta_ssa_marks", "meta_ssa_values",
    "meta_sisa", "meta_offsets",
)

# Array dtypes per section, in serialization order.
_WT_DTYPES = ["<u8", "<i4", "<i4", "<i4", "<i4", "u1", "<u8", "<u8", "<u8",
              "<u8", "<u8", "<u8", "<u8", "<u8", "<u8", "<u8"]
_SECTION_DTYPES = {
    "wavelet": _WT_DTYPES,
    "ctable": ["<u8"],
    "ssa_marks": ["<u8"] * 6,
    "ssa_values": ["<u8"] * 2,
    "sisa": ["<u8"] * 2,
    "offsets": ["<u8"],
}
for _name in list(_SECTION_DTYPES):
    _SECTION_DTYPES["meta_" + _name] = _SECTION_DTYPES[_name]


def _checksum(payload) -> int:
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _pack_section(arrays) -> bytes:
    chunks = []
    for arr in arrays:
        raw = np.ascontiguousarray(arr).tobytes()
        chunks.append(struct.pack("<Q", len(raw)))
        chunks.append(raw)
        pad = (-len(raw)) % 8
        if pad:
            chunks.append(b"\x00" * pad)
    return b"".join(chunks)


def _unpack_section(buf, dtypes) -> list[np.ndarray]:
    arrays = []
    cur = 0
    for dt in dtypes:
        (nbytes,) = struct.unpack_from("<Q", buf, cur)
        cur += 8
        dtype = np.dtype(dt)
        if nbytes % dtype.itemsize or cur + nbytes > len(buf):
            raise ChecksumMismatch("section payload is malformed")
        arrays.append(np.frombuffer(buf, dtype=dtype,
                                    count=nbytes // dtype.itemsize,
                                    offset=cur))
        cur += nbytes + ((-nbytes) % 8)
    return arrays


def _part_payloads(part: FmPart, starts: np.ndarray) -> list[bytes]:
    return [
        _pack_section(part.wt.to_arrays()),
        _pack_section([part.ctable]),
        _pack_section(part.ssa.marks.to_arrays()),
        _pack_section(part.ssa.values_to_arrays()),
        _pack_section(part.sisa.to_arrays()),
        _pack_section([np.ascontiguousarray(starts, dtype="<u8")]),
    ]


def serialize_shard(shard: FmShard, path: str | Path) -> int:
    """Write one shard index file; returns the file size in bytes."""
    payloads = (_part_payloads(shard.text, shard.starts)
                + _part_payloads(shard.meta, shard.meta_starts))
    table_end = _HEADER.size + _ENTRY.size * len(SECTION_NAMES)
    out = bytearray()
    out += _HEADER.pack(MAGIC, VERSION, shard.text.n, shard.doc_count,
                        shard.sa_rate, shard.isa_rate, len(SECTION_NAMES))
    offset = -(-table_end // ALIGN) * ALIGN
    entries = []
    for name, payload in zip(SECTION_NAMES, payloads):
        entries.append((name.encode("ascii").ljust(16, b"\x00"), offset,
                        len(payload), _checksum(payload)))
        offset += -(-len(payload) // ALIGN) * ALIGN
    for entry in entries:
        out += _ENTRY.pack(*entry)
    for (_, off, _, _), payload in zip(entries, payloads):
        out += b"\x00" * (off - len(out))
        out += payload
    with open(path, "wb") as fh:
        fh.write(out)
    return len(out)


def _part_from_sections(sections: dict[str, list[np.ndarray]],
                        prefix: str) -> tuple[FmPart, np.ndarray]:
    wt = WaveletTree.from_arrays(sections[prefix + "wavelet"])
    (ctable,) = sections[prefix + "ctable"]
    if len(ctable) != 257:
        raise ChecksumMismatch(f"{prefix}ctable has {len(ctable)} entries")
    ssa = SampledSA.from_arrays(sections[prefix + "ssa_marks"],
                                sections[prefix + "ssa_values"])
    sisa = SampledISA.from_arrays(sections[prefix + "sisa"])
    (starts,) = sections[prefix + "offsets"]
    return FmPart(wt.n, wt, ctable, ssa, sisa), starts


class ShardFile:
    """One shard index mapped read-only into memory."""

    def __init__(self, path: Path, file, mapped, view, entries, shard: FmShard,
                 n: int, doc_count: int, sa_rate: int, isa_rate: int):
        self.path = path
        self._file = file
        self._mapped = mapped
        self._view = view
        self.entries = entries  # name -> (offset, length, checksum)
        self.shard = shard
        self.n = n
        self.doc_count = doc_count
        self.sa_rate = sa_rate
        self.isa_rate = isa_rate

    @classmethod
    def open(cls, path: str | Path, verify: bool = False) -> "ShardFile":
        path = Path(path)
        fh = open(path, "rb")
        try:
            mapped = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
        except Exception:
            fh.close()
            raise
        view = memoryview(mapped)
        try:
            magic, version, n, doc_count, sa_rate, isa_rate, nsec = \
                _HEADER.unpack_from(view, 0)
            if magic != MAGIC:
                raise BadMagic(f"{path}: expected {MAGIC!r}, got {magic!r}")
            if version != VERSION:
                raise VersionMismatch(f"{path}: version {version} unsupported")
            if nsec != len(SECTION_NAMES):
                raise VersionMismatch(f"{path}: {nsec} sections, expected "
                                      f"{len(SECTION_NAMES)}")
            entries = {}
            for i in range(nsec):
                raw_name, off, length, checksum = _ENTRY.unpack_from(
                    view, _HEADER.size + _ENTRY.size * i)
                name = raw_name.rstrip(b"\x00").decode("ascii")
                if name != SECTION_NAMES[i]:
                    raise VersionMismatch(f"{path}: section {i} is {name!r}, "
                                          f"expected {SECTION_NAMES[i]!r}")
                if off % ALIGN or off + length > len(view):
                    raise ChecksumMismatch(f"{path}: section {name} exceeds "
                                           f"the file")
                entries[name] = (off, length, checksum)
            try:
                sections = {
                    name: _unpack_section(view[off:off + length],
                                          _SECTION_DTYPES[name])
                    for name, (off, length, _) in entries.items()
                }
                text, starts = _part_from_sections(sections, "")
                meta, meta_starts = _part_from_sections(sections, "meta_")
                shard = FmShard(text, meta, starts, meta_starts)
            except (ValueError, IndexError) as exc:
                raise ChecksumMismatch(f"{path}: malformed index: {exc}") \
                    from exc
            if text.n != n or shard.doc_count != doc_count:
                raise ChecksumMismatch(f"{path}: header does not match the "
                                       f"stored index")
            if shard.sa_rate != sa_rate or shard.isa_rate != isa_rate:
                raise ChecksumMismatch(f"{path}: sample rates do not match "
                                       f"the header")
            handle = cls(path, fh, mapped, view, entries, shard, n, doc_count,
                         sa_rate, isa_rate)
        except Exception:
            # parsed arrays may still hold buffer exports; let the last
            # reference, wherever it is, unmap the file
            try:
                view.release()
            except BufferError:
                pass
            try:
                mapped.close()
            except BufferError:
                pass
            fh.close()
            raise
        if verify:
            handle.verify()
        return handle

    def verify(self) -> None:
        """Recompute every section checksum; raises ChecksumMismatch."""
        for name, (off, length, stored) in self.entries.items():
            actual = _checksum(self._view[off:off + length])
            if actual != stored:
                raise ChecksumMismatch(
                    f"{self.path}: section {name} checksum "
                    f"{actual:#018x} != stored {stored:#018x}")

    def close(self) -> None:
        """Drop the handle's references; the map dies with its last view."""
        self.shard = None
        self.entries = None
        self._view = None

    def __enter__(self) -> "ShardFile":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
