"""On-disk shard format: round-trip, determinism, corruption detection."""

import struct

import numpy as np
import pytest

from corpusgen import random_text
from fmgram.errors import BadMagic, ChecksumMismatch, VersionMismatch
from fmgram.fmcore import FmShard, build_fm_part
from fmgram.ingest import RawDocument, build_blob, sanitize_document
from fmgram.store import ALIGN, MAGIC, ShardFile, serialize_shard


def make_shard(seed: int = 0, docs: int = 6) -> tuple[FmShard, list[bytes]]:
    rng = np.random.default_rng(seed)
    texts = [random_text(rng, 26, int(rng.integers(50, 400)))
             for _ in range(docs)]
    raw = [RawDocument(sanitize_document(t), {"id": str(i)})
           for i, t in enumerate(texts)]
    text, meta, offsets = build_blob(raw)
    shard = FmShard(build_fm_part(text.data, 4, 8),
                    build_fm_part(meta.data, 4, 8),
                    offsets.starts, offsets.meta_starts)
    return shard, [d.text for d in raw]


@pytest.fixture(scope="module")
def written(tmp_path_factory):
    path = tmp_path_factory.mktemp("store") / "shard-00000.fgmi"
    shard, texts = make_shard()
    serialize_shard(shard, path)
    return path, shard, texts


def test_round_trip_queries_match_memory(written):
    path, shard, texts = written
    with ShardFile.open(path) as sf:
        assert sf.shard.doc_count == shard.doc_count
        for i, t in enumerate(texts):
            assert sf.shard.doc_text(i) == t
        for q in (b"a", b"ab", texts[0][:5], b"zzzzzzz"):
            assert sf.shard.text.find(q) == shard.text.find(q)


def test_serialization_deterministic(tmp_path):
    shard, _ = make_shard(seed=3)
    p1, p2 = tmp_path / "a.fgmi", tmp_path / "b.fgmi"
    serialize_shard(shard, p1)
    serialize_shard(shard, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_sections_are_aligned(written):
    path, _, _ = written
    data = path.read_bytes()
    magic, version, n, doc_count, a, b, sections = struct.unpack_from(
        "<4sIQQIII", data, 0)
    assert magic == MAGIC and version == 1
    entry = struct.Struct("<16sQQQ")
    off = struct.calcsize("<4sIQQIII")
    for _ in range(sections):
        name, s_off, s_len, _ = entry.unpack_from(data, off)
        assert s_off % ALIGN == 0
        assert s_off + s_len <= len(data)
        off += entry.size


def test_verify_passes_on_clean_file(written):
    path, _, _ = written
    with ShardFile.open(path, verify=True) as sf:
        assert sf.shard.doc_count > 0


def test_flipped_payload_byte_caught(written, tmp_path):
    path, _, _ = written
    data = bytearray(path.read_bytes())
    data[ALIGN + 24] ^= 0x01  # inside the first section's payload
    bad = tmp_path / "bad.fgmi"
    bad.write_bytes(bytes(data))
    with pytest.raises(ChecksumMismatch):
        ShardFile.open(bad, verify=True)


def test_bad_magic(tmp_path, written):
    path, _, _ = written
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    bad = tmp_path / "magic.fgmi"
    bad.write_bytes(bytes(data))
    with pytest.raises(BadMagic):
        ShardFile.open(bad)


def test_bad_version(tmp_path, written):
    path, _, _ = written
    data = bytearray(path.read_bytes())
    struct.pack_into("<I", data, 4, 9)
    bad = tmp_path / "version.fgmi"
    bad.write_bytes(bytes(data))
    with pytest.raises(VersionMismatch):
        ShardFile.open(bad)


def test_truncated_file(tmp_path, written):
    path, _, _ = written
    data = path.read_bytes()
    bad = tmp_path / "trunc.fgmi"
    bad.write_bytes(data[:len(data) // 2])
    with pytest.raises(ChecksumMismatch):
        ShardFile.open(bad)


def test_mangled_section_table(tmp_path, written):
    path, _, _ = written
    data = bytearray(path.read_bytes())
    header = struct.calcsize("<4sIQQIII")
    struct.pack_into("<Q", data, header + 16, 2**60)  # absurd offset
    bad = tmp_path / "table.fgmi"
    bad.write_bytes(bytes(data))
    with pytest.raises(ChecksumMismatch):
        ShardFile.open(bad)


def test_close_releases_file(written):
    path, _, texts = written
    sf = ShardFile.open(path)
    assert sf.shard.doc_text(0) == texts[0]
    sf.close()
