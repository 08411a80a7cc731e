"""Shared fixtures: the banana golden corpus and a small built index."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pytest
from hypothesis import settings

from fmgram.builder import build_corpus
from fmgram.fmcore import FmPart, build_fm_part
from fmgram.ingest import RawDocument

from corpusgen import english_text

# first call into a jit kernel pays one-time compilation; per-example
# deadlines would misattribute that cost to the example that hit it
settings.register_profile("jit", deadline=None)
settings.load_profile("jit")

# hand-checked golden values for the blob b"banana\x00"
BANANA_BLOB = b"banana\x00"
BANANA_SA = [6, 5, 3, 1, 0, 4, 2]
BANANA_BWT = b"annb\x00aa"


@pytest.fixture(scope="session")
def banana_part() -> FmPart:
    return build_fm_part(BANANA_BLOB, sa_rate=2, isa_rate=2)


def make_word_docs(rng: np.random.Generator, count: int,
                   doc_bytes: int = 900) -> list[RawDocument]:
    """English documents of roughly doc_bytes with per-document metadata."""
    docs = []
    for i in range(count):
        text = english_text(rng, doc_bytes).encode("utf-8")
        docs.append(RawDocument(text, {"id": f"doc-{i}", "n": str(i)}))
    return docs


def uniform_word_docs(rng: np.random.Generator, count: int,
                      doc_bytes: int = 512) -> list[RawDocument]:
    """Documents of exactly doc_bytes each, so shard plans divide evenly."""
    docs = []
    for i in range(count):
        text = english_text(rng, doc_bytes + 64).encode("utf-8")[:doc_bytes]
        docs.append(RawDocument(text, {"id": f"doc-{i}"}))
    return docs


@dataclass
class BuiltCorpus:
    dir: str
    docs: list[RawDocument]
    report: object


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> BuiltCorpus:
    """120 uniform docs split over 4 shards; shared by engine/cli/api tests."""
    rng = np.random.default_rng(42)
    docs = make_word_docs(rng, 120)
    out = tmp_path_factory.mktemp("small_corpus")
    total = sum(len(d.text) + 1 for d in docs)
    report = build_corpus(docs, out, name="small",
                          shard_bytes=total // 4 + 1, threads=2)
    return BuiltCorpus(str(out), docs, report)


# measured values recorded by the acceptance tests, echoed at session end
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance measurements")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
