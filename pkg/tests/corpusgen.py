"""Deterministic corpus generators shared across the test suite.

The English generator pads words with multi-space runs so the byte
distribution lands near 2.1 bits of zeroth-order entropy, the regime the
index's size targets are tuned for. Plain prose sits above 4 bits and
would miss them.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

WORDS = (
    "the of and to in is was he for it with as his on be at by had not "
    "are but from or have an they which one you were all her she there "
    "would their we him been has when who will no more if out so up said "
    "what its about than into them can only other time new some could "
    "these two may first then do any like my now over such our man me "
    "even most made after also did many off before must well back "
    "through years much where your way down should because each just "
    "those people how too little state good very make world still see "
    "own men work long here get both between life being under never day "
    "same another know while last might us great old year come since "
    "against go came right used take three "
    "states himself few house use during without again place american "
    "around however home small found thought went say part once general "
    "high upon school every don does got united left number course war "
    "until always away something fact though water less public put "
    "think almost hand enough far took head yet government system "
    "better set told nothing night end why called didn eyes find going "
    "look asked later knew point next city business case give group "
    "toward young let days room within child keep family seemed "
    "important often white company early mind others money turned "
    "problem began different door thing help side certain kind knows "
    "per whole god seems able national along men order possible today "
).split()

_MEAN_WORD = sum(len(w) for w in WORDS) / len(WORDS)


def english_text(rng: np.random.Generator, target_bytes: int) -> str:
    """Whitespace-heavy English word salad of roughly target_bytes."""
    picks = rng.integers(0, len(WORDS), size=max(
        16, int(target_bytes / (_MEAN_WORD + 10.0) * 1.3)))
    pads = rng.integers(7, 14, size=len(picks))
    breaks = rng.integers(0, 15, size=len(picks))
    parts: list[str] = []
    size = 0
    for pick, pad, brk in zip(picks, pads, breaks):
        word = WORDS[int(pick)]
        sep = "\n" + " " * (int(pad) - 1) if brk == 0 else " " * int(pad)
        parts.append(word + sep)
        size += len(word) + int(pad)
        if size >= target_bytes:
            break
    return "".join(parts).rstrip() or "the"


def english_docs(rng: np.random.Generator, total_bytes: int,
                 mean_doc_bytes: int = 4096) -> list[tuple[str, dict]]:
    docs: list[tuple[str, dict]] = []
    size = 0
    while size < total_bytes:
        want = int(rng.integers(mean_doc_bytes // 2, mean_doc_bytes * 3 // 2))
        text = english_text(rng, want)
        docs.append((text, {"id": f"d{len(docs)}"}))
        size += len(text.encode("utf-8"))
    return docs


_MIXED_POOLS = (
    "the quick brown fox jumps over the lazy dog ",
    "δρεπάνι και σφυρί στον ουρανό της θάλασσας ",
    "съешь же ещё этих мягких французских булок ",
    "我能吞下玻璃而不伤身体 这是一个测试文档 ",
    "いろはにほへと ちりぬるを わかよたれそ ",
    "🎉 emoji soup 🌍🔍💾 and accents: naïve façade jalapeño ",
)


def mixed_docs(rng: np.random.Generator, total_bytes: int,
               mean_doc_bytes: int = 2048) -> list[tuple[str, dict]]:
    """Multi-script documents; some carry bytes the sanitizer must rewrite.

    Every document embeds a unique fixed-width marker (uidNNNNN) so tests
    can fetch it back by content search. One in eight documents is kept
    under 500 bytes to cover the short reconstruction path alongside the
    chunked one.
    """
    docs: list[tuple[str, dict]] = []
    size = 0
    while size < total_bytes:
        parts: list[str] = []
        if rng.integers(0, 8) == 0:
            want = int(rng.integers(40, 500))
        else:
            want = int(rng.integers(mean_doc_bytes // 2,
                                    mean_doc_bytes * 3 // 2))
        got = 0
        while got < want:
            chunk = _MIXED_POOLS[int(rng.integers(len(_MIXED_POOLS)))]
            parts.append(chunk)
            got += len(chunk.encode("utf-8"))
        if rng.integers(0, 10) == 0:
            parts.append("\u0000control\u0000")  # sanitizer rewrites NULs
        parts.insert(int(rng.integers(0, len(parts) + 1)),
                     f" uid{len(docs):05d} ")
        text = "".join(parts)
        docs.append((text, {"id": f"m{len(docs)}", "lang": "mixed"}))
        size += len(text.encode("utf-8"))
    return docs


def write_jsonl(path: str | Path, docs: list[tuple[str, dict]]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for text, meta in docs:
            fh.write(json.dumps({"text": text, "meta": meta},
                                ensure_ascii=False) + "\n")
    return path


ALPHABETS = {
    2: bytes((97, 98)),
    4: bytes((97, 98, 99, 100)),
    26: bytes(range(97, 123)),
    256: bytes(i for i in range(256) if i not in (0x00, 0xFF)),
}


def random_text(rng: np.random.Generator, sigma: int, n: int) -> bytes:
    """Random bytes over one of the fixed test alphabets (reserved-free)."""
    alpha = np.frombuffer(ALPHABETS[sigma], dtype=np.uint8)
    return alpha[rng.integers(0, len(alpha), size=n)].tobytes()
