"""Per-blob compressed index: BWT wavelet tree plus sampled SA and ISA.

A part indexes one byte blob (the concatenated documents, or their metadata
lines).  It answers three queries without ever storing the blob itself:

  find(q)          half-open SA-rank range of suffixes prefixed by q
  locate(rank)     text position of one suffix, via LF steps to a mark
  extract(s, len)  blob bytes, reconstructed backward from an ISA anchor

All hot paths run through the numba kernels in ``_kernels``, which see the
part only as a namedtuple of flat arrays.  The same kernels therefore serve
freshly built parts and parts opened over memory-mapped index sections.
"""

import json
import time

import numpy as np

from . import _kernels as K
from .bitvec import EliasFano, pack_width
from .errors import OutOfBounds
from .sa import build_suffix_array, derive_bwt
from .wavelet import WaveletTree

# Step labels reported by builds, in execution order.
BUILD_STEPS = ("SA+BWT", "alphabet", "wavelet tree", "sample SA", "sample ISA")

DEFAULT_SA_RATE = 32
DEFAULT_ISA_RATE = 64


def build_ctable(freqs: np.ndarray) -> np.ndarray:
    """Cumulative symbol counts: ctable[c] = occurrences of bytes < c."""
    freqs = np.asarray(freqs, dtype=np.uint64)
    if len(freqs) != 256:
        raise ValueError(f"expected 256 symbol counts, got {len(freqs)}")
    ctable = np.zeros(257, dtype=np.uint64)
    np.cumsum(freqs, out=ctable[1:])
    return ctable


class SampledSA:
    """Every a-th suffix-array value, addressed by SA rank.

    Ranks whose SA value is a multiple of the rate are "marked"; the marked
    rank set is an Elias-Fano set over [0, n) and the values (divided by the
    rate) are bit-packed.  locate() LF-walks from any rank to the nearest
    marked one, so the walk length is bounded by rate - 1.
    """

    def __init__(self, rate: int, marks: EliasFano, values_words: np.ndarray,
                 values_width: int, count: int):
        self.rate = rate
        self.marks = marks
        self.values_words = values_words
        self.values_width = values_width
        self.count = count

    @classmethod
    def build(cls, sa: np.ndarray, rate: int) -> "SampledSA":
        if rate < 1:
            raise ValueError(f"sample rate must be positive, got {rate}")
        n = len(sa)
        sa64 = sa.astype(np.int64, copy=False)
        mask = (sa64 % rate) == 0
        ranks = np.flatnonzero(mask).astype(np.uint64)
        vals = (sa64[mask] // rate).astype(np.uint64)
        marks = EliasFano.from_values(ranks, universe=n)
        width = max(1, int((n - 1) // rate).bit_length())
        return cls(rate, marks, pack_width(vals, width), width, len(vals))

    def get(self, k: int) -> int:
        """SA value of the k-th marked rank."""
        if not 0 <= k < self.count:
            raise OutOfBounds(f"sample {k} of {self.count}")
        return int(K._packed_get(self.values_words, self.values_width, k)) \
            * self.rate

    def values_to_arrays(self) -> list[np.ndarray]:
        header = np.array([self.rate, self.count, self.values_width],
                          dtype=np.uint64)
        return [header, self.values_words]

    @classmethod
    def from_arrays(cls, marks_arrays: list[np.ndarray],
                    values_arrays: list[np.ndarray]) -> "SampledSA":
        header, words = values_arrays
        return cls(int(header[0]), EliasFano.from_arrays(marks_arrays),
                   words, int(header[2]), int(header[1]))


class SampledISA:
    """ISA at every b-th text position, plus an anchor at position n - 1.

    values[j] = ISA[j * rate]; the final entry is ISA[n - 1] so extractions
    ending in the last partial block still have an anchor at most rate - 1
    steps past their end.
    """

    def __init__(self, rate: int, words: np.ndarray, width: int, count: int):
        self.rate = rate
        self.words = words
        self.width = width
        self.count = count

    @classmethod
    def build(cls, sa: np.ndarray, rate: int) -> "SampledISA":
        if rate < 1:
            raise ValueError(f"sample rate must be positive, got {rate}")
        n = len(sa)
        if int(sa[0]) != n - 1:
            raise ValueError("suffix array does not start at the sentinel")
        isa = np.empty(n, dtype=np.int64)
        isa[sa.astype(np.int64, copy=False)] = np.arange(n, dtype=np.int64)
        vals = isa[0:n:rate]
        vals = np.append(vals, isa[n - 1])
        width = max(1, (n - 1).bit_length())
        return cls(rate, pack_width(vals.astype(np.uint64), width), width,
                   len(vals))

    def get(self, k: int) -> int:
        if not 0 <= k < self.count:
            raise OutOfBounds(f"sample {k} of {self.count}")
        return int(K._packed_get(self.words, self.width, k))

    def to_arrays(self) -> list[np.ndarray]:
        header = np.array([self.rate, self.count, self.width],
                          dtype=np.uint64)
        return [header, self.words]

    @classmethod
    def from_arrays(cls, arrays: list[np.ndarray]) -> "SampledISA":
        header, words = arrays
        return cls(int(header[0]), words, int(header[2]), int(header[1]))


class FmPart:
    """Queryable index over one blob."""

    def __init__(self, n: int, wt: WaveletTree, ctable: np.ndarray,
                 ssa: SampledSA, sisa: SampledISA):
        self.n = n
        self.wt = wt
        self.ctable = ctable
        self.ssa = ssa
        self.sisa = sisa
        self._view = None

    @property
    def view(self) -> K.FmView:
        if self._view is None:
            self._view = K.FmView(
                self.n, self.ssa.rate, self.sisa.rate,
                self.wt.view, self.ctable,
                self.ssa.marks.view,
                self.ssa.values_words, self.ssa.values_width,
                self.sisa.words, self.sisa.width, self.sisa.count)
        return self._view

    def find(self, query: bytes) -> tuple[int, int]:
        """Half-open SA-rank range [lo, hi) of suffixes prefixed by query.

        The empty query matches everywhere and yields [0, n).
        """
        q = np.frombuffer(query, dtype=np.uint8)
        v = self.view
        lo, hi = K.fm_find(v.wt, v.ctable, v.n, q)
        return int(lo), int(hi)

    def count(self, query: bytes) -> int:
        lo, hi = self.find(query)
        return hi - lo

    def locate(self, rank: int) -> int:
        """Text position of the suffix at the given SA rank."""
        if not 0 <= rank < self.n:
            raise OutOfBounds(f"rank {rank} of {self.n}")
        return int(K.fm_locate(self.view, rank))

    def locate_batch(self, ranks: np.ndarray) -> np.ndarray:
        ranks = np.ascontiguousarray(ranks, dtype=np.int64)
        if len(ranks) and not (0 <= int(ranks.min())
                               and int(ranks.max()) < self.n):
            raise OutOfBounds("rank outside [0, n)")
        out = np.empty(len(ranks), dtype=np.int64)
        K.fm_locate_many(self.view, ranks, out)
        return out

    def extract(self, start: int, length: int) -> bytes:
        """Blob bytes [start, start + length), reconstructed from the index."""
        if start < 0 or length < 0 or start + length > self.n:
            raise OutOfBounds(
                f"range [{start}, {start + length}) of {self.n}")
        out = np.empty(length, dtype=np.uint8)
        K.fm_extract(self.view, start, length, out)
        return out.tobytes()


def lf_step(part: FmPart, rank: int) -> tuple[int, int]:
    """One backward step: (BWT symbol at rank, rank of the previous suffix)."""
    if not 0 <= rank < part.n:
        raise OutOfBounds(f"rank {rank} of {part.n}")
    sym, nxt = K.wt_access_lf(part.wt.view, part.ctable, rank)
    return int(sym), int(nxt)


def build_fm_part(blob: bytes | np.ndarray,
                  sa_rate: int = DEFAULT_SA_RATE,
                  isa_rate: int = DEFAULT_ISA_RATE,
                  timings: dict | None = None) -> FmPart:
    """Index one sentinel-terminated blob, accumulating per-step wall time."""
    def step(name, start):
        if timings is not None:
            now = time.perf_counter()
            timings[name] = timings.get(name, 0.0) + (now - start)
            return now
        return time.perf_counter()

    t = time.perf_counter()
    sa = build_suffix_array(blob)
    bwt = derive_bwt(blob, sa)
    t = step("SA+BWT", t)
    freqs = np.bincount(bwt, minlength=256)
    ctable = build_ctable(freqs)
    t = step("alphabet", t)
    wt = WaveletTree.build(bwt)
    t = step("wavelet tree", t)
    ssa = SampledSA.build(sa, sa_rate)
    t = step("sample SA", t)
    sisa = SampledISA.build(sa, isa_rate)
    step("sample ISA", t)
    return FmPart(len(bwt), wt, ctable, ssa, sisa)


class FmShard:
    """Text and metadata parts of one shard, plus document boundaries.

    Document d occupies text positions [starts[d], starts[d+1] - 1); the
    excluded byte is the separator that terminates it.  starts has one extra
    entry pointing at the sentinel, so the last document ends at n - 2.
    The metadata blob is laid out identically via meta_starts.
    """

    def __init__(self, text: FmPart, meta: FmPart, starts: np.ndarray,
                 meta_starts: np.ndarray):
        if len(starts) != len(meta_starts):
            raise ValueError("text and metadata document counts differ")
        if int(starts[-1]) != text.n - 1 or int(meta_starts[-1]) != meta.n - 1:
            raise ValueError("offset tables do not end at the sentinel")
        self.text = text
        self.meta = meta
        self.starts = np.ascontiguousarray(starts, dtype=np.uint64)
        self.meta_starts = np.ascontiguousarray(meta_starts, dtype=np.uint64)

    @property
    def doc_count(self) -> int:
        return len(self.starts) - 1

    @property
    def sa_rate(self) -> int:
        return self.text.ssa.rate

    @property
    def isa_rate(self) -> int:
        return self.text.sisa.rate

    def doc_of(self, pos: int) -> int:
        """Document whose span (separator included) contains text position pos."""
        if not 0 <= pos < int(self.starts[-1]):
            raise OutOfBounds(f"position {pos} of {int(self.starts[-1])}")
        return int(np.searchsorted(self.starts, pos, side="right")) - 1

    def doc_span(self, d: int) -> tuple[int, int]:
        """Half-open text byte range of document d, separator excluded."""
        if not 0 <= d < self.doc_count:
            raise OutOfBounds(f"document {d} of {self.doc_count}")
        return int(self.starts[d]), int(self.starts[d + 1]) - 1

    def meta_span(self, d: int) -> tuple[int, int]:
        if not 0 <= d < self.doc_count:
            raise OutOfBounds(f"document {d} of {self.doc_count}")
        return int(self.meta_starts[d]), int(self.meta_starts[d + 1]) - 1

    def doc_text(self, d: int) -> bytes:
        lo, hi = self.doc_span(d)
        return self.text.extract(lo, hi - lo)

    def doc_meta(self, d: int) -> dict:
        lo, hi = self.meta_span(d)
        return json.loads(self.meta.extract(lo, hi - lo).decode("utf-8"))
