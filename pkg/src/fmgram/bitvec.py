"""Succinct bitvector with rank/select, and an Elias-Fano sparse set.

The bitvector keeps one absolute u64 rank per 1024-bit superblock (6.25%
overhead) plus the position of every 8192th set and unset bit to seed
select scans. The Elias-Fano structure stores a sorted set of values as
split low/high bits; membership and indexed access cost one or two
select0 calls plus a short scan, at roughly log2(universe/m) + 2 bits
per element.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .errors import NotEnoughOccurrences, OutOfBounds


def pack_width(values: np.ndarray, width: int) -> np.ndarray:
    """Pack unsigned values into consecutive width-bit slots."""
    if width == 0 or len(values) == 0:
        return np.zeros(0, dtype=np.uint64)
    return K._pack_width(np.ascontiguousarray(values, dtype=np.uint64), width)


def unpack_width(words: np.ndarray, width: int, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.uint64)
    for k in range(count):
        out[k] = K._packed_get(words, width, k)
    return out


def words_from_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 uint8 array into little-endian-bit u64 words."""
    packed = np.packbits(bits, bitorder="little")
    pad = (-len(packed)) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view("<u8").copy()


def _select_samples(words: np.ndarray, nbits: int, bitval: int) -> np.ndarray:
    """Positions of occurrences 8192, 16384, ... of bitval (sample t marks
    occurrence index (t+1)*8192), chunked so memory stays flat."""
    out: list[np.ndarray] = []
    seen = 0
    chunk_words = 1 << 14  # 1 Mi bits per chunk
    for w0 in range(0, len(words), chunk_words):
        chunk = words[w0:w0 + chunk_words]
        bits = np.unpackbits(chunk.view(np.uint8), bitorder="little")
        if bitval == 0:
            bits = 1 - bits
        pos = np.flatnonzero(bits)
        g0 = w0 * 64
        limit = nbits - g0
        if len(pos) and pos[-1] >= limit:
            pos = pos[pos < limit]
        if len(pos):
            r = (-seen) % K.SELECT_SAMPLE
            take = pos[r::K.SELECT_SAMPLE]
            if len(take) and seen + r == 0:  # occurrence 0 is never sampled
                take = take[1:]
            if len(take):
                out.append((take + g0).astype(np.uint64))
            seen += len(pos)
    if not out:
        return np.zeros(0, dtype=np.uint64)
    return np.concatenate(out)


def build_rank_directory(words: np.ndarray, nbits: int):
    """Superblock ranks and select samples for a packed bit array."""
    pc = np.bitwise_count(words).astype(np.uint64)
    csum = np.zeros(len(words) + 1, dtype=np.uint64)
    np.cumsum(pc, out=csum[1:])
    # entry k = rank before bit 1024k; k never exceeds nbits >> 10
    nsup = (nbits >> 10) + 1
    idx = np.minimum(np.arange(nsup, dtype=np.int64) * K.SUPER_WORDS,
                     len(words))
    supers = csum[idx].copy()
    total1 = int(csum[-1])
    sel1 = _select_samples(words, nbits, 1)
    sel0 = _select_samples(words, nbits, 0)
    return supers, sel1, sel0, total1


class RankBitvector:
    """Immutable bitvector answering rank and select in near-constant time."""

    def __init__(self, words: np.ndarray, nbits: int, supers: np.ndarray,
                 sel1: np.ndarray, sel0: np.ndarray, total1: int):
        self.words = words
        self.nbits = nbits
        self.supers = supers
        self.sel1 = sel1
        self.sel0 = sel0
        self.count1 = total1

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "RankBitvector":
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        words = words_from_bits(bits)
        return cls.from_words(words, len(bits))

    @classmethod
    def from_words(cls, words: np.ndarray, nbits: int) -> "RankBitvector":
        supers, sel1, sel0, total1 = build_rank_directory(words, nbits)
        return cls(words, nbits, supers, sel1, sel0, total1)

    @property
    def count0(self) -> int:
        return self.nbits - self.count1

    def get(self, i: int) -> int:
        if not 0 <= i < self.nbits:
            raise OutOfBounds(f"bit {i} of {self.nbits}")
        return int((int(self.words[i >> 6]) >> (i & 63)) & 1)

    def rank1(self, i: int) -> int:
        if not 0 <= i <= self.nbits:
            raise OutOfBounds(f"rank position {i} of {self.nbits}")
        return int(K.bv_rank1(self.words, self.supers, i))

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def rank(self, bit: int, i: int) -> int:
        return self.rank1(i) if bit else self.rank0(i)

    def select1(self, k: int) -> int:
        if not 1 <= k <= self.count1:
            raise NotEnoughOccurrences(f"select1({k}) of {self.count1} set bits")
        return int(K.bv_select(self.words, self.supers, self.sel1, self.sel0,
                               self.nbits, k, 1))

    def select0(self, k: int) -> int:
        if not 1 <= k <= self.count0:
            raise NotEnoughOccurrences(f"select0({k}) of {self.count0} unset bits")
        return int(K.bv_select(self.words, self.supers, self.sel1, self.sel0,
                               self.nbits, k, 0))

    def select(self, bit: int, k: int) -> int:
        return self.select1(k) if bit else self.select0(k)


class EliasFano:
    """Sorted set of distinct values in [0, universe), membership-queryable."""

    def __init__(self, universe: int, count: int, low_width: int,
                 low_words: np.ndarray, upper: RankBitvector):
        self.universe = universe
        self.count = count
        self.low_width = low_width
        self.low_words = low_words
        self.upper = upper

    @classmethod
    def from_values(cls, values: np.ndarray, universe: int) -> "EliasFano":
        values = np.ascontiguousarray(values, dtype=np.uint64)
        m = len(values)
        if m == 0:
            upper = RankBitvector.from_bits(np.zeros(1, dtype=np.uint8))
            return cls(universe, 0, 0, np.zeros(0, dtype=np.uint64), upper)
        ratio = max(1, universe // m)
        low_width = ratio.bit_length() - 1
        his = values >> np.uint64(low_width)
        top = int((universe - 1) >> low_width)
        nbits_up = m + top + 1
        bits = np.zeros(nbits_up, dtype=np.uint8)
        bits[his.astype(np.int64) + np.arange(m, dtype=np.int64)] = 1
        upper = RankBitvector.from_bits(bits)
        if low_width:
            mask = np.uint64((1 << low_width) - 1)
            low_words = pack_width(values & mask, low_width)
        else:
            low_words = np.zeros(0, dtype=np.uint64)
        return cls(universe, m, low_width, low_words, upper)

    @property
    def view(self) -> K.EfView:
        up = self.upper
        return K.EfView(self.universe, self.count, self.low_width,
                        self.low_words, up.words, up.supers, up.sel1,
                        up.sel0, up.nbits)

    def index_of(self, v: int) -> int:
        """Rank of v among stored values, or -1 when absent."""
        if not 0 <= v < self.universe:
            raise OutOfBounds(f"value {v} outside universe {self.universe}")
        return int(K.ef_index(self.view, v))

    def __contains__(self, v: int) -> bool:
        return self.index_of(v) >= 0

    def access(self, k: int) -> int:
        if not 0 <= k < self.count:
            raise OutOfBounds(f"element {k} of {self.count}")
        return int(K.ef_access(self.view, k))

    def to_arrays(self) -> list[np.ndarray]:
        """Serialization order shared with the index store."""
        up = self.upper
        header = np.array([self.universe, self.count, self.low_width,
                           up.nbits, up.count1], dtype=np.uint64)
        return [header, self.low_words, up.words, up.supers, up.sel1, up.sel0]

    @classmethod
    def from_arrays(cls, arrays: list[np.ndarray]) -> "EliasFano":
        header, low_words, words, supers, sel1, sel0 = arrays
        upper = RankBitvector(words, int(header[3]), supers, sel1, sel0,
                              int(header[4]))
        return cls(int(header[0]), int(header[1]), int(header[2]),
                   low_words, upper)
