"""Numba kernels for query-time work over flat little-endian array views.

Every structure a query touches is a plain numpy array (possibly a view
into a memory-mapped index file), grouped into namedtuples so the same
kernels serve freshly built shards and shards opened from disk. Bit i of
a bitvector lives at words[i >> 6] bit (i & 63).

Rank directories store one absolute u64 count per 1024-bit superblock;
select samples store the position of every 8192th set (and unset) bit.
Node-local structures are slices of shared arrays addressed by per-node
base offsets.
"""

from __future__ import annotations

from collections import namedtuple

import numpy as np
from numba import njit

SUPER_BITS = 1024
SUPER_WORDS = SUPER_BITS // 64
SELECT_SAMPLE = 8192

# Huffman-shaped wavelet tree over one string.
WtView = namedtuple("WtView", [
    "n",          # encoded length
    "left", "right", "sym",      # i32 node arrays; sym >= 0 marks a leaf
    "bvslot",                    # i32: internal node -> bitvector slot
    "code_len", "code_bits",     # u8[256], u64[256] canonical codes
    "word_off", "bit_len",       # u64[slots+1], u64[slots]
    "sup_off", "sel1_off", "sel0_off",  # u64[slots+1]
    "words", "supers", "sel1", "sel0",  # flat u64 arrays
])

# Elias-Fano set of sorted values over universe [0, n).
EfView = namedtuple("EfView", [
    "n", "m", "low_width",
    "low_words",
    "up_words", "up_supers", "up_sel1", "up_sel0", "up_nbits",
])

# Full per-blob FM structures.
FmView = namedtuple("FmView", [
    "n", "a", "b",
    "wt", "ctable",
    "marks",                      # EfView of marked SA ranks
    "vals_words", "vals_width",   # marked SA values / a, packed
    "sisa_words", "sisa_width", "sisa_count",
])


@njit(inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + (
        (x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(inline="always")
def _getbit(words, word_base, i):
    return np.int64(
        (words[word_base + (i >> 6)] >> np.uint64(i & 63)) & np.uint64(1))


@njit(inline="always")
def _rank1_local(words, word_base, supers, sup_base, i):
    """Count set bits among local bits [0, i) of one node's region."""
    k = i >> 10
    r = np.int64(supers[sup_base + k])
    w = word_base + (k << 4)
    last = word_base + (i >> 6)
    while w < last:
        r += _popcount(words[w])
        w += 1
    rem = i & 63
    if rem:
        r += _popcount(words[last] & ((np.uint64(1) << np.uint64(rem)) - np.uint64(1)))
    return r


@njit
def _select_local(words, word_base, supers, sup_base, nsup, samples,
                  samp_base, nsamp, k, bitval):
    """Local position of the k-th (1-based) occurrence of bitval."""
    j = (k - 1) >> 13  # sample t holds occurrence (t+1)*8192
    p0 = np.int64(0)
    if j >= 1 and j - 1 < nsamp:
        p0 = np.int64(samples[samp_base + j - 1])
    # superblock binary search: largest sb with count-before < k
    lo = p0 >> 10
    hi = nsup - 1  # supers has nsup entries covering bit prefixes
    while lo < hi:
        mid = (lo + hi + 1) >> 1
        cnt = np.int64(supers[sup_base + mid])
        if bitval == 0:
            cnt = (np.int64(mid) << 10) - cnt
        if cnt < k:
            lo = mid
        else:
            hi = mid - 1
    r = np.int64(supers[sup_base + lo])
    if bitval == 0:
        r = (np.int64(lo) << 10) - r
    w = word_base + (lo << 4)
    while True:
        word = words[w]
        if bitval == 0:
            word = ~word
        c = _popcount(word)
        if r + c >= k:
            break
        r += c
        w += 1
    # scan the word for the (k - r)-th matching bit
    need = k - r
    word = words[w]
    if bitval == 0:
        word = ~word
    pos = (w - word_base) << 6
    while True:
        if word & np.uint64(1):
            need -= 1
            if need == 0:
                return pos
        word >>= np.uint64(1)
        pos += 1


@njit(inline="always")
def _packed_get(words, width, k):
    """Read the k-th width-bit value from a packed array."""
    pos = k * width
    wi = pos >> 6
    off = np.uint64(pos & 63)
    v = words[wi] >> off
    if np.int64(off) + width > 64:
        v |= words[wi + 1] << (np.uint64(64) - off)
    return v & ((np.uint64(1) << np.uint64(width)) - np.uint64(1))


@njit
def _pack_width(values, width):
    """Pack values into width-bit slots (build-time helper)."""
    m = len(values)
    words = np.zeros((m * width + 63) >> 6, dtype=np.uint64)
    for k in range(m):
        v = np.uint64(values[k])
        pos = k * width
        wi = pos >> 6
        off = np.uint64(pos & 63)
        words[wi] |= v << off
        if np.int64(off) + width > 64:
            words[wi + 1] |= v >> (np.uint64(64) - off)
    return words


# ---------------------------------------------------------------- bitvector

@njit
def bv_rank1(words, supers, i):
    return _rank1_local(words, 0, supers, 0, i)


@njit
def bv_select(words, supers, sel1, sel0, nbits, k, bitval):
    nsup = len(supers)
    if bitval:
        return _select_local(words, 0, supers, 0, nsup, sel1, 0, len(sel1),
                             k, 1)
    return _select_local(words, 0, supers, 0, nsup, sel0, 0, len(sel0), k, 0)


# --------------------------------------------------------------- Elias-Fano

@njit(inline="always")
def _ef_select0(ef, k):
    nsup = len(ef.up_supers)
    return _select_local(ef.up_words, 0, ef.up_supers, 0, nsup, ef.up_sel0,
                         0, len(ef.up_sel0), k, 0)


@njit
def ef_index(ef, v):
    """Index of v in the set, or -1 when absent."""
    if ef.m == 0:
        return np.int64(-1)
    lw = ef.low_width
    hi = v >> lw if lw > 0 else v
    lo = np.uint64(v) & ((np.uint64(1) << np.uint64(lw)) - np.uint64(1))
    if hi == 0:
        s = np.int64(0)
        e = _ef_select0(ef, 1)
    else:
        p1 = _ef_select0(ef, hi)
        s = p1 - hi + 1
        e = _ef_select0(ef, hi + 1) - hi
    for k in range(s, e):
        got = _packed_get(ef.low_words, lw, k) if lw > 0 else np.uint64(0)
        if got == lo:
            return np.int64(k)
        if got > lo:
            return np.int64(-1)
    return np.int64(-1)


@njit
def ef_access(ef, k):
    """The k-th smallest stored value (0-based k)."""
    nsup = len(ef.up_supers)
    pos = _select_local(ef.up_words, 0, ef.up_supers, 0, nsup, ef.up_sel1,
                        0, len(ef.up_sel1), k + 1, 1)
    hi = np.int64(pos - k)
    lo = _packed_get(ef.low_words, ef.low_width, k) if ef.low_width > 0 \
        else np.uint64(0)
    return np.int64((np.uint64(hi) << np.uint64(ef.low_width)) | lo)


# ------------------------------------------------------------- wavelet tree

@njit(inline="always")
def _wt_has(wt, c):
    if len(wt.sym) == 1:
        return wt.sym[0] == c
    return wt.code_len[c] > 0


@njit
def wt_access(wt, i):
    node = 0
    while wt.sym[node] < 0:
        slot = wt.bvslot[node]
        wb = np.int64(wt.word_off[slot])
        sb = np.int64(wt.sup_off[slot])
        if _getbit(wt.words, wb, i):
            i = _rank1_local(wt.words, wb, wt.supers, sb, i)
            node = wt.right[node]
        else:
            i = i - _rank1_local(wt.words, wb, wt.supers, sb, i)
            node = wt.left[node]
    return wt.sym[node]


@njit
def wt_rank(wt, c, i):
    """Occurrences of c in the encoded string's prefix [0, i)."""
    if not _wt_has(wt, c):
        return np.int64(0)
    node = 0
    length = np.int64(wt.code_len[c])
    code = wt.code_bits[c]
    d = np.int64(0)
    while wt.sym[node] < 0:
        slot = wt.bvslot[node]
        wb = np.int64(wt.word_off[slot])
        sb = np.int64(wt.sup_off[slot])
        r1 = _rank1_local(wt.words, wb, wt.supers, sb, i)
        bit = np.int64((code >> np.uint64(length - 1 - d)) & np.uint64(1))
        if bit:
            i = r1
            node = wt.right[node]
        else:
            i = i - r1
            node = wt.left[node]
        d += 1
    return i


@njit
def wt_rank2(wt, c, i, j):
    """wt_rank at two positions sharing one descent (i <= j)."""
    if not _wt_has(wt, c):
        return np.int64(0), np.int64(0)
    node = 0
    length = np.int64(wt.code_len[c])
    code = wt.code_bits[c]
    d = np.int64(0)
    while wt.sym[node] < 0:
        slot = wt.bvslot[node]
        wb = np.int64(wt.word_off[slot])
        sb = np.int64(wt.sup_off[slot])
        ri = _rank1_local(wt.words, wb, wt.supers, sb, i)
        rj = _rank1_local(wt.words, wb, wt.supers, sb, j)
        bit = np.int64((code >> np.uint64(length - 1 - d)) & np.uint64(1))
        if bit:
            i = ri
            j = rj
            node = wt.right[node]
        else:
            i = i - ri
            j = j - rj
            node = wt.left[node]
        d += 1
    return i, j


@njit
def wt_access_lf(wt, ctable, i):
    """Fused access + LF: returns (symbol at i, C[symbol] + rank(symbol, i))."""
    node = 0
    while wt.sym[node] < 0:
        slot = wt.bvslot[node]
        wb = np.int64(wt.word_off[slot])
        sb = np.int64(wt.sup_off[slot])
        r1 = _rank1_local(wt.words, wb, wt.supers, sb, i)
        if _getbit(wt.words, wb, i):
            i = r1
            node = wt.right[node]
        else:
            i = i - r1
            node = wt.left[node]
    sym = wt.sym[node]
    return sym, np.int64(ctable[sym]) + i


@njit
def wt_select(wt, c, k):
    """Position of the k-th (1-based) occurrence of c."""
    node = 0
    length = np.int64(wt.code_len[c])
    code = wt.code_bits[c]
    path = np.empty(64, dtype=np.int64)
    d = np.int64(0)
    while wt.sym[node] < 0:
        path[d] = node
        bit = np.int64((code >> np.uint64(length - 1 - d)) & np.uint64(1))
        node = wt.right[node] if bit else wt.left[node]
        d += 1
    pos = np.int64(k)
    while d > 0:
        d -= 1
        parent = path[d]
        slot = wt.bvslot[parent]
        wb = np.int64(wt.word_off[slot])
        sb = np.int64(wt.sup_off[slot])
        nsup = np.int64(wt.sup_off[slot + 1]) - sb
        bit = np.int64((code >> np.uint64(length - 1 - d)) & np.uint64(1))
        if bit:
            s1b = np.int64(wt.sel1_off[slot])
            ns = np.int64(wt.sel1_off[slot + 1]) - s1b
            pos = _select_local(wt.words, wb, wt.supers, sb, nsup,
                                wt.sel1, s1b, ns, pos, 1) + 1
        else:
            s0b = np.int64(wt.sel0_off[slot])
            ns = np.int64(wt.sel0_off[slot + 1]) - s0b
            pos = _select_local(wt.words, wb, wt.supers, sb, nsup,
                                wt.sel0, s0b, ns, pos, 0) + 1
    return pos - 1


# ----------------------------------------------------------------- FM index

@njit
def fm_find(wt, ctable, n, q):
    """Backward search: half-open SA-rank range of suffixes prefixed by q."""
    lo = np.int64(0)
    hi = np.int64(n)
    for t in range(len(q) - 1, -1, -1):
        c = q[t]
        if not _wt_has(wt, c):
            return np.int64(0), np.int64(0)
        base = np.int64(ctable[c])
        rlo, rhi = wt_rank2(wt, c, lo, hi)
        lo = base + rlo
        hi = base + rhi
        if lo >= hi:
            return np.int64(0), np.int64(0)
    return lo, hi


@njit
def fm_locate(fm, i):
    """SA[i] via LF walk to the nearest marked rank (at most a-1 steps)."""
    steps = np.int64(0)
    j = np.int64(i)
    while True:
        idx = ef_index(fm.marks, j)
        if idx >= 0:
            base = np.int64(_packed_get(fm.vals_words, fm.vals_width, idx))
            return (base * fm.a + steps) % fm.n
        sym, j = wt_access_lf(fm.wt, fm.ctable, j)
        steps += 1


@njit
def fm_locate_many(fm, ranks, out):
    for t in range(len(ranks)):
        out[t] = fm_locate(fm, ranks[t])


@njit
def fm_extract(fm, start, length, out):
    """Fill out with blob[start .. start+length)."""
    if length == 0:
        return
    e = start + length
    b = fm.b
    if e == fm.n:
        r = np.int64(_packed_get(fm.sisa_words, fm.sisa_width, 0))
        skip = np.int64(0)
    else:
        p = ((e + b - 1) // b) * b
        if p >= fm.n - 1:
            p = fm.n - 1
            r = np.int64(_packed_get(fm.sisa_words, fm.sisa_width,
                                     fm.sisa_count - 1))
        else:
            r = np.int64(_packed_get(fm.sisa_words, fm.sisa_width, p // b))
        skip = p - e
    total = skip + length
    for t in range(total):
        sym, r = wt_access_lf(fm.wt, fm.ctable, r)
        if t >= skip:
            out[total - 1 - t] = sym
