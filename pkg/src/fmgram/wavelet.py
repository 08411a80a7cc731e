"""Huffman-shaped wavelet tree over a byte string.

The tree's shape follows a canonical Huffman code built from symbol
frequencies: frequent symbols sit near the root, so access/rank/select
cost O(code length) rank operations and total payload is the Huffman-
compressed size of the string. Ties in the code construction break by
symbol order, making identical inputs produce bit-identical trees.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from . import _kernels as K
from .bitvec import build_rank_directory, words_from_bits
from .errors import NotEnoughOccurrences, OutOfBounds


def zeroth_order_entropy(freqs: np.ndarray) -> float:
    """Bits per symbol of the empirical distribution."""
    total = int(freqs.sum())
    if total == 0:
        return 0.0
    p = freqs[freqs > 0] / total
    return float(-(p * np.log2(p)).sum())


def huffman_lengths(freqs: np.ndarray) -> np.ndarray:
    """Canonical-ready code lengths (u8[256]; 0 marks an absent symbol).

    A single present symbol gets length 0: its code is empty and the
    tree degenerates to one leaf storing no bits.
    """
    lengths = np.zeros(256, dtype=np.uint8)
    present = np.flatnonzero(freqs)
    if len(present) == 0:
        raise ValueError("cannot build a code for an empty string")
    if len(present) == 1:
        return lengths
    # heap entries: (frequency, tiebreak, node id); leaves first by symbol
    heap: list[tuple[int, int, int]] = []
    children: dict[int, tuple[int, int]] = {}
    for s in present:
        heapq.heappush(heap, (int(freqs[s]), int(s), int(s)))
    next_id = 256
    while len(heap) > 1:
        f1, _, n1 = heapq.heappop(heap)
        f2, _, n2 = heapq.heappop(heap)
        children[next_id] = (n1, n2)
        heapq.heappush(heap, (f1 + f2, next_id, next_id))
        next_id += 1
    root = heap[0][2]
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        if node < 256:
            lengths[node] = depth
        else:
            a, b = children[node]
            stack.append((a, depth + 1))
            stack.append((b, depth + 1))
    return lengths


def canonical_codes(lengths: np.ndarray) -> np.ndarray:
    """Assign canonical codewords: shorter codes first, ties by symbol."""
    codes = np.zeros(256, dtype=np.uint64)
    present = [s for s in range(256) if lengths[s] > 0]
    if not present:
        return codes
    order = sorted(present, key=lambda s: (int(lengths[s]), s))
    kraft = sum(2.0 ** -int(lengths[s]) for s in order)
    if abs(kraft - 1.0) > 1e-9:
        raise ValueError(f"code lengths violate Kraft equality: {kraft}")
    code = 0
    last_len = int(lengths[order[0]])
    for s in order:
        code <<= int(lengths[s]) - last_len
        codes[s] = code
        code += 1
        last_len = int(lengths[s])
    return codes


def _preorder(left, right, sym):
    """Preorder node list of the insertion-order tree."""
    out = []
    stack = [0]
    while stack:
        node = stack.pop()
        out.append(node)
        if sym[node] < 0:
            stack.append(right[node])
            stack.append(left[node])
    return out


class WaveletTree:
    """Immutable wavelet tree; queries run through numba kernels."""

    def __init__(self, n, left, right, sym, bvslot, code_len, code_bits,
                 word_off, bit_len, sup_off, sel1_off, sel0_off,
                 words, supers, sel1, sel0):
        self.n = n
        self.left = left
        self.right = right
        self.sym = sym
        self.bvslot = bvslot
        self.code_len = code_len
        self.code_bits = code_bits
        self.word_off = word_off
        self.bit_len = bit_len
        self.sup_off = sup_off
        self.sel1_off = sel1_off
        self.sel0_off = sel0_off
        self.words = words
        self.supers = supers
        self.sel1 = sel1
        self.sel0 = sel0

    @classmethod
    def build(cls, s: bytes | np.ndarray) -> "WaveletTree":
        arr = np.frombuffer(s, dtype=np.uint8) if isinstance(s, (bytes, bytearray)) \
            else np.ascontiguousarray(s, dtype=np.uint8)
        n = len(arr)
        if n == 0:
            raise ValueError("cannot build a wavelet tree over an empty string")
        freqs = np.bincount(arr, minlength=256).astype(np.int64)
        code_len = huffman_lengths(freqs)
        code_bits = canonical_codes(code_len)

        # shape nodes, inserted in canonical order, then renumbered preorder
        left: list[int] = [-1]
        right: list[int] = [-1]
        sym: list[int] = [-1]
        present = [s0 for s0 in range(256) if code_len[s0] > 0]
        if not present:
            sym[0] = int(np.flatnonzero(freqs)[0])
        else:
            for s0 in sorted(present, key=lambda t: (int(code_len[t]), t)):
                node = 0
                length = int(code_len[s0])
                code = int(code_bits[s0])
                for d in range(length):
                    bit = (code >> (length - 1 - d)) & 1
                    child = right[node] if bit else left[node]
                    if child == -1:
                        left.append(-1)
                        right.append(-1)
                        sym.append(-1)
                        child = len(sym) - 1
                        if bit:
                            right[node] = child
                        else:
                            left[node] = child
                    node = child
                sym[node] = s0
        order = _preorder(left, right, sym)
        remap = {old: new for new, old in enumerate(order)}
        n_nodes = len(order)
        p_left = np.full(n_nodes, -1, dtype=np.int32)
        p_right = np.full(n_nodes, -1, dtype=np.int32)
        p_sym = np.full(n_nodes, -1, dtype=np.int32)
        p_slot = np.full(n_nodes, -1, dtype=np.int32)
        slots = 0
        for old in order:
            new = remap[old]
            if sym[old] >= 0:
                p_sym[new] = sym[old]
            else:
                p_left[new] = remap[left[old]]
                p_right[new] = remap[right[old]]
                p_slot[new] = slots
                slots += 1

        # per-depth routing LUTs: bit d of each present symbol's code
        max_len = int(code_len.max())
        luts = np.zeros((max(max_len, 1), 256), dtype=np.uint8)
        for s0 in present:
            length = int(code_len[s0])
            code = int(code_bits[s0])
            for d in range(length):
                luts[d, s0] = (code >> (length - 1 - d)) & 1

        node_words: list[np.ndarray] = [None] * slots
        node_bits: list[int] = [0] * slots
        node_supers: list[np.ndarray] = [None] * slots
        node_sel1: list[np.ndarray] = [None] * slots
        node_sel0: list[np.ndarray] = [None] * slots
        stack = [(0, 0, arr)]
        while stack:
            node, depth, seq = stack.pop()
            if p_sym[node] >= 0:
                continue
            bits = luts[depth][seq]
            slot = int(p_slot[node])
            w = words_from_bits(bits)
            supers, s1, s0_, _ = build_rank_directory(w, len(bits))
            node_words[slot] = w
            node_bits[slot] = len(bits)
            node_supers[slot] = supers
            node_sel1[slot] = s1
            node_sel0[slot] = s0_
            mask = bits.astype(bool)
            stack.append((int(p_right[node]), depth + 1, seq[mask]))
            stack.append((int(p_left[node]), depth + 1, seq[~mask]))

        def offsets(parts):
            off = np.zeros(len(parts) + 1, dtype=np.uint64)
            for i, p in enumerate(parts):
                off[i + 1] = off[i] + len(p)
            return off

        word_off = offsets(node_words)
        sup_off = offsets(node_supers)
        sel1_off = offsets(node_sel1)
        sel0_off = offsets(node_sel0)
        cat = lambda parts: (np.concatenate(parts) if parts
                             else np.zeros(0, dtype=np.uint64))
        tree = cls(n, p_left, p_right, p_sym, p_slot, code_len, code_bits,
                   word_off, np.array(node_bits, dtype=np.uint64), sup_off,
                   sel1_off, sel0_off, cat(node_words), cat(node_supers),
                   cat(node_sel1), cat(node_sel0))
        # Huffman optimality certificate: payload can never exceed n*(H0+1)
        h0 = zeroth_order_entropy(freqs)
        if tree.payload_bits > n * (h0 + 1.0) + 64:
            raise AssertionError(
                f"wavelet payload {tree.payload_bits} bits exceeds the "
                f"Huffman bound for H0={h0:.3f}, n={n}")
        return tree

    @property
    def view(self) -> K.WtView:
        return K.WtView(self.n, self.left, self.right, self.sym, self.bvslot,
                        self.code_len, self.code_bits, self.word_off,
                        self.bit_len, self.sup_off, self.sel1_off,
                        self.sel0_off, self.words, self.supers, self.sel1,
                        self.sel0)

    @property
    def payload_bits(self) -> int:
        """Bits stored in node bitvectors, rank directories excluded."""
        return int(self.bit_len.sum())

    @property
    def stored_bits(self) -> int:
        """Total bits including rank directories and select samples."""
        return 64 * (len(self.words) + len(self.supers) + len(self.sel1)
                     + len(self.sel0))

    def within_entropy_bound(self, s: bytes | np.ndarray) -> bool:
        """Check stored bits against n*H0 + 2*256*log2(n) + 0.2n."""
        arr = np.frombuffer(s, dtype=np.uint8) if isinstance(s, (bytes, bytearray)) \
            else np.ascontiguousarray(s, dtype=np.uint8)
        freqs = np.bincount(arr, minlength=256).astype(np.int64)
        h0 = zeroth_order_entropy(freqs)
        bound = self.n * h0 + 512 * math.log2(max(self.n, 2)) + 0.2 * self.n
        return self.stored_bits <= bound

    def access(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise OutOfBounds(f"position {i} of {self.n}")
        return int(K.wt_access(self.view, i))

    def rank(self, c: int, i: int) -> int:
        """Occurrences of byte c in the prefix [0, i) (exclusive)."""
        if not 0 <= i <= self.n:
            raise OutOfBounds(f"rank position {i} of {self.n}")
        return int(K.wt_rank(self.view, c, i))

    def count(self, c: int) -> int:
        return self.rank(c, self.n)

    def select(self, c: int, k: int) -> int:
        """Position of the k-th (1-based) occurrence of byte c."""
        total = self.count(c)
        if not 1 <= k <= total:
            raise NotEnoughOccurrences(f"select({c}, {k}) of {total}")
        if len(self.sym) == 1:
            return k - 1
        return int(K.wt_select(self.view, c, k))

    def to_arrays(self) -> list[np.ndarray]:
        """Serialization order shared with the index store."""
        header = np.array([self.n, len(self.sym),
                           int(self.bvslot.max()) + 1 if len(self.sym) > 1 else 0],
                          dtype=np.uint64)
        return [header, self.left, self.right, self.sym, self.bvslot,
                self.code_len, self.code_bits, self.word_off, self.bit_len,
                self.sup_off, self.sel1_off, self.sel0_off, self.words,
                self.supers, self.sel1, self.sel0]

    @classmethod
    def from_arrays(cls, arrays: list[np.ndarray]) -> "WaveletTree":
        (header, left, right, sym, bvslot, code_len, code_bits, word_off,
         bit_len, sup_off, sel1_off, sel0_off, words, supers, sel1,
         sel0) = arrays
        return cls(int(header[0]), left, right, sym, bvslot, code_len,
                   code_bits, word_off, bit_len, sup_off, sel1_off, sel0_off,
                   words, supers, sel1, sel0)
