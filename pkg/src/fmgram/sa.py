"""Suffix array construction (SA-IS, linear time) and BWT derivation.

The blob's trailing 0x00 sentinel is the unique smallest byte, so the
classic induced-sorting recursion applies directly. Entries are int32;
shards are capped well below 2^31 bytes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import LengthMismatch

MAX_SHARD_BYTES = (1 << 31) - 2


@njit(cache=True, nogil=True)
def _sais(s, K):
    """Suffix array of s, an int32 array ending in a unique smallest
    sentinel, over alphabet [0, K)."""
    n = s.shape[0]
    sa = np.full(n, -1, np.int32)
    if n == 1:
        sa[0] = 0
        return sa
    # suffix types: is_s[i] iff suffix i is S-type (sorts after shorter run)
    is_s = np.zeros(n, np.bool_)
    is_s[n - 1] = True
    for i in range(n - 2, -1, -1):
        if s[i] < s[i + 1] or (s[i] == s[i + 1] and is_s[i + 1]):
            is_s[i] = True
    counts = np.zeros(K, np.int64)
    for i in range(n):
        counts[s[i]] += 1
    heads = np.zeros(K, np.int64)
    tails = np.zeros(K, np.int64)
    acc = 0
    for c in range(K):
        heads[c] = acc
        acc += counts[c]
        tails[c] = acc - 1
    # pass 1: drop LMS suffixes at bucket tails, then induce L and S
    t = tails.copy()
    n_lms = 0
    for i in range(1, n):
        if is_s[i] and not is_s[i - 1]:
            c = s[i]
            sa[t[c]] = i
            t[c] -= 1
            n_lms += 1
    h = heads.copy()
    for i in range(n):
        j = sa[i] - 1
        if j >= 0 and not is_s[j]:
            c = s[j]
            sa[h[c]] = j
            h[c] += 1
    t = tails.copy()
    for i in range(n - 1, -1, -1):
        j = sa[i] - 1
        if j >= 0 and is_s[j]:
            c = s[j]
            sa[t[c]] = j
            t[c] -= 1
    # name sorted LMS substrings
    lms_order = np.empty(n_lms, np.int32)
    k = 0
    for i in range(n):
        j = sa[i]
        if j > 0 and is_s[j] and not is_s[j - 1]:
            lms_order[k] = j
            k += 1
    names = np.full(n, -1, np.int32)
    cur = 0
    names[lms_order[0]] = 0
    prev = np.int64(lms_order[0])
    for idx in range(1, n_lms):
        pos = np.int64(lms_order[idx])
        same = True
        off = np.int64(0)
        while True:
            a_end = off > 0 and is_s[prev + off] and not is_s[prev + off - 1]
            b_end = off > 0 and is_s[pos + off] and not is_s[pos + off - 1]
            if a_end and b_end:
                break
            if a_end != b_end or s[prev + off] != s[pos + off]:
                same = False
                break
            off += 1
            if prev + off >= n or pos + off >= n:
                same = prev + off >= n and pos + off >= n
                break
        if not same:
            cur += 1
        names[pos] = cur
        prev = pos
    # reduced problem over LMS substring names, in text order
    red = np.empty(n_lms, np.int32)
    lms_pos = np.empty(n_lms, np.int32)
    k = 0
    for i in range(1, n):
        if is_s[i] and not is_s[i - 1]:
            lms_pos[k] = i
            red[k] = names[i]
            k += 1
    if cur + 1 == n_lms:
        red_sa = np.empty(n_lms, np.int32)
        for i in range(n_lms):
            red_sa[red[i]] = i
    else:
        red_sa = _sais(red, cur + 1)
    # pass 2: drop LMS suffixes in their true order, induce again
    sa[:] = -1
    t = tails.copy()
    for idx in range(n_lms - 1, -1, -1):
        j = lms_pos[red_sa[idx]]
        c = s[j]
        sa[t[c]] = j
        t[c] -= 1
    h = heads.copy()
    for i in range(n):
        j = sa[i] - 1
        if j >= 0 and not is_s[j]:
            c = s[j]
            sa[h[c]] = j
            h[c] += 1
    t = tails.copy()
    for i in range(n - 1, -1, -1):
        j = sa[i] - 1
        if j >= 0 and is_s[j]:
            c = s[j]
            sa[t[c]] = j
            t[c] -= 1
    return sa


def build_suffix_array(data: bytes | np.ndarray) -> np.ndarray:
    """Suffix array (int32) of a blob ending in its unique 0x00 sentinel."""
    arr = np.frombuffer(data, dtype=np.uint8) if isinstance(data, (bytes, bytearray)) \
        else np.ascontiguousarray(data, dtype=np.uint8)
    n = len(arr)
    if n == 0:
        raise ValueError("cannot build a suffix array of an empty blob")
    if n > MAX_SHARD_BYTES:
        raise MemoryError(
            f"shard of {n} bytes exceeds the {MAX_SHARD_BYTES}-byte cap; "
            f"rebuild with a smaller --shard-bytes")
    if arr[-1] != 0 or int((arr == 0).sum()) != 1:
        raise ValueError("blob must end in a unique 0x00 sentinel")
    return _sais(arr.astype(np.int32), 256)


def derive_bwt(data: bytes | np.ndarray, sa: np.ndarray) -> np.ndarray:
    """BWT of the blob: L[i] = data[SA[i] - 1], wrapping at position 0."""
    arr = np.frombuffer(data, dtype=np.uint8) if isinstance(data, (bytes, bytearray)) \
        else np.ascontiguousarray(data, dtype=np.uint8)
    if len(sa) != len(arr):
        raise LengthMismatch(f"suffix array length {len(sa)} != blob length {len(arr)}")
    n = len(arr)
    prev = (sa.astype(np.int64) + (n - 1)) % n
    return arr[prev]
