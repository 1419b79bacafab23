"""Per-cell Monte Carlo kernels.

Both kernels take the same pre-drawn random byte stream and must return
identical hit counts. Bytes map to alphanumeric characters by rejection
(see :mod:`merkleprob.rng`); strings are consecutive runs of accepted
characters. ``reference_kernel`` is plain hashlib; the compiled kernel
calls libcrypto's SHA-256 from a numba loop and is several times faster.

Stream layout per trial: reference data, ``k`` sibling strings, then trial
data (a string equal to the reference data is skipped and the next one
used). Each kernel returns the number of bytes consumed, or -1 when the
stream ran out before all repeats finished.
"""
from __future__ import annotations

import ctypes
import ctypes.util
import hashlib
import logging

import numpy as np

from .rng import ACCEPT_BELOW, ALPHABET, accepted_chars

log = logging.getLogger(__name__)

HEX_DIGITS = b"0123456789abcdef"


def _top32(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest()[:4], "big")


def reference_kernel(raw: np.ndarray, m: int, k: int, trials: int, repeats: int,
                     length: int, hits: np.ndarray) -> int:
    buf = accepted_chars(raw).tobytes()
    n = len(buf)
    shift = 32 - m
    fmt = "0%dx" % (m // 4)
    pos = 0
    ref_states = [0] * (k + 1)
    for r in range(repeats):
        count = 0
        for _ in range(trials):
            if pos + (k + 1) * length > n:
                return -1
            ref = buf[pos:pos + length]
            pos += length
            ref_states[0] = _top32(ref) >> shift
            sibs = []
            for _j in range(k):
                sibs.append(format(_top32(buf[pos:pos + length]) >> shift, fmt))
                pos += length
            for j in range(k):
                msg = (format(ref_states[j], fmt) + sibs[j]).encode("ascii")
                ref_states[j + 1] = _top32(msg) >> shift
            while True:
                if pos + length > n:
                    return -1
                data = buf[pos:pos + length]
                pos += length
                if data != ref:
                    break
            state = _top32(data) >> shift
            if state == ref_states[0]:
                count += 1
                continue
            for j in range(k):
                state = _top32((format(state, fmt) + sibs[j]).encode("ascii")) >> shift
                if state == ref_states[j + 1]:
                    count += 1
                    break
        hits[r] = count
    return pos


def _load_sha256_functions():
    names = [ctypes.util.find_library("crypto"), "libcrypto.so.3", "libcrypto.so"]
    for name in filter(None, names):
        try:
            lib = ctypes.CDLL(name)
            init, update, final = lib.SHA256_Init, lib.SHA256_Update, lib.SHA256_Final
        except (OSError, AttributeError):
            continue
        vp = ctypes.c_void_p
        init.argtypes, init.restype = [vp], ctypes.c_int
        update.argtypes, update.restype = [vp, vp, ctypes.c_size_t], ctypes.c_int
        final.argtypes, final.restype = [vp, vp], ctypes.c_int
        return init, update, final
    return None


def _build_fast_kernel():
    try:
        import numba
    except ImportError:
        log.info("numba not installed; compiled kernel unavailable")
        return None
    funcs = _load_sha256_functions()
    if funcs is None:
        log.info("libcrypto SHA-256 not found; compiled kernel unavailable")
        return None
    sha_init, sha_update, sha_final = funcs
    hex_digits = np.frombuffer(HEX_DIGITS, dtype=np.uint8).copy()

    @numba.njit(inline="always")
    def top32(ptr, n, ctx, md):
        sha_init(ctx.ctypes.data)
        sha_update(ctx.ctypes.data, ptr, n)
        sha_final(md.ctypes.data, ctx.ctypes.data)
        return ((np.int64(md[0]) << 24) | (np.int64(md[1]) << 16)
                | (np.int64(md[2]) << 8) | np.int64(md[3]))

    @numba.njit(inline="always")
    def step(state, sib, c, msg, ctx, md, shift):
        for i in range(c):
            msg[c - 1 - i] = hex_digits[(state >> (4 * i)) & 15]
            msg[2 * c - 1 - i] = hex_digits[(sib >> (4 * i)) & 15]
        return top32(msg.ctypes.data, 2 * c, ctx, md) >> shift

    alphabet = np.frombuffer(ALPHABET, dtype=np.uint8).copy()

    @numba.njit(inline="always")
    def read_string(raw, pos, out, length):
        """Fill ``out`` with the next string; returns the new position or -1."""
        n = raw.shape[0]
        i = 0
        while i < length:
            if pos >= n:
                return -1
            b = raw[pos]
            pos += 1
            if b < ACCEPT_BELOW:
                out[i] = alphabet[b % 62]
                i += 1
        return pos

    @numba.njit
    def kernel(raw, m, k, trials, repeats, length, hits):
        ctx = np.zeros(256, dtype=np.uint8)
        md = np.zeros(32, dtype=np.uint8)
        c = m // 4
        msg = np.zeros(2 * c, dtype=np.uint8)
        ref = np.zeros(length, dtype=np.uint8)
        cur = np.zeros(length, dtype=np.uint8)
        ref_states = np.zeros(k + 1, dtype=np.int64)
        sibs = np.zeros(max(k, 1), dtype=np.int64)
        shift = 32 - m
        pos = 0
        for r in range(repeats):
            count = 0
            for _t in range(trials):
                pos = read_string(raw, pos, ref, length)
                if pos < 0:
                    return -1
                ref_states[0] = top32(ref.ctypes.data, length, ctx, md) >> shift
                for j in range(k):
                    pos = read_string(raw, pos, cur, length)
                    if pos < 0:
                        return -1
                    sibs[j] = top32(cur.ctypes.data, length, ctx, md) >> shift
                for j in range(k):
                    ref_states[j + 1] = step(ref_states[j], sibs[j], c, msg, ctx, md, shift)
                while True:
                    pos = read_string(raw, pos, cur, length)
                    if pos < 0:
                        return -1
                    same = True
                    for i in range(length):
                        if cur[i] != ref[i]:
                            same = False
                            break
                    if not same:
                        break
                state = top32(cur.ctypes.data, length, ctx, md) >> shift
                if state == ref_states[0]:
                    count += 1
                    continue
                for j in range(k):
                    state = step(state, sibs[j], c, msg, ctx, md, shift)
                    if state == ref_states[j + 1]:
                        count += 1
                        break
            hits[r] = count
        return pos

    return kernel


_FAST = None
_FAST_LOADED = False


def fast_kernel():
    """The compiled kernel, or None when numba or libcrypto is missing."""
    global _FAST, _FAST_LOADED
    if not _FAST_LOADED:
        _FAST = _build_fast_kernel()
        _FAST_LOADED = True
    return _FAST
