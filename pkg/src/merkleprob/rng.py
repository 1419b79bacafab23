"""Seed derivation and random alphanumeric strings."""
from __future__ import annotations

import hashlib

import numpy as np

ALPHABET = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
ALPHABET_ARRAY = np.frombuffer(ALPHABET, dtype=np.uint8)

# Bytes >= 248 are rejected so that b % 62 is uniform.
ACCEPT_BELOW = 248
BLOCK_SIZE = 1 << 16


def derive_subseed(*parts: object) -> int:
    """64-bit seed from the leading bits of SHA-256 over ``a:b:c...``."""
    text = ":".join(str(p) for p in parts).encode("ascii")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def draw_block(rng: np.random.Generator) -> np.ndarray:
    return np.frombuffer(rng.bytes(BLOCK_SIZE), dtype=np.uint8)


def generate_random_data(length: int, rng: np.random.Generator) -> bytes:
    """Uniform string over ``[0-9A-Za-z]`` of ``length`` characters."""
    if length < 1:
        raise ValueError("length must be >= 1")
    out = bytearray()
    while len(out) < length:
        need = length - len(out)
        raw = np.frombuffer(rng.bytes(need + need // 16 + 8), dtype=np.uint8)
        raw = raw[raw < ACCEPT_BELOW][:need]
        out += ALPHABET_ARRAY[raw % 62].tobytes()
    return bytes(out)


def accepted_chars(block: np.ndarray) -> np.ndarray:
    """Map a raw byte block to the alphanumeric characters it yields."""
    return ALPHABET_ARRAY[block[block < ACCEPT_BELOW] % 62]


class AlnumStream:
    """Alphanumeric strings cut sequentially from fixed-size random byte blocks.

    Each block is filtered to accepted characters; strings are consecutive
    runs of ``length`` characters from that character stream. The Monte
    Carlo kernels consume exactly the same stream, so a kernel and a stream
    built from equal seeds see identical strings.
    """

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._chars = np.empty(0, dtype=np.uint8)
        self._pos = 0

    def _ensure(self, n: int) -> None:
        avail = len(self._chars) - self._pos
        if avail >= n:
            return
        parts = [self._chars[self._pos:]]
        while avail < n:
            fresh = accepted_chars(draw_block(self._rng))
            parts.append(fresh)
            avail += len(fresh)
        self._chars = np.concatenate(parts)
        self._pos = 0

    def take_many(self, count: int, length: int) -> np.ndarray:
        """``count`` strings as a ``(count, length)`` uint8 array."""
        n = count * length
        self._ensure(n)
        out = self._chars[self._pos:self._pos + n].reshape(count, length)
        self._pos += n
        return out

    def take(self, length: int) -> bytes:
        return self.take_many(1, length)[0].tobytes()
