"""Truncated cryptographic hashing.

A :class:`Digest` keeps the leading ``m`` bits of a 256-bit SHA-256 or
Keccak-256 digest. Its canonical text form is lowercase hex of
``ceil(m / 4)`` characters, with unused trailing bits zeroed.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import Union

from Crypto.Hash import keccak

from .errors import ConfigError, FormatError

MAX_BITS = 256

Data = Union[bytes, bytearray, memoryview, str]


class HashAlgorithm(str, enum.Enum):
    SHA256 = "sha256"
    KECCAK256 = "keccak256"


@dataclass(frozen=True)
class HashConfig:
    algorithm: HashAlgorithm = HashAlgorithm.SHA256
    m: int = 256

    def __post_init__(self) -> None:
        try:
            algo = HashAlgorithm(self.algorithm)
        except ValueError:
            raise ConfigError(f"unknown hash algorithm: {self.algorithm!r}") from None
        object.__setattr__(self, "algorithm", algo)
        if isinstance(self.m, bool) or not isinstance(self.m, int):
            raise ConfigError(f"m must be an integer, got {self.m!r}")
        if not 1 <= self.m <= MAX_BITS:
            raise ConfigError(f"m must be in [1, {MAX_BITS}], got {self.m}")

    @property
    def hex_chars(self) -> int:
        return hex_width(self.m)

    def require_hex_aligned(self) -> None:
        """Experiments only accept m that is a whole number of hex characters."""
        if self.m % 4:
            raise ConfigError(f"m must be a multiple of 4 for experiments, got {self.m}")


def hex_width(m: int) -> int:
    return (m + 3) // 4


@dataclass(frozen=True)
class Digest:
    """An ``m``-bit truncated digest stored as a non-negative integer."""

    bits: int
    m: int

    def __post_init__(self) -> None:
        if not 1 <= self.m <= MAX_BITS:
            raise ConfigError(f"m must be in [1, {MAX_BITS}], got {self.m}")
        if not 0 <= self.bits < (1 << self.m):
            raise ConfigError(f"value does not fit in {self.m} bits")

    def hex(self) -> str:
        width = hex_width(self.m)
        return format(self.bits << (4 * width - self.m), f"0{width}x")

    @classmethod
    def from_hex(cls, text: str, m: int) -> Digest:
        width = hex_width(m)
        if len(text) != width or text != text.lower():
            raise FormatError(f"expected {width} lowercase hex characters for m={m}, got {text!r}")
        try:
            raw = int(text, 16)
        except ValueError:
            raise FormatError(f"not a hex string: {text!r}") from None
        pad = 4 * width - m
        if raw & ((1 << pad) - 1):
            raise FormatError(f"unused low-order bits of {text!r} must be zero")
        return cls(raw >> pad, m)

    def __str__(self) -> str:
        return self.hex()


def _as_bytes(data: Data) -> bytes:
    if isinstance(data, str):
        return data.encode("utf-8")
    return bytes(data)


def full_digest(data: Data, algorithm: HashAlgorithm = HashAlgorithm.SHA256) -> bytes:
    raw = _as_bytes(data)
    if algorithm is HashAlgorithm.SHA256:
        return hashlib.sha256(raw).digest()
    k = keccak.new(digest_bits=256)
    k.update(raw)
    return k.digest()


def truncated_hash(data: Data, config: HashConfig = HashConfig()) -> Digest:
    """Hash ``data`` and keep the ``config.m`` most-significant bits.

    ``str`` input is hashed as its UTF-8 encoding.
    """
    full = int.from_bytes(full_digest(data, config.algorithm), "big")
    return Digest(full >> (MAX_BITS - config.m), config.m)
