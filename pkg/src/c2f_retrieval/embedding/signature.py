"""Bit-packed binary signatures and Hamming distances."""

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np


class EmbeddingError(ValueError):
    """Raised for Hamming-embedding misuse (d_b > D, width mismatch)."""


# popcount of every byte value
POPCOUNT_TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def packed_width(d_b: int) -> int:
    """Bytes needed for a d_b-bit signature."""
    return (int(d_b) + 7) // 8


@dataclass(frozen=True)
class BinarySignature:
    """
    A ``width``-bit signature; bit 0 is the most significant bit of ``bits``.

    Packed form is MSB-first over ``ceil(width / 8)`` bytes with zero
    padding in the trailing bits.
    """

    bits: int
    width: int = 128

    def __post_init__(self):
        if self.width < 1:
            raise EmbeddingError(f"signature width must be >= 1, got {self.width}")
        if not 0 <= self.bits < (1 << self.width):
            raise EmbeddingError(
                f"value {self.bits:#x} does not fit in {self.width} bits"
            )

    @classmethod
    def from_bools(cls, flags: Iterable[bool]) -> "BinarySignature":
        flags = [bool(f) for f in flags]
        value = 0
        for flag in flags:
            value = (value << 1) | int(flag)
        return cls(bits=value, width=len(flags))

    @classmethod
    def from_packed(cls, packed: Union[bytes, np.ndarray], width: int) -> "BinarySignature":
        if isinstance(packed, bytes):
            payload = packed
        else:
            payload = np.asarray(packed, dtype=np.uint8).tobytes()
        nbytes = packed_width(width)
        if len(payload) != nbytes:
            raise EmbeddingError(
                f"{len(payload)} packed bytes for a {width}-bit signature, expected {nbytes}"
            )
        return cls(bits=int.from_bytes(payload, "big") >> (8 * nbytes - width), width=width)

    def packed(self) -> bytes:
        nbytes = packed_width(self.width)
        return (self.bits << (8 * nbytes - self.width)).to_bytes(nbytes, "big")

    def bit(self, i: int) -> int:
        if not 0 <= i < self.width:
            raise IndexError(i)
        return (self.bits >> (self.width - 1 - i)) & 1

    def complement(self) -> "BinarySignature":
        return BinarySignature(bits=self.bits ^ ((1 << self.width) - 1), width=self.width)

    def flip(self, positions: Iterable[int]) -> "BinarySignature":
        value = self.bits
        for i in set(positions):
            if not 0 <= i < self.width:
                raise IndexError(i)
            value ^= 1 << (self.width - 1 - i)
        return BinarySignature(bits=value, width=self.width)


def hamming(a: BinarySignature, b: BinarySignature) -> int:
    """Number of differing bits; in [0, width]."""
    if a.width != b.width:
        raise EmbeddingError(f"signature width mismatch: {a.width} vs {b.width}")
    return (a.bits ^ b.bits).bit_count()


def hamming_packed(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Broadcast Hamming distance between packed uint8 signatures (last axis = bytes)."""
    return POPCOUNT_TABLE[np.bitwise_xor(a, b)].sum(axis=-1, dtype=np.int64)
