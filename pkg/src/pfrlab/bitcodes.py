"""Bit-exact integer codes.

Two codes for positive integers k:

* plain binary, NOT prefix-free: binary representation of k without the
  leading 1, so |code| = floor(log2 k).  The length travels out of band.
      1 -> ""      5 -> "01"      12 -> "100"
* Elias delta, prefix-free: gamma-code the bit-length of k, then the
  remaining bits of k.  |code| <= log2 k + 2 log2(log2 k + 1) + 1.
      1 -> "1"     2 -> "0100"    17 -> "001010001"

Bit order is MSB-first within every field.
"""

import math
from dataclasses import dataclass

from .errors import MalformedCodeword


@dataclass(frozen=True)
class BitString:
    """Immutable sequence of bits, stored as a '0'/'1' string."""

    bits: str = ""

    def __post_init__(self):
        if self.bits.strip("01"):
            raise ValueError("BitString accepts only '0' and '1' characters")

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i) -> int:
        return int(self.bits[i])

    def __add__(self, other: "BitString") -> "BitString":
        return BitString(self.bits + other.bits)

    def __iter__(self):
        return (int(c) for c in self.bits)

    def to_record(self) -> tuple:
        """(length_bits, hex payload) with the bits zero-padded to full bytes."""
        n = len(self.bits)
        if n == 0:
            return 0, ""
        padded = self.bits + "0" * (-n % 8)
        return n, int(padded, 2).to_bytes(len(padded) // 8, "big").hex()

    @classmethod
    def from_record(cls, length_bits: int, payload_hex: str) -> "BitString":
        if length_bits == 0:
            return cls("")
        raw = bytes.fromhex(payload_hex)
        allbits = bin(int.from_bytes(raw, "big"))[2:].zfill(8 * len(raw))
        return cls(allbits[:length_bits])


def encode_plain(k: int) -> BitString:
    """Binary representation of k >= 1 without the leading digit."""
    if k < 1:
        raise ValueError("encode_plain needs k >= 1")
    return BitString(bin(k)[3:])


def decode_plain(b: BitString) -> int:
    """Prepend the implicit leading 1 and read as binary; inverse of encode_plain."""
    return int("1" + b.bits, 2)


def encode_delta(k: int) -> BitString:
    """Elias delta code of k >= 1."""
    if k < 1:
        raise ValueError("encode_delta needs k >= 1")
    n = k.bit_length()
    gamma = "0" * (n.bit_length() - 1) + bin(n)[2:]
    return BitString(gamma + bin(k)[3:])


def decode_delta(b: BitString) -> tuple:
    """Decode one delta codeword from the front of b; returns (k, bits consumed)."""
    s = b.bits
    z = s.find("1")
    if z < 0:
        raise MalformedCodeword("ran out of bits scanning the gamma prefix")
    if len(s) < 2 * z + 1:
        raise MalformedCodeword("truncated gamma length field")
    n = int(s[z:2 * z + 1], 2)
    end = 2 * z + 1 + (n - 1)
    if len(s) < end:
        raise MalformedCodeword("truncated payload")
    k = int("1" + s[2 * z + 1:end], 2)
    return k, end


def plain_code_length(k: int) -> int:
    """|encode_plain(k)| without building the code: floor(log2 k)."""
    return k.bit_length() - 1


def delta_code_length(k: int) -> int:
    """|encode_delta(k)| without building the code."""
    n = k.bit_length()
    return n + 2 * n.bit_length() - 2


def delta_length_calculus(a: float) -> tuple:
    """The length calculus L(t) = t + 2 log2(t+1) + 1 and its inverse lower bound.

    Returns (L(a), max{a - 2 log2([a]_+ + 1) - 1, 0}); the second value
    lower-bounds L^{-1}(a) and is taken as 0 for a < 1.
    """
    if a < 0 or not math.isfinite(a):
        big_l = float("nan")
    else:
        big_l = a + 2.0 * math.log2(a + 1.0) + 1.0
    inv = max(a - 2.0 * math.log2(max(a, 0.0) + 1.0) - 1.0, 0.0)
    return big_l, inv
