"""Bit-string plumbing.

Certificates, verification messages and random strings all travel as plain
'0'/'1' strings so budget accounting can count bits exactly.  Encodings are
fixed-width big-endian; a width of zero encodes only the value 0 as the
empty string.
"""

from __future__ import annotations

from typing import Iterator, Sequence


def width_for(top: int) -> int:
    """Bits needed for any value in [0, top]."""
    if top < 0:
        raise ValueError("width_for: negative range")
    return top.bit_length()


def encode(value: int, width: int) -> str:
    if width == 0:
        if value != 0:
            raise ValueError("zero-width field can only hold 0")
        return ""
    if not 0 <= value < (1 << width):
        raise ValueError(f"value {value} does not fit in {width} bits")
    return format(value, f"0{width}b")


def decode(bits: str) -> int:
    return int(bits, 2) if bits else 0


def split_fields(bits: str, widths: Sequence[int]) -> list[str]:
    """Cut a string into consecutive fixed-width fields; remainder is an error."""
    out, pos = [], 0
    for w in widths:
        out.append(bits[pos : pos + w])
        pos += w
    if pos != len(bits):
        raise ValueError(f"expected {pos} bits, got {len(bits)}")
    return out


def take_fields(bits: str, widths: Sequence[int]) -> tuple[list[str], str]:
    """Like split_fields but returns the unparsed tail instead of rejecting it."""
    out, pos = [], 0
    for w in widths:
        if pos + w > len(bits):
            raise ValueError("bit string too short")
        out.append(bits[pos : pos + w])
        pos += w
    return out, bits[pos:]


def chunks(bits: str, width: int) -> list[str]:
    if width == 0:
        if bits:
            raise ValueError("cannot chunk nonempty string into zero-width pieces")
        return []
    if len(bits) % width:
        raise ValueError("string length not a multiple of chunk width")
    return [bits[i : i + width] for i in range(0, len(bits), width)]


def is_bits(s: str) -> bool:
    return isinstance(s, str) and not set(s) - {"0", "1"}


def iter_strings(width: int) -> Iterator[str]:
    """All bit strings of a given width, in numeric order."""
    for v in range(1 << width):
        yield encode(v, width)
