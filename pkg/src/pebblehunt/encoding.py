"""Self-delimiting bit strings written as pebbles on consecutive ports."""
from __future__ import annotations

import math
from typing import Sequence

Bits = tuple[int, ...]

STRING_GAP = 2
TERMINATOR = 3


class EncodingFormatError(ValueError):
    pass


def _as_bits(bits: Sequence[int] | str) -> Bits:
    if isinstance(bits, str):
        bits = [int(ch) for ch in bits]
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise EncodingFormatError(f"not a bit string: {bits!r}")
    return out


def transform_encode(bits: Sequence[int] | str) -> Bits:
    """1 -> 11, 0 -> 10. The result never contains two adjacent zeros."""
    out: list[int] = []
    for b in _as_bits(bits):
        out += (1, b)
    return tuple(out)


def transform_decode(bits: Sequence[int] | str) -> Bits:
    bits = _as_bits(bits)
    if len(bits) % 2:
        raise EncodingFormatError("transformed string has odd length")
    if any(bits[i] != 1 for i in range(0, len(bits), 2)):
        raise EncodingFormatError("transformed string has 0 in a marker position")
    return bits[1::2]


def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = 2 * value + b
    return value


def int_to_bits(value: int, width: int) -> Bits:
    if not 0 <= value < 2**width:
        raise EncodingFormatError(f"{value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def layout(strings: Sequence[Sequence[int]]) -> Bits:
    """Slot contents for a list of raw strings.

    Transformed strings separated by two empty slots, closed by three.
    """
    out: list[int] = []
    for j, s in enumerate(strings):
        if j:
            out += [0] * STRING_GAP
        out += transform_encode(s)
    out += [0] * TERMINATOR
    return tuple(out)


def layout_length(count: int, width: int) -> int:
    if count == 0:
        return TERMINATOR
    return count * 2 * width + STRING_GAP * (count - 1) + TERMINATOR


class SlotReader:
    """Incremental parser over slot bits, fed one slot at a time.

    Reading stops once three consecutive empty slots follow a completed
    string (or open the region).
    """

    def __init__(self) -> None:
        self.strings: list[Bits] = []
        self._current: list[int] = []
        self._zeros = 0
        self.done = False
        self.slots_read = 0

    def feed(self, bit: int) -> bool:
        """Consume one slot; returns True when the terminator has been seen."""
        if self.done:
            raise EncodingFormatError("reader already finished")
        self.slots_read += 1
        if len(self._current) % 2:
            # value half of a (1, b) pair
            self._current.append(bit)
            return False
        if bit:
            if self._zeros == 1:
                raise EncodingFormatError("single empty slot inside the encoding")
            if self._zeros == STRING_GAP and self._current:
                self._close()
            self._zeros = 0
            self._current.append(1)
            return False
        self._zeros += 1
        if self._zeros == TERMINATOR:
            if self._current:
                self._close()
            self.done = True
        return self.done

    def _close(self) -> None:
        self.strings.append(transform_decode(self._current))
        self._current = []


def read_slots(bits: Sequence[int]) -> list[Bits]:
    """Decode a full slot sequence back into raw strings."""
    reader = SlotReader()
    for b in bits:
        if reader.feed(b):
            return reader.strings
    raise EncodingFormatError("encoding is not terminated")


def partition_block(ports: Sequence[int], index: int, width: int) -> list[int]:
    """The ``index``-th of ``2**width`` contiguous blocks of ``ports``.

    Blocks have ``ceil(len(ports) / 2**width)`` entries; trailing blocks may
    be short or empty.
    """
    parts = 2**width
    if not 0 <= index < parts:
        raise EncodingFormatError(f"block {index} out of range for {width} bits")
    size = math.ceil(len(ports) / parts) if ports else 0
    return list(ports[index * size:(index + 1) * size])


def block_index(ports: Sequence[int], port: int, width: int) -> int:
    size = math.ceil(len(ports) / 2**width)
    return list(ports).index(port) // size
