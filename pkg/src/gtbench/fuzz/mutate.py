"""Mutation stages: deterministic walking passes plus randomized havoc/splice.

Bit ordering follows the common convention: bit k of byte b is
``(b >> (7 - k)) & 1``, so BitFlip(0) on 0x00 yields 0x80 (most-significant
bit first).  The interesting-values table deliberately includes 0x55555555
alongside the usual boundary constants, in both endiannesses: magic-value
experiments should measure path difficulty, not whether a constant happens
to be missing from the dictionary.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass
from typing import Iterator, Union

ARITH_MAX = 35

#: Maximum input size havoc is allowed to grow an input to.
MAX_INPUT_SIZE = 4096

_INTERESTING = [0, 1, -1, 16, 32, 64, 127, 128, 255,
                0x7FFF, 0xFFFF, 0x7FFFFFFF, 0xFFFFFFFF, 0x55555555]


def _encodings(width: int) -> list[bytes]:
    """Table values encoded at a width, both endiannesses, deduplicated."""
    code = {1: "B", 2: "H", 4: "I"}[width]
    limit = 1 << (8 * width)
    seen: list[bytes] = []
    for value in _INTERESTING:
        if value >= limit:
            continue
        encoded = value % limit
        for order in ("<", ">"):
            raw = struct.pack(order + code, encoded)
            if raw not in seen:
                seen.append(raw)
    return seen


INTERESTING_8 = _encodings(1)
INTERESTING_16 = _encodings(2)
INTERESTING_32 = _encodings(4)


@dataclass(frozen=True)
class BitFlip:
    pos: int  # bit index over the whole input, MSB of byte 0 first


@dataclass(frozen=True)
class ByteFlip:
    pos: int


@dataclass(frozen=True)
class Arith:
    pos: int
    delta: int  # applied mod 256 (wrapping byte arithmetic)


@dataclass(frozen=True)
class Interesting:
    pos: int
    value: bytes  # already encoded at the desired width/endianness


@dataclass(frozen=True)
class Havoc:
    n_ops: int


@dataclass(frozen=True)
class Splice:
    other: bytes


Stage = Union[BitFlip, ByteFlip, Arith, Interesting, Havoc, Splice]


def mutate(data: bytes, rng: random.Random | None, stage: Stage) -> bytes:
    """Apply one mutation stage.

    Deterministic stages (BitFlip/ByteFlip/Arith/Interesting) are pure
    functions of (data, stage) and validate their position; Havoc and Splice
    consume the supplied rng.
    """
    if isinstance(stage, BitFlip):
        if not 0 <= stage.pos < 8 * len(data):
            raise ValueError(f"bit position {stage.pos} out of range for {len(data)} bytes")
        out = bytearray(data)
        out[stage.pos // 8] ^= 0x80 >> (stage.pos % 8)
        return bytes(out)
    if isinstance(stage, ByteFlip):
        if not 0 <= stage.pos < len(data):
            raise ValueError(f"byte position {stage.pos} out of range for {len(data)} bytes")
        out = bytearray(data)
        out[stage.pos] ^= 0xFF
        return bytes(out)
    if isinstance(stage, Arith):
        if not 0 <= stage.pos < len(data):
            raise ValueError(f"byte position {stage.pos} out of range for {len(data)} bytes")
        out = bytearray(data)
        out[stage.pos] = (out[stage.pos] + stage.delta) & 0xFF
        return bytes(out)
    if isinstance(stage, Interesting):
        if not 0 <= stage.pos <= len(data) - len(stage.value):
            raise ValueError(
                f"cannot splice {len(stage.value)} bytes at {stage.pos} into {len(data)} bytes")
        out = bytearray(data)
        out[stage.pos:stage.pos + len(stage.value)] = stage.value
        return bytes(out)
    if isinstance(stage, Havoc):
        if rng is None:
            raise ValueError("havoc requires an rng")
        return havoc(data, rng, stage.n_ops)
    if isinstance(stage, Splice):
        if rng is None:
            raise ValueError("splice requires an rng")
        return splice(data, stage.other, rng)
    raise TypeError(f"unknown mutation stage {stage!r}")


def deterministic_stages(data: bytes) -> Iterator[tuple[Stage, bytes]]:
    """Full deterministic pass: walking bit/byte flips, arithmetic, value table.

    Yields (stage, mutated input) pairs in a fixed order so campaigns are
    reproducible; mutants identical to the input (a value-table write over
    the same bytes) are skipped.
    """
    n = len(data)
    for pos in range(8 * n):
        stage = BitFlip(pos)
        yield stage, mutate(data, None, stage)
    for pos in range(n):
        stage = ByteFlip(pos)
        yield stage, mutate(data, None, stage)
    for pos in range(n):
        for delta in range(1, ARITH_MAX + 1):
            for signed in (delta, -delta):
                stage = Arith(pos, signed)
                yield stage, mutate(data, None, stage)
    for table, width in ((INTERESTING_8, 1), (INTERESTING_16, 2), (INTERESTING_32, 4)):
        for pos in range(n - width + 1):
            for raw in table:
                if data[pos:pos + width] == raw:
                    continue
                stage = Interesting(pos, raw)
                yield stage, mutate(data, None, stage)


def _rand_block(rng: random.Random, n: int) -> tuple[int, int]:
    length = rng.randint(1, max(1, min(n, 32)))
    start = rng.randint(0, n - 1)
    return start, min(length, n - start)


def havoc(data: bytes, rng: random.Random, n_ops: int) -> bytes:
    """Stack n_ops randomly chosen destructive edits onto the input."""
    out = bytearray(data)
    for _ in range(n_ops):
        n = len(out)
        if n == 0:
            out[:] = bytes([rng.randrange(256) for _ in range(rng.randint(1, 8))])
            continue
        op = rng.randrange(11)
        if op == 0:
            bit = rng.randrange(8 * n)
            out[bit // 8] ^= 0x80 >> (bit % 8)
        elif op == 1:
            out[rng.randrange(n)] ^= 0xFF
        elif op == 2:
            out[rng.randrange(n)] = rng.randrange(256)
        elif op == 3:
            pos = rng.randrange(n)
            delta = rng.randint(1, ARITH_MAX) * rng.choice((1, -1))
            out[pos] = (out[pos] + delta) & 0xFF
        elif op == 4:
            pos = rng.randrange(n)
            out[pos:pos + 1] = rng.choice(INTERESTING_8)
        elif op == 5 and n >= 2:
            pos = rng.randrange(n - 1)
            out[pos:pos + 2] = rng.choice(INTERESTING_16)
        elif op == 6 and n >= 4:
            pos = rng.randrange(n - 3)
            out[pos:pos + 4] = rng.choice(INTERESTING_32)
        elif op == 7 and n >= 2:
            start, length = _rand_block(rng, n)
            del out[start:start + length]
        elif op == 8 and n < MAX_INPUT_SIZE:
            start, length = _rand_block(rng, n)
            block = out[start:start + length]
            at = rng.randint(0, n)
            out[at:at] = block
        elif op == 9:
            start, length = _rand_block(rng, n)
            out[start:start + length] = bytes([rng.randrange(256)]) * length
        elif op == 10 and n < MAX_INPUT_SIZE:
            at = rng.randint(0, n)
            out[at:at] = bytes([rng.randrange(256) for _ in range(rng.randint(1, 8))])
    return bytes(out[:MAX_INPUT_SIZE])


def splice(data: bytes, other: bytes, rng: random.Random) -> bytes:
    """Cross two inputs: a prefix of one followed by a suffix of the other."""
    if not data or not other:
        return data + other
    cut_a = rng.randint(0, len(data))
    cut_b = rng.randint(0, len(other))
    return (data[:cut_a] + other[cut_b:])[:MAX_INPUT_SIZE]
