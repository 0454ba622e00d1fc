"""chunk-parser: binary chunked-image format with injected, canary-annotated bugs.

Format: 4-byte file magic, then chunks of {u32 LE length, 4-byte type,
payload, u32 LE CRC-32 over type+payload}.  A critical header chunk (HDRC,
mandatory first) carries width/height/channels/bit-depth/interlace fields.
Chunk types with an uppercase first letter are critical and have their CRC
enforced; lowercase types are ancillary and parsed with the CRC ignored,
mirroring how image libraries treat ancillary chunks.

The header's row-factor computation hosts the marquee deep bug: a 32-bit
integer overflow that wraps the row factor to zero and feeds a division.
With default channel/depth/interlace values the only wrapping width is
0x55555555, a magic value that appears nowhere in the input format, and
the header CRC must simultaneously hold, so generic mutation essentially
never lands it even though the constant sits in the fuzzer's own value
table.  The shallow bugs, by contrast, trigger off broad predicates on
unguarded fields (lengths, offsets, duplicated views).
"""

from __future__ import annotations

import struct
import zlib

from .base import BugClass, BugDescriptor, FaultKind, TargetContext, site_id

TARGET = "chunk-parser"

FILE_MAGIC = b"CHNK"
HEADER_CHUNK = b"HDRC"
CHECKED_CHUNK = b"CSUM"
DUPWIDTH_CHUNK = b"dupw"
DATA_CHUNK = b"data"
MAGICTAG_CHUNK = b"mgic"

#: Fixed row-buffer size that the data chunk's offset field indexes into.
ROW_BUFFER_SIZE = 512

#: 32-bit tag guarding the magic-value bug (not in any mutation dictionary).
MAGIC_TAG = 0xCAFEBABE
_MAGIC_TAG_BYTES = struct.pack("<I", MAGIC_TAG)

_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_HDR_FIELDS = struct.Struct("<IIBBBB")  # width, height, channels, bit_depth, interlaced, reserved

U32_MASK = 0xFFFFFFFF

ROW_FACTOR_DIV_ZERO = BugDescriptor(
    0, "cp-row-factor-div-zero", BugClass.INTEGER_OVERFLOW_DIV_ZERO, TARGET,
    detectable=True, has_pov=True, shallow=False,
    summary="width*channels*depth-scale+1 wraps a u32 to zero and reaches a division; "
            "needs an exact 32-bit width behind the header CRC",
)
CHUNK_LEN_OOB = BugDescriptor(
    1, "cp-chunk-len-oob-read", BugClass.OOB_READ, TARGET,
    detectable=True, has_pov=True, shallow=True,
    summary="declared chunk length overruns the remaining input buffer",
)
CHECKSUM_OVERFLOW = BugDescriptor(
    2, "cp-checksum-guarded-overflow", BugClass.CHECKSUM_GUARDED, TARGET,
    detectable=True, has_pov=True, shallow=False,
    summary="inner length in the CRC-enforced CSUM chunk exceeds its actual payload, "
            "overflowing the copy destination",
)
MAGIC_TAG_OOB = BugDescriptor(
    3, "cp-magic-tag-oob-read", BugClass.MAGIC_VALUE, TARGET,
    detectable=True, has_pov=True, shallow=False,
    summary="an exact 32-bit tag in the mgic chunk switches to an out-of-bounds "
            "table read",
)
ROW_OFFSET_OOB = BugDescriptor(
    4, "cp-row-offset-oob-write", BugClass.OOB_WRITE, TARGET,
    detectable=True, has_pov=True, shallow=True,
    summary="data-chunk destination offset writes past the fixed row buffer",
)
STALE_ROW_REUSE = BugDescriptor(
    5, "cp-zero-length-stale-row", BugClass.STALE_STATE, TARGET,
    detectable=True, has_pov=True, shallow=True,
    summary="zero-length data chunk reuses the recycled row scratch buffer "
            "(use-after-free analog)",
)
WIDTH_VIEW_MISMATCH = BugDescriptor(
    6, "cp-width-view-mismatch", BugClass.SEMANTIC_INCONSISTENCY, TARGET,
    detectable=False, has_pov=True, shallow=True,
    summary="two API views of the image width disagree; no sanitizer-visible fault",
)

BUGS = [
    ROW_FACTOR_DIV_ZERO,
    CHUNK_LEN_OOB,
    CHECKSUM_OVERFLOW,
    MAGIC_TAG_OOB,
    ROW_OFFSET_OOB,
    STALE_ROW_REUSE,
    WIDTH_VIEW_MISMATCH,
]

# Instrumentation sites (structural branches only; canaries add no edges).
_S_MAGIC_BAD = site_id(TARGET, "magic-bad")
_S_MAGIC_OK = site_id(TARGET, "magic-ok")
_S_CHUNK = site_id(TARGET, "chunk-loop")
_S_TRUNC_HEADER = site_id(TARGET, "chunk-header-truncated")
_S_LEN_OVERRUN = site_id(TARGET, "chunk-length-overrun")
_S_CRC_OK = site_id(TARGET, "critical-crc-ok")
_S_CRC_BAD = site_id(TARGET, "critical-crc-bad")
_S_FIRST_NOT_HEADER = site_id(TARGET, "first-chunk-not-header")
_S_HDR = site_id(TARGET, "header-chunk")
_S_HDR_MALFORMED = site_id(TARGET, "header-malformed")
_S_DUPW = site_id(TARGET, "dupwidth-chunk")
_S_DATA = site_id(TARGET, "data-chunk")
_S_DATA_EMPTY = site_id(TARGET, "data-chunk-empty")
_S_CSUM = site_id(TARGET, "csum-chunk")
_S_MGIC = site_id(TARGET, "mgic-chunk")
_S_MGIC_CMP = site_id(TARGET, "mgic-tag-compare")
_S_UNKNOWN = site_id(TARGET, "unknown-chunk")
_S_DONE = site_id(TARGET, "parse-done")


def row_factor(width: int, channels: int, bit_depth: int, interlaced: int) -> int:
    """Per-row scale factor as the target computes it, wrapped to 32 bits."""
    depth_scale = 2 if bit_depth > 8 else 1
    return (width * channels * depth_scale + 1 + (6 if interlaced else 0)) & U32_MASK


def parse(data: bytes, ctx: TargetContext) -> None:
    ctx.ops["parse"] += 1
    if len(data) < 4 or data[:4] != FILE_MAGIC:
        ctx.visit(_S_MAGIC_BAD)
        return
    ctx.visit(_S_MAGIC_OK)

    header = None
    row_buffer = bytearray(ROW_BUFFER_SIZE)
    pos = 4
    first_chunk = True
    while pos < len(data):
        ctx.visit(_S_CHUNK)
        ctx.ops["parse"] += 1
        if len(data) - pos < 8:
            ctx.visit(_S_TRUNC_HEADER)
            break
        (length,) = _U32.unpack_from(data, pos)
        ctype = data[pos + 4:pos + 8]
        pos += 8
        remaining = len(data) - pos
        # Reading `length` payload bytes plus the 4-byte CRC would overrun
        # the input buffer when the declared length lies.
        overrun = length + 4 > remaining
        ctx.check(CHUNK_LEN_OOB, overrun, FaultKind.OOB_READ)
        if overrun:
            ctx.visit(_S_LEN_OVERRUN)
            break
        payload = data[pos:pos + length]
        pos += length
        (crc_stored,) = _U32.unpack_from(data, pos)
        pos += 4

        critical = (ctype[0] & 0x20) == 0
        if critical:
            ctx.ops["checksum"] += 1
            if zlib.crc32(ctype + payload) != crc_stored:
                ctx.visit(_S_CRC_BAD)
                break
            ctx.visit(_S_CRC_OK)

        if first_chunk:
            first_chunk = False
            if ctype != HEADER_CHUNK:
                ctx.visit(_S_FIRST_NOT_HEADER)
                break

        if ctype == HEADER_CHUNK:
            if len(payload) != _HDR_FIELDS.size:
                ctx.visit(_S_HDR_MALFORMED)
                break
            ctx.visit(_S_HDR)
            width, height, channels, bit_depth, interlaced, _ = _HDR_FIELDS.unpack(payload)
            ctx.ops["arith"] += 3
            factor = row_factor(width, channels, bit_depth, interlaced)
            ctx.check(ROW_FACTOR_DIV_ZERO, factor == 0, FaultKind.DIV_BY_ZERO)
            if factor != 0:
                ctx.ops["arith"] += 1
                _chunk_limit = U32_MASK // factor  # the faulty division
            header = (width, height, channels, bit_depth, interlaced)
        elif ctype == DUPWIDTH_CHUNK:
            if header is not None and len(payload) >= 4:
                ctx.visit(_S_DUPW)
                (alt_width,) = _U32.unpack_from(payload, 0)
                # Second API view of the width; a disagreement is a semantic
                # bug with no sanitizer-visible symptom.
                ctx.check(WIDTH_VIEW_MISMATCH, alt_width != header[0], None)
        elif ctype == DATA_CHUNK:
            if header is None:
                ctx.visit(_S_UNKNOWN)
                continue
            stale = length == 0
            ctx.check(STALE_ROW_REUSE, stale, FaultKind.USE_AFTER_FREE)
            if stale:
                ctx.visit(_S_DATA_EMPTY)
                continue
            if len(payload) >= 2:
                ctx.visit(_S_DATA)
                (offset,) = _U16.unpack_from(payload, 0)
                body = payload[2:]
                ctx.check(ROW_OFFSET_OOB, offset + len(body) > ROW_BUFFER_SIZE,
                          FaultKind.OOB_WRITE)
                end = min(offset + len(body), ROW_BUFFER_SIZE)
                if offset < ROW_BUFFER_SIZE:
                    row_buffer[offset:end] = body[:end - offset]
                    ctx.ops["copy"] += end - offset
        elif ctype == CHECKED_CHUNK:
            if len(payload) >= 2:
                ctx.visit(_S_CSUM)
                (inner_len,) = _U16.unpack_from(payload, 0)
                blob = payload[2:]
                # Copy destination is sized from the actual payload; a larger
                # declared inner length overflows it.
                ctx.ops["alloc"] += 1
                ctx.check(CHECKSUM_OVERFLOW, inner_len > len(blob), FaultKind.OOB_WRITE)
                ctx.ops["copy"] += min(inner_len, len(blob))
        elif ctype == MAGICTAG_CHUNK:
            if len(payload) >= 4:
                ctx.visit(_S_MGIC)
                tag_match = ctx.compare(_S_MGIC_CMP, _MAGIC_TAG_BYTES, payload[:4])
                ctx.check(MAGIC_TAG_OOB, tag_match, FaultKind.OOB_READ)
        else:
            ctx.visit(_S_UNKNOWN)
    ctx.visit(_S_DONE)


def chunk(ctype: bytes, payload: bytes) -> bytes:
    """Assemble one well-formed chunk (correct CRC)."""
    return _U32.pack(len(payload)) + ctype + payload + _U32.pack(zlib.crc32(ctype + payload))


def header_payload(width: int = 64, height: int = 48, channels: int = 3,
                   bit_depth: int = 8, interlaced: int = 0) -> bytes:
    return _HDR_FIELDS.pack(width, height, channels, bit_depth, interlaced, 0)


def build(*chunks: bytes) -> bytes:
    return FILE_MAGIC + b"".join(chunks)


def make_seed() -> bytes:
    """Valid seed input: reaches every canary, triggers none."""
    return build(
        chunk(HEADER_CHUNK, header_payload()),
        chunk(DUPWIDTH_CHUNK, _U32.pack(64)),
        chunk(DATA_CHUNK, _U16.pack(0) + b"row-pixels-here!"),
        chunk(CHECKED_CHUNK, _U16.pack(8) + b"8 bytes."),
        chunk(MAGICTAG_CHUNK, b"\x00\x00\x00\x00tail"),
    )


def _pov_row_factor() -> bytes:
    # 3 * 0x55555555 + 1 == 2**32: the row factor wraps to zero for a
    # non-interlaced, 8-bit, 3-channel image of width 0x55555555.
    return build(chunk(HEADER_CHUNK, header_payload(width=0x55555555)))


def _pov_chunk_len() -> bytes:
    bad = _U32.pack(0xFFFF) + DATA_CHUNK + b"short"
    return build(chunk(HEADER_CHUNK, header_payload()) + bad)


def _pov_checksum_overflow() -> bytes:
    return build(
        chunk(HEADER_CHUNK, header_payload()),
        chunk(CHECKED_CHUNK, _U16.pack(0xFFFF) + b"tiny"),
    )


def _pov_magic_tag() -> bytes:
    return build(
        chunk(HEADER_CHUNK, header_payload()),
        chunk(MAGICTAG_CHUNK, _MAGIC_TAG_BYTES + b"tail"),
    )


def _pov_row_offset() -> bytes:
    return build(
        chunk(HEADER_CHUNK, header_payload()),
        chunk(DATA_CHUNK, _U16.pack(0xFFF0) + b"spill"),
    )


def _pov_stale_row() -> bytes:
    return build(
        chunk(HEADER_CHUNK, header_payload()),
        chunk(DATA_CHUNK, b""),
    )


def _pov_width_view() -> bytes:
    return build(
        chunk(HEADER_CHUNK, header_payload(width=64)),
        chunk(DUPWIDTH_CHUNK, _U32.pack(65)),
    )


POVS = {
    ROW_FACTOR_DIV_ZERO.bug_id: _pov_row_factor,
    CHUNK_LEN_OOB.bug_id: _pov_chunk_len,
    CHECKSUM_OVERFLOW.bug_id: _pov_checksum_overflow,
    MAGIC_TAG_OOB.bug_id: _pov_magic_tag,
    ROW_OFFSET_OOB.bug_id: _pov_row_offset,
    STALE_ROW_REUSE.bug_id: _pov_stale_row,
    WIDTH_VIEW_MISMATCH.bug_id: _pov_width_view,
}
