"""kv-parser: textual key=value record format hosting the weird-state bug pair.

Lines are ``key=value`` pairs, ``{`` / ``}`` group markers (recursive
nesting), ``#`` comments, or blank.  Every value passes through a routine
that copies it into a 16-byte stack buffer sitting directly below the length
field, the classic overflow layout:

* value length >= 16 overflows the buffer (bug W1);
* a length of exactly 16 lands the terminator byte on the length field's low
  byte, silently zeroing it (little-endian), and a zero length feeds a
  division (bug W2).

The two bugs interact through data flow: a 16-byte value satisfies both
conditions, but W1 triggers first and freezes the canaries, so W2 records
nothing even though its condition becomes true downstream.  That frozen
second canary is the whole point: state after the first bug is unreliable.
"""

from __future__ import annotations

from .base import (
    DEFAULT_NEST_LIMIT,
    BugClass,
    BugDescriptor,
    FaultKind,
    TargetContext,
    site_id,
)

TARGET = "kv-parser"

#: Stack-buffer size in the value-copy routine.
VALUE_BUFFER_SIZE = 16

VALUE_OVERFLOW = BugDescriptor(
    7, "kv-value-overflow", BugClass.WEIRD_STATE_PAIR, TARGET,
    detectable=True, has_pov=True, shallow=False,
    summary="value of length >= 16 overflows the fixed copy buffer (W1); "
            "a 16-byte value also corrupts the adjacent length field",
)
ZERO_LENGTH_DIV = BugDescriptor(
    8, "kv-zero-length-div", BugClass.WEIRD_STATE_PAIR, TARGET,
    detectable=True, has_pov=True, shallow=False,
    summary="zero value length reaches a division (W2); also arises downstream "
            "of W1's overwrite without an explicitly empty value",
)
MISSING_SEPARATOR = BugDescriptor(
    9, "kv-missing-separator-scan", BugClass.OOB_READ, TARGET,
    detectable=True, has_pov=True, shallow=True,
    summary="separator scan runs past the line buffer when a pair line has no '='",
)
NESTING_EXHAUSTION = BugDescriptor(
    10, "kv-nesting-exhaustion", BugClass.RESOURCE_EXHAUSTION, TARGET,
    detectable=True, has_pov=True, shallow=False,
    summary="group nesting beyond the iteration bound; surfaces as a modeled hang",
)
STRAY_GROUP_CLOSE = BugDescriptor(
    11, "kv-stray-group-close", BugClass.STALE_STATE, TARGET,
    detectable=True, has_pov=False, shallow=False,
    summary="closing brace with no open group pops the recycled group frame; "
            "no verified reproducer is stored for this bug",
)

BUGS = [
    VALUE_OVERFLOW,
    ZERO_LENGTH_DIV,
    MISSING_SEPARATOR,
    NESTING_EXHAUSTION,
    STRAY_GROUP_CLOSE,
]

_S_LINE = site_id(TARGET, "line")
_S_COMMENT = site_id(TARGET, "comment")
_S_GROUP_OPEN = site_id(TARGET, "group-open")
_S_GROUP_CLOSE = site_id(TARGET, "group-close")
_S_PAIR = site_id(TARGET, "pair")
_S_PAIR_BAD = site_id(TARGET, "pair-no-separator")
_S_VALUE_SHORT = site_id(TARGET, "value-short")
_S_VALUE_LONG = site_id(TARGET, "value-long")
_S_DONE = site_id(TARGET, "parse-done")


def _process_value(value: bytes, ctx: TargetContext) -> None:
    """Copy a value through the undersized stack buffer and derive a repeat count."""
    length = len(value)
    ctx.ops["alloc"] += 1
    ctx.check(VALUE_OVERFLOW, length >= VALUE_BUFFER_SIZE, FaultKind.OOB_WRITE)
    ctx.ops["copy"] += min(length, VALUE_BUFFER_SIZE)
    if length == VALUE_BUFFER_SIZE:
        # The copy's terminator byte lands on the length field's low byte;
        # on a little-endian layout the length now reads back as zero.
        effective_length = 0
    else:
        # length > 16 sprays non-zero value bytes over the field instead;
        # length < 16 leaves it untouched. Either way it stays non-zero.
        effective_length = length
    if length < VALUE_BUFFER_SIZE:
        ctx.visit(_S_VALUE_SHORT)
    else:
        ctx.visit(_S_VALUE_LONG)
    ctx.check(ZERO_LENGTH_DIV, effective_length == 0, FaultKind.DIV_BY_ZERO)
    if effective_length != 0:
        ctx.ops["arith"] += 1
        _repeat = 64 // effective_length  # the faulty division


def parse(data: bytes, ctx: TargetContext) -> None:
    ctx.ops["parse"] += 1
    depth = 0
    for line in data.split(b"\n"):
        line = line.rstrip(b"\r")
        ctx.visit(_S_LINE)
        ctx.ops["parse"] += 1
        if not line:
            continue
        if line.startswith(b"#"):
            ctx.visit(_S_COMMENT)
            continue
        if line == b"{":
            depth += 1
            ctx.visit(_S_GROUP_OPEN)
            ctx.ops["alloc"] += 1
            ctx.check(NESTING_EXHAUSTION, depth > ctx.nest_limit, FaultKind.HANG)
            continue
        if line == b"}":
            ctx.visit(_S_GROUP_CLOSE)
            ctx.check(STRAY_GROUP_CLOSE, depth == 0, FaultKind.USE_AFTER_FREE)
            if depth > 0:
                depth -= 1
            continue
        missing = b"=" not in line
        ctx.check(MISSING_SEPARATOR, missing, FaultKind.OOB_READ)
        if missing:
            ctx.visit(_S_PAIR_BAD)
            continue
        ctx.visit(_S_PAIR)
        _key, _, value = line.partition(b"=")
        _process_value(value, ctx)
    ctx.visit(_S_DONE)


def make_seed() -> bytes:
    """Valid seed: reaches every canary in the target, triggers none."""
    return (
        b"# sample record\n"
        b"name=alpha\n"
        b"{\n"
        b"mode=fast\n"
        b"}\n"
        b"count=5\n"
    )


def _pov_value_overflow() -> bytes:
    # Exactly 16 bytes: triggers W1 and corrupts the length field, but W2's
    # canary stays frozen behind the weird-state rule.
    return b"k=" + b"A" * VALUE_BUFFER_SIZE + b"\n"


def _pov_zero_length() -> bytes:
    return b"k=\n"


def _pov_missing_separator() -> bytes:
    return b"novalue\n"


def _pov_nesting() -> bytes:
    return b"{\n" * (DEFAULT_NEST_LIMIT + 1)


POVS = {
    VALUE_OVERFLOW.bug_id: _pov_value_overflow,
    ZERO_LENGTH_DIV.bug_id: _pov_zero_length,
    MISSING_SEPARATOR.bug_id: _pov_missing_separator,
    NESTING_EXHAUSTION.bug_id: _pov_nesting,
}
