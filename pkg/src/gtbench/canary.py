"""Bug-canary runtime: per-bug reach/trigger counters behind a shared report file.

Every injected bug carries a canary: a call site that records that execution
arrived at the bug (*reached*) and whether the bug's trigger condition held
(*triggered*).  Once any bug triggers, the execution has entered a weird
state and all counters freeze for the rest of that execution; data collected
afterwards would be unreliable.

Counters live in a memory-mapped report file so an external monitor process
can poll them while the target runs.  The file layout is little-endian and
bit-exact:

    offset  size  field
    0       4     magic ``GTBM``
    4       2     u16 version (= 1)
    6       2     u16 reserved (= 0)
    8       4     u32 bug_count
    12      1     u8 faulty (0 or 1)
    13      7     zero padding
    20      16*n  per-bug records of {u64 reached, u64 triggered}

Environment variables ``BENCH_REPORT_PATH`` (report file location) and
``BENCH_FATAL`` ("1" selects fatal-canary mode) configure target drivers.
In fatal mode the first satisfied trigger condition terminates the run with
exit status 77 after the counters have been persisted, so every bug behaves
like an ideally-sanitized crash.
"""

from __future__ import annotations

import logging
import mmap
import os
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

REPORT_MAGIC = b"GTBM"
REPORT_VERSION = 1

ENV_REPORT_PATH = "BENCH_REPORT_PATH"
ENV_FATAL = "BENCH_FATAL"

#: Dedicated process exit status for a fatal-canary termination.
FATAL_EXIT_STATUS = 77

_HEADER = struct.Struct("<4sHHIB7x")
_RECORD = struct.Struct("<QQ")
_U64 = struct.Struct("<Q")
_U64_MAX = 2**64 - 1

log = logging.getLogger(__name__)


class Mode(Enum):
    """Canary behavior on a satisfied trigger condition."""

    NORMAL = "normal"
    FATAL = "fatal"


class ReportFormatError(ValueError):
    """Report bytes do not conform to the bit-exact layout."""


class FatalCanary(Exception):
    """Raised by a fatal-mode registry when a trigger condition is satisfied.

    Command-line drivers translate this into process exit status 77; the
    in-process harness treats it as an abnormal-execution outcome.  Counters
    are flushed before this is raised, so the triggering bug is identifiable
    post-mortem.
    """

    exit_status = FATAL_EXIT_STATUS

    def __init__(self, bug_id: int):
        super().__init__(f"fatal canary: bug {bug_id} triggered")
        self.bug_id = bug_id


def report_size(bug_count: int) -> int:
    return _HEADER.size + bug_count * _RECORD.size


@dataclass(frozen=True)
class RegistrySnapshot:
    """Decoded point-in-time view of a registry's counters.

    ``timestamp`` is seconds since trial start, assigned by whichever monitor
    took the snapshot; the report file itself carries no clock.
    """

    reached: tuple[int, ...]
    triggered: tuple[int, ...]
    faulty: bool
    timestamp: float | None = None

    @property
    def bug_count(self) -> int:
        return len(self.reached)


def decode_snapshot(data: bytes, timestamp: float | None = None) -> RegistrySnapshot:
    """Decode report bytes into a snapshot. Never mutates the input.

    Raises ReportFormatError on bad magic/version, truncation, or any other
    layout violation.
    """
    if len(data) < _HEADER.size:
        raise ReportFormatError(f"report truncated: {len(data)} bytes < {_HEADER.size}-byte header")
    magic, version, reserved, bug_count, faulty = _HEADER.unpack_from(data, 0)
    if magic != REPORT_MAGIC:
        raise ReportFormatError(f"bad magic {magic!r}")
    if version != REPORT_VERSION:
        raise ReportFormatError(f"unsupported report version {version}")
    if reserved != 0:
        raise ReportFormatError(f"reserved field must be 0, got {reserved}")
    if faulty not in (0, 1):
        raise ReportFormatError(f"faulty flag must be 0 or 1, got {faulty}")
    expected = report_size(bug_count)
    if len(data) != expected:
        raise ReportFormatError(f"report is {len(data)} bytes, layout requires {expected}")
    reached: list[int] = []
    triggered: list[int] = []
    off = _HEADER.size
    for _ in range(bug_count):
        r, t = _RECORD.unpack_from(data, off)
        reached.append(r)
        triggered.append(t)
        off += _RECORD.size
    return RegistrySnapshot(tuple(reached), tuple(triggered), bool(faulty), timestamp)


# Spec-facing alias: parse report bytes into a snapshot.
snapshot = decode_snapshot


def encode_snapshot(snap: RegistrySnapshot) -> bytes:
    """Encode a snapshot back into the bit-exact report layout."""
    out = bytearray(report_size(snap.bug_count))
    _HEADER.pack_into(out, 0, REPORT_MAGIC, REPORT_VERSION, 0, snap.bug_count, 1 if snap.faulty else 0)
    off = _HEADER.size
    for r, t in zip(snap.reached, snap.triggered):
        _RECORD.pack_into(out, off, r & _U64_MAX, t & _U64_MAX)
        off += _RECORD.size
    return bytes(out)


class _ReportBacking:
    """Fixed-layout report buffer, either in memory or file-backed via mmap.

    A single writer mutates it; an external reader may poll the file at any
    time.  Each u64 write is a single 8-byte buffer store, so individual
    counters are torn-free for all practical purposes; cross-counter snapshot
    consistency is best-effort by design.
    """

    def __init__(self, bug_count: int, path: str | os.PathLike | None = None):
        self.bug_count = bug_count
        self.size = report_size(bug_count)
        self._file = None
        self._mmap = None
        if path is None:
            self._buf: bytearray | mmap.mmap = bytearray(self.size)
        else:
            path = Path(path)
            f = open(path, "w+b")
            f.truncate(self.size)
            self._file = f
            self._mmap = mmap.mmap(f.fileno(), self.size)
            self._buf = self._mmap
        self.reset_header()

    def reset_header(self) -> None:
        _HEADER.pack_into(self._buf, 0, REPORT_MAGIC, REPORT_VERSION, 0, self.bug_count, 0)

    def write_counter(self, bug_id: int, reached: int, triggered: int) -> None:
        # Two separate stores, reached first: a concurrent reader catching a
        # record mid-update can only see the benign reached-before-triggered
        # ordering, matching the update rule's own store order.
        offset = _HEADER.size + bug_id * _RECORD.size
        _U64.pack_into(self._buf, offset, reached & _U64_MAX)
        _U64.pack_into(self._buf, offset + 8, triggered & _U64_MAX)

    def write_faulty(self, faulty: bool) -> None:
        self._buf[12] = 1 if faulty else 0

    def zero_counters(self) -> None:
        self._buf[12] = 0
        self._buf[_HEADER.size:self.size] = bytes(self.size - _HEADER.size)

    def to_bytes(self) -> bytes:
        return bytes(self._buf)

    def flush(self) -> None:
        if self._mmap is not None:
            self._mmap.flush()

    def close(self) -> None:
        if self._mmap is not None:
            self._mmap.flush()
            self._mmap.close()
            self._mmap = None
        if self._file is not None:
            self._file.close()
            self._file = None


class BugRegistry:
    """Per-execution canary state: reach/trigger counters plus the faulty flag.

    The update rule for ``log(bug_id, condition)`` is the straight-line,
    always-evaluate form (no short-circuit, no extra control flow visible to
    coverage instrumentation):

        reached[id]   += 1         & (faulty ^ 1)
        triggered[id] += condition & (faulty ^ 1)
        faulty        |= condition

    so counters freeze permanently after the first triggered bug.
    """

    def __init__(self, bug_count: int, mode: Mode = Mode.NORMAL,
                 report_path: str | os.PathLike | None = None):
        if bug_count < 1:
            raise ValueError(f"bug_count must be >= 1, got {bug_count}")
        self.bug_count = bug_count
        self.mode = mode
        self._reached = [0] * bug_count
        self._triggered = [0] * bug_count
        self._faulty = False
        self._backing = _ReportBacking(bug_count, report_path)

    @property
    def faulty(self) -> bool:
        return self._faulty

    @property
    def reached(self) -> tuple[int, ...]:
        return tuple(self._reached)

    @property
    def triggered(self) -> tuple[int, ...]:
        return tuple(self._triggered)

    def log(self, bug_id: int, condition: bool) -> bool:
        """Record one canary event. Returns True iff a trigger was recorded.

        ``condition`` must already be fully evaluated by the caller (compose
        compound conditions with and_nb/or_nb).  An out-of-range bug_id is a
        no-op plus a diagnostic: the benchmark must never add faults of its
        own.  In fatal mode a recorded trigger flushes the report and raises
        FatalCanary.
        """
        if not 0 <= bug_id < self.bug_count:
            log.warning("canary bug id %d outside [0, %d); event dropped", bug_id, self.bug_count)
            return False
        if self._faulty:
            # Weird state: a bug already triggered in this execution.
            return False
        condition = bool(condition)
        self._reached[bug_id] += 1
        if condition:
            self._triggered[bug_id] += 1
        # Always store both counters (always-evaluate semantics); reached
        # lands first within the record.
        self._backing.write_counter(bug_id, self._reached[bug_id], self._triggered[bug_id])
        if condition:
            self._faulty = True
            self._backing.write_faulty(True)
            if self.mode is Mode.FATAL:
                self._backing.flush()
                raise FatalCanary(bug_id)
        return condition

    def reset(self) -> None:
        """Zero all counters and clear the faulty flag (start of an execution)."""
        for i in range(self.bug_count):
            self._reached[i] = 0
            self._triggered[i] = 0
        self._faulty = False
        self._backing.zero_counters()

    def snapshot(self, timestamp: float | None = None) -> RegistrySnapshot:
        return RegistrySnapshot(self.reached, self.triggered, self._faulty, timestamp)

    def to_bytes(self) -> bytes:
        return self._backing.to_bytes()

    def flush(self) -> None:
        self._backing.flush()

    def close(self) -> None:
        self._backing.close()

    def __enter__(self) -> "BugRegistry":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def registry_init(bug_count: int, mode: Mode = Mode.NORMAL,
                  report_path: str | os.PathLike | None = None) -> BugRegistry:
    """Create a registry with all counters zero and faulty=false.

    When ``report_path`` is given the report file is created (or truncated)
    with the bit-exact layout so a monitor can start polling immediately.
    """
    return BugRegistry(bug_count, mode, report_path)


def registry_from_env(bug_count: int, default_mode: Mode = Mode.NORMAL) -> BugRegistry:
    """Build a driver-side registry from BENCH_REPORT_PATH / BENCH_FATAL."""
    path = os.environ.get(ENV_REPORT_PATH) or None
    mode = Mode.FATAL if os.environ.get(ENV_FATAL) == "1" else default_mode
    return BugRegistry(bug_count, mode, path)


class CumulativeReport:
    """Trial-level max-merge of per-execution registries.

    Per-execution counters reset between runs, so a trial's view is "ever
    nonzero": the per-bug maximum over all executions.  Max-merge is
    associative, which lets the execution harness fold each finished run into
    this report while an external monitor polls the same file and applies its
    own merge over what it reads.
    """

    def __init__(self, bug_count: int, report_path: str | os.PathLike | None = None):
        if bug_count < 1:
            raise ValueError(f"bug_count must be >= 1, got {bug_count}")
        self.bug_count = bug_count
        self._reached = [0] * bug_count
        self._triggered = [0] * bug_count
        self._faulty = False
        self._backing = _ReportBacking(bug_count, report_path)

    def absorb(self, registry: BugRegistry) -> None:
        """Fold one execution's final counters into the cumulative view."""
        for i in range(self.bug_count):
            r = registry._reached[i]
            t = registry._triggered[i]
            if r > self._reached[i] or t > self._triggered[i]:
                self._reached[i] = max(self._reached[i], r)
                self._triggered[i] = max(self._triggered[i], t)
                self._backing.write_counter(i, self._reached[i], self._triggered[i])
        if registry._faulty and not self._faulty:
            self._faulty = True
            self._backing.write_faulty(True)

    def snapshot(self, timestamp: float | None = None) -> RegistrySnapshot:
        return RegistrySnapshot(tuple(self._reached), tuple(self._triggered), self._faulty, timestamp)

    def to_bytes(self) -> bytes:
        return self._backing.to_bytes()

    def flush(self) -> None:
        self._backing.flush()

    def close(self) -> None:
        self._backing.close()


def and_nb(a: bool, b: bool) -> bool:
    """Branch-free conjunction of two already-evaluated booleans.

    Contract: neither operand is short-circuited and the combination adds no
    data-dependent control flow, so coverage-guided fuzzers cannot observe
    the structure of a compound oracle condition as new edges.
    """
    return bool(a) & bool(b)


def or_nb(a: bool, b: bool) -> bool:
    """Branch-free disjunction of two already-evaluated booleans."""
    return bool(a) | bool(b)
