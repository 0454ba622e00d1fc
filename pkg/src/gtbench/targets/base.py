"""Shared plumbing for the synthetic instrumented targets.

Faults here are *modeled*, not real memory corruption: a triggered bug
manifests as its canary condition and, when running in detect mode, as a
controlled ModeledFaultSignal standing in for what an ideal sanitizer would
observe.  Bugs whose faults no sanitizer could see (semantic inconsistencies)
are marked ``detectable=False`` and never raise, which is exactly the
triggered-but-undetected gap the benchmark measures.
"""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from ..canary import BugRegistry, RegistrySnapshot

#: Iteration bound for the recursive-nesting resource bug (configurable).
DEFAULT_NEST_LIMIT = 32

#: Driver process exit status for a detect-mode modeled fault.
DRIVER_FAULT_EXIT_STATUS = 99


class RunMode(Enum):
    """How an execution reacts to triggered bugs.

    NORMAL always runs to completion; FATAL terminates at the first trigger
    (ideal-sanitizer crash semantics, exit status 77 at the driver level);
    DETECT additionally manifests a modeled fault for detectable bugs, which
    is what post-campaign replay triage uses for the *detected* metric.
    """

    NORMAL = "normal"
    FATAL = "fatal"
    DETECT = "detect"


class BugClass(str, Enum):
    INTEGER_OVERFLOW_DIV_ZERO = "IntegerOverflowDivZero"
    MAGIC_VALUE = "MagicValue"
    CHECKSUM_GUARDED = "ChecksumGuarded"
    OOB_READ = "OOBRead"
    OOB_WRITE = "OOBWrite"
    STALE_STATE = "StaleState"
    WEIRD_STATE_PAIR = "WeirdStatePair"
    SEMANTIC_INCONSISTENCY = "SemanticInconsistency"
    RESOURCE_EXHAUSTION = "ResourceExhaustion"


class FaultKind(str, Enum):
    """What an ideal sanitizer would report for a detectable bug."""

    OOB_READ = "oob-read"
    OOB_WRITE = "oob-write"
    DIV_BY_ZERO = "div-by-zero"
    USE_AFTER_FREE = "use-after-free"
    HANG = "hang"


@dataclass(frozen=True)
class BugDescriptor:
    """Static metadata for one injected bug.

    ``shallow`` marks bugs whose trigger predicate sits on an unguarded parse
    path and is broad enough that a baseline mutational fuzzer satisfies it
    from a valid seed; deep bugs hide behind checksums or exact magic values.
    """

    bug_id: int
    name: str
    bug_class: BugClass
    target: str
    detectable: bool
    has_pov: bool
    shallow: bool
    summary: str

    def to_json(self) -> dict:
        return {
            "id": self.bug_id,
            "name": self.name,
            "class": self.bug_class.value,
            "target": self.target,
            "detectable": self.detectable,
            "has_pov": self.has_pov,
            "shallow": self.shallow,
            "summary": self.summary,
        }


class UnknownTargetError(ValueError):
    """Requested target does not exist (never conflated with a bug outcome)."""


class PovUnavailableError(LookupError):
    """No proof-of-vulnerability input is stored for this bug."""


class ModeledFaultSignal(Exception):
    """Detect-mode stand-in for a sanitizer-observable fault."""

    def __init__(self, kind: FaultKind, bug_id: int):
        super().__init__(f"modeled fault {kind.value} (bug {bug_id})")
        self.kind = kind
        self.bug_id = bug_id


class ExitKind(Enum):
    CLEAN = "clean"
    FATAL_CANARY = "fatal-canary"
    MODELED_FAULT = "modeled-fault"


@dataclass(frozen=True)
class ExitStatus:
    kind: ExitKind
    bug_id: int | None = None
    fault: FaultKind | None = None

    @classmethod
    def clean(cls) -> "ExitStatus":
        return cls(ExitKind.CLEAN)

    @classmethod
    def fatal(cls, bug_id: int) -> "ExitStatus":
        return cls(ExitKind.FATAL_CANARY, bug_id=bug_id)

    @classmethod
    def modeled_fault(cls, fault: FaultKind, bug_id: int) -> "ExitStatus":
        return cls(ExitKind.MODELED_FAULT, bug_id=bug_id, fault=fault)


@dataclass
class ExecutionOutcome:
    """Result of driving one input through a target."""

    exit: ExitStatus
    snapshot: RegistrySnapshot
    op_counts: dict[str, int] = field(default_factory=dict)


def site_id(target: str, name: str) -> int:
    """Stable 16-bit location id for one instrumentation site.

    Derived from a CRC so ids survive process restarts and code reordering;
    collisions are tolerated the same way compile-time random ids would be.
    """
    return zlib.crc32(f"{target}:{name}".encode()) & 0xFFFF


class TargetContext:
    """Per-execution harness state threaded through a target's parse code.

    Carries the canary registry, the optional edge tracer supplied by the
    fuzzer, the optional comparison-progress observer (off by default), and
    operation-category counters used for workload-diversity profiles.
    """

    __slots__ = ("registry", "mode", "tracer", "cmp_observer", "ops", "nest_limit")

    def __init__(self, registry: BugRegistry, mode: RunMode = RunMode.NORMAL,
                 tracer=None, cmp_observer=None, nest_limit: int = DEFAULT_NEST_LIMIT):
        self.registry = registry
        self.mode = mode
        self.tracer = tracer
        self.cmp_observer = cmp_observer
        self.ops: Counter[str] = Counter()
        self.nest_limit = nest_limit

    def visit(self, loc: int) -> None:
        """Coverage hook for one instrumentation site (no-op when unfuzzed)."""
        if self.tracer is not None:
            self.tracer.visit(loc)

    def check(self, bug: BugDescriptor, condition: bool, fault: FaultKind | None) -> bool:
        """Canary plus the adjacent faulty line.

        Logs reach/trigger, then manifests the modeled fault, but only in
        detect mode, only for detectable bugs, and only if the trigger
        actually registered (a frozen canary means the fault belongs to an
        earlier bug).  Deliberately adds no coverage edges of its own, so oracle
        structure stays invisible to coverage-guided fuzzers.
        """
        fired = self.registry.log(bug.bug_id, condition)
        if fired and fault is not None and bug.detectable and self.mode is RunMode.DETECT:
            raise ModeledFaultSignal(fault, bug.bug_id)
        return fired

    def compare(self, site: int, expected: bytes, actual: bytes) -> bool:
        """Constant-shape byte comparison with optional progress side channel.

        When the comparison-logging aid is enabled, the length of the common
        prefix is reported to the fuzzer, which treats it as coverage; this
        mimics fuzzers that wrap memory-comparison functions to incrementally
        satisfy magic-value checks.  Disabled (the default), the comparison
        leaks nothing.
        """
        self.ops["compare"] += 1
        prefix = 0
        for ex, ac in zip(expected, actual):
            if ex != ac:
                break
            prefix += 1
        equal = (prefix == len(expected)) & (len(expected) == len(actual))
        if self.cmp_observer is not None:
            self.cmp_observer(site, prefix)
        return equal
