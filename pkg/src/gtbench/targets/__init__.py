"""Synthetic instrumented target suite: the benchmark workloads.

Each target is a small parser with injected bugs of diverse classes, each
bug annotated by a canary that reports reach/trigger events through the
shared report file.  Bug ids are unique and dense across the whole suite
([0, bug_count)), so one registry sized to the suite covers any target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..canary import BugRegistry, FatalCanary, Mode
from . import chunk_parser, kv_parser
from .base import (
    DEFAULT_NEST_LIMIT,
    DRIVER_FAULT_EXIT_STATUS,
    BugClass,
    BugDescriptor,
    ExecutionOutcome,
    ExitKind,
    ExitStatus,
    FaultKind,
    ModeledFaultSignal,
    PovUnavailableError,
    RunMode,
    TargetContext,
    UnknownTargetError,
)

__all__ = [
    "BugClass",
    "BugDescriptor",
    "BugListing",
    "DEFAULT_NEST_LIMIT",
    "DRIVER_FAULT_EXIT_STATUS",
    "ExecutionOutcome",
    "ExitKind",
    "ExitStatus",
    "FaultKind",
    "ModeledFaultSignal",
    "PovUnavailableError",
    "RunMode",
    "TARGETS",
    "UnknownTargetError",
    "bug_by_id",
    "bug_by_name",
    "bug_count",
    "bug_density",
    "catalog",
    "list_bugs",
    "make_seed",
    "pov",
    "run_driver",
    "suite_bugs",
    "target_names",
]


@dataclass(frozen=True)
class TargetSpec:
    name: str
    parse: Callable[[bytes, TargetContext], None]
    bugs: tuple[BugDescriptor, ...]
    make_seed: Callable[[], bytes]
    povs: dict[int, Callable[[], bytes]]


TARGETS: dict[str, TargetSpec] = {
    chunk_parser.TARGET: TargetSpec(
        chunk_parser.TARGET, chunk_parser.parse, tuple(chunk_parser.BUGS),
        chunk_parser.make_seed, chunk_parser.POVS,
    ),
    kv_parser.TARGET: TargetSpec(
        kv_parser.TARGET, kv_parser.parse, tuple(kv_parser.BUGS),
        kv_parser.make_seed, kv_parser.POVS,
    ),
}

SUITE_BUGS: tuple[BugDescriptor, ...] = tuple(
    bug for spec in TARGETS.values() for bug in spec.bugs
)

_BY_ID = {bug.bug_id: bug for bug in SUITE_BUGS}
_BY_NAME = {bug.name: bug for bug in SUITE_BUGS}


def target_names() -> list[str]:
    return list(TARGETS)


def suite_bugs() -> tuple[BugDescriptor, ...]:
    return SUITE_BUGS


def bug_count() -> int:
    return len(SUITE_BUGS)


def bug_by_id(bug_id: int) -> BugDescriptor:
    try:
        return _BY_ID[bug_id]
    except KeyError:
        raise UnknownTargetError(f"no bug with id {bug_id}") from None


def bug_by_name(name: str) -> BugDescriptor:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise UnknownTargetError(f"no bug named {name!r}") from None


def _get_target(name: str) -> TargetSpec:
    try:
        return TARGETS[name]
    except KeyError:
        raise UnknownTargetError(
            f"unknown target {name!r}; available: {', '.join(TARGETS)}"
        ) from None


def make_seed(target: str) -> bytes:
    return _get_target(target).make_seed()


def run_driver(target: str, data: bytes, mode: RunMode = RunMode.NORMAL, *,
               registry: BugRegistry | None = None, tracer=None,
               cmp_observer=None, nest_limit: int = DEFAULT_NEST_LIMIT) -> ExecutionOutcome:
    """Drive one input through a target and report the outcome.

    A caller-supplied registry is used as-is (the fuzzer's persistent mode
    resets and reuses one registry across executions); otherwise a fresh
    in-memory registry sized to the suite is created.  run_driver is a pure
    function of (target, input, mode): identical runs yield identical
    outcomes.
    """
    spec = _get_target(target)
    if registry is None:
        registry = BugRegistry(bug_count(),
                               Mode.FATAL if mode is RunMode.FATAL else Mode.NORMAL)
    ctx = TargetContext(registry, mode, tracer=tracer, cmp_observer=cmp_observer,
                        nest_limit=nest_limit)
    try:
        spec.parse(data, ctx)
    except FatalCanary as fatal:
        exit_status = ExitStatus.fatal(fatal.bug_id)
    except ModeledFaultSignal as fault:
        exit_status = ExitStatus.modeled_fault(fault.kind, fault.bug_id)
    else:
        exit_status = ExitStatus.clean()
    return ExecutionOutcome(exit_status, registry.snapshot(), dict(ctx.ops))


def bug_density(n_bugs: int, n_targets: int) -> float:
    """Mean number of injected bugs per benchmark workload."""
    if n_targets < 1:
        raise ValueError("bug density needs at least one target")
    return n_bugs / n_targets


@dataclass(frozen=True)
class BugListing:
    descriptors: tuple[BugDescriptor, ...]
    target_count: int

    @property
    def bug_count(self) -> int:
        return len(self.descriptors)

    @property
    def density(self) -> float:
        return bug_density(self.bug_count, self.target_count)


def list_bugs(target: str | None = None) -> BugListing:
    """All bug descriptors (optionally for one target) plus a density summary.

    The density always reports the suite-wide mean (total bugs over total
    targets), matching how workload bug density is quoted.
    """
    if target is None:
        descriptors = SUITE_BUGS
    else:
        descriptors = _get_target(target).bugs
    return BugListing(tuple(descriptors), len(TARGETS))


def pov(bug_id: int) -> bytes:
    """Stored proof-of-vulnerability input for a bug.

    Raises PovUnavailableError when the descriptor has no stored reproducer
    (the unverified-bug case).
    """
    bug = bug_by_id(bug_id)
    spec = _get_target(bug.target)
    builder = spec.povs.get(bug_id)
    if not bug.has_pov or builder is None:
        raise PovUnavailableError(f"no proof-of-vulnerability stored for bug {bug_id} ({bug.name})")
    return builder()


def catalog() -> dict:
    """Bug catalog as a JSON-ready document."""
    listing = list_bugs()
    return {
        "targets": [
            {"name": spec.name, "bug_count": len(spec.bugs)} for spec in TARGETS.values()
        ],
        "bugs": [bug.to_json() for bug in listing.descriptors],
        "bug_count": listing.bug_count,
        "target_count": listing.target_count,
        "density": listing.density,
    }
