"""gtbench: a self-contained ground-truth fuzzing benchmark harness.

Instrumented synthetic targets report reached/triggered bug events through
bit-exact canary report files; a baseline greybox fuzzer drives campaigns; a
monitor/orchestrator records right-censored time-to-bug data; and an
analytics toolkit turns the records into Kaplan-Meier survival curves,
Mann-Whitney significance matrices, and PCA workload-diversity views.
"""

__version__ = "0.1.0"

from .canary import (
    FATAL_EXIT_STATUS,
    BugRegistry,
    CumulativeReport,
    FatalCanary,
    Mode,
    RegistrySnapshot,
    ReportFormatError,
    and_nb,
    decode_snapshot,
    encode_snapshot,
    or_nb,
    registry_init,
    snapshot,
)
from .targets import (
    BugClass,
    BugDescriptor,
    ExecutionOutcome,
    ExitKind,
    FaultKind,
    PovUnavailableError,
    RunMode,
    UnknownTargetError,
    catalog,
    list_bugs,
    make_seed,
    pov,
    run_driver,
)

__all__ = [
    "BugClass", "BugDescriptor", "BugRegistry", "CumulativeReport",
    "ExecutionOutcome", "ExitKind", "FATAL_EXIT_STATUS", "FatalCanary",
    "FaultKind", "Mode", "PovUnavailableError", "RegistrySnapshot",
    "ReportFormatError", "RunMode", "UnknownTargetError", "and_nb", "catalog",
    "decode_snapshot", "encode_snapshot", "list_bugs", "make_seed", "or_nb",
    "pov", "registry_init", "run_driver", "snapshot", "__version__",
]
