"""Post-campaign replay triage: from crashing inputs to the *detected* metric.

Crashes saved by a trial are replayed in detect mode against the canaries.
A bug counts as detected only if some crash triggers it *and* the replay
manifests a modeled fault for it. Bugs without a sanitizer-visible symptom
(semantic inconsistencies) stay triggered-but-undetected, and crashes that
trigger no injected bug land in a separate unknown-bug bucket.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..targets import ExitKind, RunMode, run_driver

log = logging.getLogger(__name__)


class TriageError(RuntimeError):
    """Replay infrastructure failed outright (no crash could be processed)."""


@dataclass
class TriageReport:
    detected: set[int] = field(default_factory=set)
    triggered_undetected: set[int] = field(default_factory=set)
    unknown_crashes: list[str] = field(default_factory=list)
    per_crash: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.errors)


def replay_triage(crashes: list[bytes | str | Path], target: str, *,
                  labels: list[str] | None = None) -> TriageReport:
    """Replay crashing inputs in detect mode and classify each bug.

    ``crashes`` may hold raw input bytes or paths to crash files.  Per-crash
    replay failures are recorded and flagged as partial results rather than
    aborting the whole triage.
    """
    report = TriageReport()
    for index, crash in enumerate(crashes):
        label = labels[index] if labels else None
        try:
            if isinstance(crash, (str, Path)):
                label = label or str(crash)
                data = Path(crash).read_bytes()
            else:
                label = label or f"crash-{index}"
                data = crash
            outcome = run_driver(target, data, RunMode.DETECT)
        except OSError as exc:
            log.warning("triage could not replay %s: %s", label, exc)
            report.errors.append(f"{label}: {exc}")
            continue
        triggered = [bug_id for bug_id, count in enumerate(outcome.snapshot.triggered)
                     if count > 0]
        entry = {"crash": label, "triggered": triggered, "detected": None}
        if outcome.exit.kind is ExitKind.MODELED_FAULT:
            report.detected.add(outcome.exit.bug_id)
            entry["detected"] = outcome.exit.bug_id
        elif triggered:
            report.triggered_undetected.update(triggered)
        else:
            # The crash reproduces no injected bug: candidate new bug, kept
            # out of the metrics and reported for manual study.
            report.unknown_crashes.append(label)
        report.per_crash.append(entry)
    report.triggered_undetected -= report.detected
    return report
