"""Right-censored time-to-bug records and their on-disk formats.

One campaign produces ``events.csv`` with schema
``trial_id,bug_id,event{R|T},time_s,censored{0|1}`` (exactly one reach row
and one trigger row per (trial, bug) pair, censored rows carrying the trial
duration), plus ``campaign.json`` (header) and ``triage.json`` (per-trial
detected sets and the unknown-crash inventory).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .monitor import REACH, TRIGGER, PollEvent

EVENTS_CSV = "events.csv"
CAMPAIGN_JSON = "campaign.json"
TRIAGE_JSON = "triage.json"


@dataclass(frozen=True)
class BugTiming:
    """First observation of one event for one bug in one trial."""

    time_s: float
    censored: bool

    @property
    def observed(self) -> bool:
        return not self.censored


@dataclass
class TrialRecord:
    trial_id: int
    reach: dict[int, BugTiming] = field(default_factory=dict)
    trigger: dict[int, BugTiming] = field(default_factory=dict)
    crashes: list[str] = field(default_factory=list)
    detected: set[int] = field(default_factory=set)
    triggered_undetected: set[int] = field(default_factory=set)
    unknown_crashes: list[str] = field(default_factory=list)

    def triggered_bugs(self) -> set[int]:
        return {bug for bug, timing in self.trigger.items() if timing.observed}


@dataclass
class RecordSet:
    """All valid trials of one campaign (one fuzzer configuration, one target)."""

    fuzzer: str
    target: str
    duration_s: float
    poll_interval_s: float
    trials: list[TrialRecord] = field(default_factory=list)
    invalid: list[dict] = field(default_factory=list)

    @property
    def trial_count(self) -> int:
        return len(self.trials)

    def observations(self, bug_id: int, kind: str) -> list[tuple[float, bool]]:
        """(time, observed) pairs for one bug across trials, survival-ready."""
        table = {REACH: "reach", TRIGGER: "trigger"}[kind]
        out = []
        for trial in self.trials:
            timing = getattr(trial, table).get(bug_id)
            if timing is not None:
                out.append((timing.time_s, timing.observed))
        return out

    def bug_ids(self) -> list[int]:
        ids: set[int] = set()
        for trial in self.trials:
            ids.update(trial.reach)
            ids.update(trial.trigger)
        return sorted(ids)


def assemble_trial(trial_id: int, events: list[PollEvent], bug_ids: list[int],
                   duration_s: float) -> TrialRecord:
    """Build a complete trial record: observed first-events, censored otherwise."""
    record = TrialRecord(trial_id)
    first: dict[tuple[int, str], float] = {}
    for event in events:
        key = (event.bug_id, event.kind)
        if key not in first:
            first[key] = event.time_s
    for bug_id in bug_ids:
        reach_t = first.get((bug_id, REACH))
        trig_t = first.get((bug_id, TRIGGER))
        record.reach[bug_id] = (BugTiming(reach_t, False) if reach_t is not None
                                else BugTiming(duration_s, True))
        record.trigger[bug_id] = (BugTiming(trig_t, False) if trig_t is not None
                                  else BugTiming(duration_s, True))
    return record


def write_events_csv(records: RecordSet, path: Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["trial_id", "bug_id", "event", "time_s", "censored"])
        for trial in records.trials:
            for bug_id in sorted(trial.reach):
                for kind, table in ((REACH, trial.reach), (TRIGGER, trial.trigger)):
                    timing = table[bug_id]
                    writer.writerow([trial.trial_id, bug_id, kind,
                                     f"{timing.time_s:g}", 1 if timing.censored else 0])


def write_triage_json(records: RecordSet, path: Path, partial: bool = False) -> None:
    payload = {
        "partial": partial,
        "trials": {
            str(trial.trial_id): {
                "crashes": list(trial.crashes),
                "detected": sorted(trial.detected),
                "triggered_undetected": sorted(trial.triggered_undetected),
                "unknown_crashes": list(trial.unknown_crashes),
            }
            for trial in records.trials
        },
    }
    path.write_text(json.dumps(payload, indent=2))


def write_campaign_json(records: RecordSet, config_json: dict, path: Path) -> None:
    payload = {
        "fuzzer": records.fuzzer,
        "target": records.target,
        "duration_s": records.duration_s,
        "poll_interval_s": records.poll_interval_s,
        "trials": records.trial_count + len(records.invalid),
        "valid_trials": records.trial_count,
        "invalid": records.invalid,
        "config": config_json,
    }
    path.write_text(json.dumps(payload, indent=2))


def write_records(records: RecordSet, out_dir: str | Path, config_json: dict | None = None,
                  triage_partial: bool = False) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_events_csv(records, out_dir / EVENTS_CSV)
    write_triage_json(records, out_dir / TRIAGE_JSON, partial=triage_partial)
    write_campaign_json(records, config_json or {}, out_dir / CAMPAIGN_JSON)
    return out_dir


def load_records(campaign_dir: str | Path) -> RecordSet:
    """Load one campaign directory back into a RecordSet."""
    campaign_dir = Path(campaign_dir)
    header = json.loads((campaign_dir / CAMPAIGN_JSON).read_text())
    records = RecordSet(
        fuzzer=header["fuzzer"],
        target=header["target"],
        duration_s=header["duration_s"],
        poll_interval_s=header["poll_interval_s"],
        invalid=header.get("invalid", []),
    )
    trials: dict[int, TrialRecord] = {}
    with open(campaign_dir / EVENTS_CSV, newline="") as f:
        for row in csv.DictReader(f):
            trial_id = int(row["trial_id"])
            trial = trials.setdefault(trial_id, TrialRecord(trial_id))
            timing = BugTiming(float(row["time_s"]), row["censored"] == "1")
            table = trial.reach if row["event"] == REACH else trial.trigger
            table[int(row["bug_id"])] = timing
    triage_path = campaign_dir / TRIAGE_JSON
    if triage_path.exists():
        triage = json.loads(triage_path.read_text())
        for trial_id_str, info in triage.get("trials", {}).items():
            trial = trials.get(int(trial_id_str))
            if trial is not None:
                trial.crashes = list(info.get("crashes", []))
                trial.detected = set(info.get("detected", []))
                trial.triggered_undetected = set(info.get("triggered_undetected", []))
                trial.unknown_crashes = list(info.get("unknown_crashes", []))
    records.trials = [trials[tid] for tid in sorted(trials)]
    return records


def discover_campaign_dirs(records_root: str | Path) -> list[Path]:
    """Find campaign directories (those holding a campaign header) under a root."""
    root = Path(records_root)
    if (root / CAMPAIGN_JSON).exists():
        return [root]
    return sorted(p.parent for p in root.glob(f"**/{CAMPAIGN_JSON}"))
