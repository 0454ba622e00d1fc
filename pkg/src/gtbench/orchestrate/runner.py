"""Campaign runner: repeated fuzzing trials with monitored canary reports.

Each trial is self-contained: its own output directory, its own rng seed
(base + trial index), a live per-execution report the target writes, a
cumulative report the harness max-merges into after every execution, and a
monitor polling that cumulative report on a fixed schedule.  Failed trials
are marked invalid with a recorded reason and excluded from statistics but
counted in the campaign header; silent exclusion would bias survival
estimates.
"""

from __future__ import annotations

import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..canary import BugRegistry, CumulativeReport, Mode
from ..fuzz import Campaign
from ..targets import TARGETS, bug_count, make_seed
from .config import CampaignConfig
from .monitor import PollEvent, TrialMonitor
from .records import RecordSet, assemble_trial, write_records
from .triage import replay_triage

log = logging.getLogger(__name__)


@dataclass
class TrialOutcome:
    trial_id: int
    events: list[PollEvent] = field(default_factory=list)
    crash_files: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    error: str | None = None


def _load_trial_seeds(config: CampaignConfig) -> list[bytes]:
    if config.seeds_dir:
        from ..fuzz import load_seeds

        return load_seeds(config.seeds_dir)
    return [make_seed(config.target)]


def run_trial(config: CampaignConfig, trial_id: int, trial_dir: str | Path) -> TrialOutcome:
    """Run one independent trial; never raises (errors mark the trial invalid)."""
    trial_dir = Path(trial_dir)
    try:
        trial_dir.mkdir(parents=True, exist_ok=True)
        seeds = _load_trial_seeds(config)
        live = BugRegistry(bug_count(), Mode.FATAL, trial_dir / "report_live.bin")
        merged = CumulativeReport(bug_count(), trial_dir / "report.bin")
        monitor = TrialMonitor(trial_dir / "report.bin", config.poll_interval_s,
                               config.n_polls)

        start = time.monotonic()
        if config.execs_per_trial is not None:
            def tick(executions: int) -> None:
                monitor.on_execs(executions, config.poll_every_execs)
        else:
            def tick(_executions: int) -> None:
                monitor.on_elapsed(time.monotonic() - start)

        campaign = Campaign(
            config.target, seeds, rng_seed=config.rng_seed + trial_id,
            max_execs=config.execs_per_trial,
            max_seconds=None if config.execs_per_trial is not None else config.duration_s,
            out_dir=trial_dir, cmp_aid=config.cmp_aid,
            registry=live, merge_report=merged, tick=tick,
        )
        result = campaign.run()
        monitor.finish()
        live.close()
        merged.close()
        return TrialOutcome(
            trial_id=trial_id,
            events=monitor.events,
            crash_files=[str(p) for p in result.crash_files],
            stats=result.stats.to_json(),
        )
    except Exception as exc:  # noqa: BLE001 - trial isolation boundary
        log.error("trial %d failed: %s", trial_id, exc)
        return TrialOutcome(trial_id=trial_id,
                            error=f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")


@dataclass
class CampaignOutput:
    records: RecordSet
    out_dir: Path
    trial_stats: dict[int, dict] = field(default_factory=dict)
    triage_partial: bool = False


def run_trials(config: CampaignConfig, out_dir: str | Path) -> CampaignOutput:
    """Run the configured trials, triage crashes, and write the record files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target_bug_ids = sorted(bug.bug_id for bug in TARGETS[config.target].bugs)
    duration = config.effective_duration_s

    jobs = [(config, trial_id, out_dir / f"trial_{trial_id:02d}")
            for trial_id in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_trial_star, jobs))
    else:
        outcomes = [run_trial(*job) for job in jobs]

    records = RecordSet(fuzzer=config.fuzzer, target=config.target,
                        duration_s=duration, poll_interval_s=config.poll_interval_s)
    trial_stats: dict[int, dict] = {}
    triage_partial = False
    for outcome in outcomes:
        if outcome.error is not None:
            records.invalid.append({"trial_id": outcome.trial_id, "reason": outcome.error})
            continue
        trial = assemble_trial(outcome.trial_id, outcome.events, target_bug_ids, duration)
        triage = replay_triage(outcome.crash_files, config.target)
        trial.crashes = [Path(p).name for p in outcome.crash_files]
        trial.detected = triage.detected
        trial.triggered_undetected = triage.triggered_undetected
        trial.unknown_crashes = triage.unknown_crashes
        triage_partial = triage_partial or triage.partial
        records.trials.append(trial)
        trial_stats[outcome.trial_id] = outcome.stats
    write_records(records, out_dir, config_json=config.to_json(),
                  triage_partial=triage_partial)
    return CampaignOutput(records=records, out_dir=out_dir, trial_stats=trial_stats,
                          triage_partial=triage_partial)


def _run_trial_star(job: tuple) -> TrialOutcome:
    return run_trial(*job)
