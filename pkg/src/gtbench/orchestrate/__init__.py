"""Campaign orchestration: repeated monitored trials and replay triage."""

from .config import CampaignConfig, ConfigError, DEFAULT_POLL_INTERVAL_S
from .monitor import REACH, TRIGGER, PollEvent, TrialMonitor, poll_merge
from .records import (
    BugTiming,
    RecordSet,
    TrialRecord,
    assemble_trial,
    discover_campaign_dirs,
    load_records,
    write_records,
)
from .runner import CampaignOutput, TrialOutcome, run_trial, run_trials
from .triage import TriageError, TriageReport, replay_triage

__all__ = [
    "BugTiming", "CampaignConfig", "CampaignOutput", "ConfigError",
    "DEFAULT_POLL_INTERVAL_S", "PollEvent", "REACH", "RecordSet", "TRIGGER",
    "TriageError", "TriageReport", "TrialMonitor", "TrialOutcome",
    "TrialRecord", "assemble_trial", "discover_campaign_dirs", "load_records",
    "poll_merge", "replay_triage", "run_trial", "run_trials", "write_records",
]
