"""Trial monitor: polls the cumulative canary report and emits first-event ticks.

Per-execution registries reset between runs, so the trial-level view is the
per-bug maximum over executions ("ever nonzero").  The monitor reads the
cumulative report at a fixed interval and records the poll timestamp at which
each counter first becomes nonzero.  Recorded times therefore overestimate
true event times by at most one poll interval, and every recorded time is a
multiple of the interval.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from ..canary import RegistrySnapshot, ReportFormatError, decode_snapshot

log = logging.getLogger(__name__)

REACH = "R"
TRIGGER = "T"


@dataclass(frozen=True)
class PollEvent:
    bug_id: int
    kind: str  # REACH or TRIGGER
    time_s: float


def poll_merge(cumulative: RegistrySnapshot | None, fresh: RegistrySnapshot,
               poll_time: float) -> tuple[RegistrySnapshot, list[PollEvent]]:
    """Fold a fresh snapshot into the cumulative view, emitting new events.

    Counters are max-merged per bug; an event is emitted for every counter
    transitioning 0 -> nonzero.  A reach and a trigger appearing in the same
    poll produce two events at the same timestamp (the poll resolution cannot
    order them further).
    """
    if cumulative is None:
        reached = [0] * fresh.bug_count
        triggered = [0] * fresh.bug_count
        faulty = False
    else:
        if cumulative.bug_count != fresh.bug_count:
            raise ValueError("snapshot sizes differ")
        reached = list(cumulative.reached)
        triggered = list(cumulative.triggered)
        faulty = cumulative.faulty
    events: list[PollEvent] = []
    for bug_id in range(fresh.bug_count):
        if fresh.reached[bug_id] > 0 and reached[bug_id] == 0:
            events.append(PollEvent(bug_id, REACH, poll_time))
        if fresh.triggered[bug_id] > 0 and triggered[bug_id] == 0:
            events.append(PollEvent(bug_id, TRIGGER, poll_time))
        reached[bug_id] = max(reached[bug_id], fresh.reached[bug_id])
        triggered[bug_id] = max(triggered[bug_id], fresh.triggered[bug_id])
    merged = RegistrySnapshot(tuple(reached), tuple(triggered),
                              faulty or fresh.faulty, poll_time)
    return merged, events


class TrialMonitor:
    """Single polling loop over one trial's cumulative report file.

    The poll schedule is driven externally, by wall-clock deadlines
    (:meth:`on_elapsed`) or by execution counts (:meth:`on_execs`);
    :meth:`finish` observes the final trial state at the last tick.
    """

    def __init__(self, report_path: str | Path, poll_interval_s: float, n_polls: int):
        self.report_path = Path(report_path)
        self.poll_interval_s = poll_interval_s
        self.n_polls = n_polls
        self.cumulative: RegistrySnapshot | None = None
        self.events: list[PollEvent] = []
        self._next_tick = 1

    @property
    def duration_s(self) -> float:
        return self.n_polls * self.poll_interval_s

    def poll(self) -> None:
        """Take one scheduled poll now (no-op once the schedule is exhausted)."""
        if self._next_tick > self.n_polls:
            return
        poll_time = self._next_tick * self.poll_interval_s
        self._next_tick += 1
        try:
            data = self.report_path.read_bytes()
            fresh = decode_snapshot(data, timestamp=poll_time)
        except (OSError, ReportFormatError) as exc:
            # A malformed or unreadable report skips one poll; the next one
            # will pick the events up (at a later timestamp).
            log.warning("poll at t=%.1fs skipped: %s", poll_time, exc)
            return
        self.cumulative, new_events = poll_merge(self.cumulative, fresh, poll_time)
        self.events.extend(new_events)

    def on_elapsed(self, elapsed_s: float) -> None:
        """Wall-clock driver: fire the poll whose deadline has passed.

        A poll overdue by more than a full interval counts as missed rather
        than fired retroactively: stamping a late read with a long-past tick
        time would claim events happened earlier than they could have been
        observed.  The read happens at the latest due tick instead.
        """
        due = min(self.n_polls, int(elapsed_s / self.poll_interval_s))
        if due >= self._next_tick:
            self._next_tick = due
            self.poll()

    def on_execs(self, executions: int, poll_every_execs: int) -> None:
        """Execution-count driver: fire the poll whose exec quota is met."""
        due = min(self.n_polls, executions // poll_every_execs)
        if due >= self._next_tick:
            self._next_tick = due
            self.poll()

    def finish(self) -> None:
        """Observe the final trial state at the last scheduled tick."""
        if self._next_tick <= self.n_polls:
            self._next_tick = self.n_polls
            self.poll()
