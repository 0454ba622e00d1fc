"""Baseline coverage-guided fuzzing campaign.

One single-threaded loop: seeds bootstrap the queue, queue entries get a
deterministic mutation pass followed by havoc/splice rounds, the target runs
in-process in fatal-canary mode, inputs with novel coverage join the queue
and abnormal exits are saved as crashes.  Campaigns are reproducible from
the rng seed when budgeted by execution count (wall-clock budgets introduce
scheduling nondeterminism by nature).
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..canary import BugRegistry, CumulativeReport, Mode
from ..targets import DEFAULT_NEST_LIMIT, ExitKind, RunMode, bug_by_id, bug_count, run_driver
from .coverage import CoverageMap, EdgeTracer, GlobalCoverage, is_interesting
from .mutate import Havoc, Splice, deterministic_stages, mutate

import random

log = logging.getLogger(__name__)

#: Havoc mutants generated per queue-entry visit.
HAVOC_ROUNDS = 96

#: Fraction of havoc rounds that start from a spliced pair once possible.
SPLICE_PROB = 0.2


class CampaignError(RuntimeError):
    """Execution-infrastructure failure, distinct from target crashes."""


@dataclass
class QueueEntry:
    entry_id: int
    data: bytes
    discovery_time: float
    signature: frozenset[tuple[int, int]]
    favored: bool = False
    det_done: bool = False


@dataclass
class CampaignStats:
    executions: int = 0
    crash_events: int = 0
    unique_crashes: int = 0
    queue_size: int = 0
    edges: int = 0
    runtime_s: float = 0.0

    @property
    def execs_per_sec(self) -> float:
        return self.executions / self.runtime_s if self.runtime_s > 0 else 0.0

    def to_json(self) -> dict:
        return {
            "executions": self.executions,
            "execs_per_sec": round(self.execs_per_sec, 2),
            "queue_size": self.queue_size,
            "crash_count": self.unique_crashes,
            "crash_events": self.crash_events,
            "edges": self.edges,
            "runtime_s": round(self.runtime_s, 3),
        }


@dataclass
class CampaignResult:
    queue: list[QueueEntry]
    crashes: dict[int, bytes]  # first crashing input per bug id
    stats: CampaignStats
    out_dir: Path | None = None
    crash_files: list[Path] = field(default_factory=list)


class _BudgetExhausted(Exception):
    pass


class Campaign:
    """One fuzzing trial against one target.

    ``registry`` may be supplied by an orchestrator (e.g. file-backed at the
    path a monitor polls); it must be in fatal mode and is reset before every
    execution.  ``merge_report`` receives a max-merge of each execution's
    final counters, giving the trial-cumulative view a monitor polls.
    ``tick`` fires after every execution with the running execution count,
    which is where the orchestrator hangs its poll schedule.
    """

    def __init__(self, target: str, seeds: list[bytes], rng_seed: int, *,
                 max_execs: int | None = None, max_seconds: float | None = None,
                 out_dir: str | Path | None = None, cmp_aid: bool = False,
                 registry: BugRegistry | None = None,
                 merge_report: CumulativeReport | None = None,
                 tick: Callable[[int], None] | None = None,
                 havoc_rounds: int = HAVOC_ROUNDS,
                 nest_limit: int = DEFAULT_NEST_LIMIT):
        if not seeds:
            raise CampaignError("at least one seed input is required")
        if max_execs is None and max_seconds is None:
            raise CampaignError("a budget is required: max_execs or max_seconds")
        self.target = target
        self.seeds = list(seeds)
        self.rng = random.Random(rng_seed)
        self.rng_seed = rng_seed
        self.max_execs = max_execs
        self.max_seconds = max_seconds
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.cmp_aid = cmp_aid
        self.registry = registry or BugRegistry(bug_count(), Mode.FATAL)
        self.merge_report = merge_report
        self.tick = tick
        self.havoc_rounds = havoc_rounds
        self.nest_limit = nest_limit

        self.map = CoverageMap()
        self.tracer = EdgeTracer(self.map, cmp_aid=cmp_aid)
        self.global_cov = GlobalCoverage()
        self.queue: list[QueueEntry] = []
        self.crashes: dict[int, bytes] = {}
        self.stats = CampaignStats()
        # smallest input per covered edge; its values form the favored set
        self._top_rated: dict[int, QueueEntry] = {}
        self._start = 0.0

    # -- execution ---------------------------------------------------------

    def _budget_left(self) -> bool:
        if self.max_execs is not None and self.stats.executions >= self.max_execs:
            return False
        if self.max_seconds is not None and time.monotonic() - self._start >= self.max_seconds:
            return False
        return True

    def _execute(self, data: bytes) -> tuple[bool, bool]:
        """Run one input. Returns (crashed, interesting)."""
        if not self._budget_left():
            raise _BudgetExhausted
        self.registry.reset()
        self.map.reset()
        self.tracer.reset()
        outcome = run_driver(self.target, data, RunMode.FATAL, registry=self.registry,
                             tracer=self.tracer,
                             cmp_observer=self.tracer.note_cmp if self.cmp_aid else None,
                             nest_limit=self.nest_limit)
        self.stats.executions += 1
        if self.merge_report is not None:
            self.merge_report.absorb(self.registry)
        if self.tick is not None:
            self.tick(self.stats.executions)
        crashed = outcome.exit.kind is not ExitKind.CLEAN
        if crashed:
            self.stats.crash_events += 1
            bug_id = outcome.exit.bug_id
            if bug_id is not None and bug_id not in self.crashes:
                self.crashes[bug_id] = data
                self.stats.unique_crashes += 1
        interesting = is_interesting(self.map, self.global_cov)
        return crashed, interesting

    def _add_to_queue(self, data: bytes) -> QueueEntry:
        entry = QueueEntry(
            entry_id=len(self.queue),
            data=data,
            discovery_time=time.monotonic() - self._start,
            signature=self.map.signature(),
        )
        self.queue.append(entry)
        for index, _cls in entry.signature:
            best = self._top_rated.get(index)
            if best is None or len(data) < len(best.data):
                self._top_rated[index] = entry
        return entry

    def _refresh_favored(self) -> None:
        favored_ids = {entry.entry_id for entry in self._top_rated.values()}
        for entry in self.queue:
            entry.favored = entry.entry_id in favored_ids

    def _cycle_order(self) -> list[QueueEntry]:
        self._refresh_favored()
        favored = [e for e in self.queue if e.favored]
        rest = [e for e in self.queue if not e.favored]
        return favored + rest

    # -- main loop ----------------------------------------------------------

    def run(self) -> CampaignResult:
        self._start = time.monotonic()
        try:
            for seed in self.seeds:
                crashed, _ = self._execute(seed)
                if crashed:
                    log.warning("seed input crashes the target; queued anyway")
                # Seeds always join the queue so mutation has raw material
                # even when every seed is abnormal.
                self._add_to_queue(seed)
            while True:
                for entry in self._cycle_order():
                    if not entry.det_done:
                        for _stage, mutant in deterministic_stages(entry.data):
                            self._step(mutant)
                        entry.det_done = True
                    for _ in range(self.havoc_rounds):
                        base = entry.data
                        if len(self.queue) > 1 and self.rng.random() < SPLICE_PROB:
                            other = self.queue[self.rng.randrange(len(self.queue))]
                            base = mutate(base, self.rng, Splice(other.data))
                        n_ops = 1 << self.rng.randint(1, 6)
                        mutant = mutate(base, self.rng, Havoc(n_ops))
                        self._step(mutant)
        except _BudgetExhausted:
            pass
        self.stats.runtime_s = time.monotonic() - self._start
        self.stats.queue_size = len(self.queue)
        self.stats.edges = self.global_cov.edge_count
        self._refresh_favored()
        result = CampaignResult(self.queue, dict(self.crashes), self.stats)
        if self.out_dir is not None:
            result.out_dir, result.crash_files = self._write_output()
        return result

    def _step(self, mutant: bytes) -> None:
        crashed, interesting = self._execute(mutant)
        if not crashed and interesting:
            self._add_to_queue(mutant)

    # -- output -------------------------------------------------------------

    def _write_output(self) -> tuple[Path, list[Path]]:
        out = self.out_dir
        queue_dir = out / "queue"
        crash_dir = out / "crashes"
        queue_dir.mkdir(parents=True, exist_ok=True)
        crash_dir.mkdir(parents=True, exist_ok=True)
        for entry in self.queue:
            (queue_dir / f"id_{entry.entry_id:06d}.bin").write_bytes(entry.data)
        crash_files = []
        for bug_id in sorted(self.crashes):
            name = bug_by_id(bug_id).name
            path = crash_dir / f"crash_{bug_id:03d}_{name}.bin"
            path.write_bytes(self.crashes[bug_id])
            crash_files.append(path)
        (out / "stats.json").write_text(json.dumps({
            "target": self.target,
            "rng_seed": self.rng_seed,
            **self.stats.to_json(),
        }, indent=2))
        return out, crash_files


def fuzz_campaign(target: str, seeds: list[bytes], rng_seed: int, *,
                  max_execs: int | None = None, max_seconds: float | None = None,
                  out_dir: str | Path | None = None, cmp_aid: bool = False,
                  **kwargs) -> CampaignResult:
    """Run one campaign and return {queue, crashes, stats}."""
    return Campaign(target, seeds, rng_seed, max_execs=max_execs,
                    max_seconds=max_seconds, out_dir=out_dir, cmp_aid=cmp_aid,
                    **kwargs).run()


def load_seeds(seeds_dir: str | Path) -> list[bytes]:
    """Read seed files from a directory, sorted by name for reproducibility."""
    seeds_dir = Path(seeds_dir)
    if not seeds_dir.is_dir():
        raise CampaignError(f"seeds directory {seeds_dir} does not exist")
    seeds = [path.read_bytes() for path in sorted(seeds_dir.iterdir()) if path.is_file()]
    if not seeds:
        raise CampaignError(f"seeds directory {seeds_dir} is empty")
    return seeds


def input_sha(data: bytes) -> str:
    return hashlib.sha1(data).hexdigest()[:16]
