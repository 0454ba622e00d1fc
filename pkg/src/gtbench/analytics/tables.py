"""Summary tables over campaign records.

Mean survival times follow the censored-as-duration convention: a bug never
found in a trial contributes the full trial duration to its mean, so a bug
untriggered everywhere reports a mean equal to the trial length.  Rows sort
by difficulty (ascending cross-fuzzer mean trigger time), and the best
fuzzer per cell is marked unless the best value is tied at the table's
display precision.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from ..orchestrate.monitor import REACH, TRIGGER
from ..orchestrate.records import RecordSet
from .ranktest import RankTestResult, mwu_test

#: Display precision (decimals of a second) used for tie detection.
DISPLAY_DECIMALS = 2


def _bug_name(bug_id: int) -> str:
    from ..targets import bug_by_id

    try:
        return bug_by_id(bug_id).name
    except Exception:
        return f"bug-{bug_id}"


def _bug_target(bug_id: int) -> str:
    from ..targets import bug_by_id

    try:
        return bug_by_id(bug_id).target
    except Exception:
        return "unknown"


def censored_mean(observations: list[tuple[float, bool]]) -> float:
    """Mean time with censored observations contributing their full duration.

    Observation times already carry the trial duration for censored entries,
    so this is a plain arithmetic mean over all trials.
    """
    if not observations:
        raise ValueError("mean of zero observations")
    return sum(t for t, _ in observations) / len(observations)


@dataclass
class TableCell:
    mean_reach: float | None = None
    mean_trigger: float | None = None
    best_reach: bool = False
    best_trigger: bool = False


@dataclass
class TableRow:
    bug_id: int
    bug_name: str
    target: str
    cells: dict[str, TableCell] = field(default_factory=dict)
    mean_reach: float | None = None
    mean_trigger: float | None = None


@dataclass
class SurvivalTable:
    fuzzers: list[str]
    duration_s: float
    rows: list[TableRow] = field(default_factory=list)

    def row(self, bug_id: int) -> TableRow:
        for row in self.rows:
            if row.bug_id == bug_id:
                return row
        raise KeyError(bug_id)

    def to_csv(self, path: str | Path) -> None:
        header = ["bug_id", "bug_name", "target"]
        for fuzzer in self.fuzzers:
            header += [f"{fuzzer}_mean_reach_s", f"{fuzzer}_mean_trigger_s",
                       f"{fuzzer}_best_reach", f"{fuzzer}_best_trigger"]
        header += ["mean_reach_s", "mean_trigger_s"]
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in self.rows:
                out = [row.bug_id, row.bug_name, row.target]
                for fuzzer in self.fuzzers:
                    cell = row.cells.get(fuzzer)
                    if cell is None or cell.mean_reach is None:
                        out += ["", "", "", ""]
                    else:
                        out += [f"{cell.mean_reach:.{DISPLAY_DECIMALS}f}",
                                f"{cell.mean_trigger:.{DISPLAY_DECIMALS}f}",
                                int(cell.best_reach), int(cell.best_trigger)]
                out += [f"{row.mean_reach:.{DISPLAY_DECIMALS}f}",
                        f"{row.mean_trigger:.{DISPLAY_DECIMALS}f}"]
                writer.writerow(out)

    def to_json(self) -> dict:
        return {
            "fuzzers": self.fuzzers,
            "duration_s": self.duration_s,
            "rows": [
                {
                    "bug_id": row.bug_id,
                    "bug_name": row.bug_name,
                    "target": row.target,
                    "mean_reach_s": row.mean_reach,
                    "mean_trigger_s": row.mean_trigger,
                    "cells": {
                        fz: {
                            "mean_reach_s": cell.mean_reach,
                            "mean_trigger_s": cell.mean_trigger,
                            "best_reach": cell.best_reach,
                            "best_trigger": cell.best_trigger,
                        }
                        for fz, cell in row.cells.items()
                    },
                }
                for row in self.rows
            ],
        }


def _mark_best(rows: list[TableRow], metric: str) -> None:
    """Flag the single best fuzzer per row; ties at display precision get none."""
    for row in rows:
        means = {fz: getattr(cell, metric) for fz, cell in row.cells.items()
                 if getattr(cell, metric) is not None}
        if len(means) < 2:
            continue
        rounded = {fz: round(m, DISPLAY_DECIMALS) for fz, m in means.items()}
        best_value = min(rounded.values())
        winners = [fz for fz, m in rounded.items() if m == best_value]
        if len(winners) == 1:
            setattr(row.cells[winners[0]], "best_reach" if metric == "mean_reach"
                    else "best_trigger", True)


def survival_table(record_sets: list[RecordSet]) -> SurvivalTable:
    """Per-(fuzzer, bug) mean reach/trigger times with difficulty ordering."""
    if not record_sets:
        raise ValueError("survival_table requires at least one record set")
    durations = {rs.duration_s for rs in record_sets}
    if len(durations) != 1:
        raise ValueError(f"record sets mix trial durations: {sorted(durations)}")
    duration = durations.pop()

    fuzzers = list(dict.fromkeys(rs.fuzzer for rs in record_sets))
    bug_ids = sorted({bug for rs in record_sets for bug in rs.bug_ids()})
    rows = []
    for bug_id in bug_ids:
        row = TableRow(bug_id, _bug_name(bug_id), _bug_target(bug_id))
        all_reach: list[tuple[float, bool]] = []
        all_trigger: list[tuple[float, bool]] = []
        for rs in record_sets:
            reach_obs = rs.observations(bug_id, REACH)
            trigger_obs = rs.observations(bug_id, TRIGGER)
            if not reach_obs:
                continue
            cell = row.cells.setdefault(rs.fuzzer, TableCell())
            cell.mean_reach = censored_mean(reach_obs)
            cell.mean_trigger = censored_mean(trigger_obs)
            all_reach += reach_obs
            all_trigger += trigger_obs
        row.mean_reach = censored_mean(all_reach)
        row.mean_trigger = censored_mean(all_trigger)
        rows.append(row)
    _mark_best(rows, "mean_reach")
    _mark_best(rows, "mean_trigger")
    rows.sort(key=lambda row: (row.mean_trigger, row.mean_reach, row.bug_id))
    return SurvivalTable(fuzzers=fuzzers, duration_s=duration, rows=rows)


@dataclass(frozen=True)
class BugCountStats:
    fuzzer: str
    counts: tuple[int, ...]
    mean: float
    stddev: float


def bug_count_stats(record_sets: list[RecordSet]) -> list[BugCountStats]:
    """Per-fuzzer mean and sample standard deviation of distinct triggered bugs."""
    out = []
    for rs in record_sets:
        if not rs.trials:
            raise ValueError(f"fuzzer {rs.fuzzer!r} has no valid trials")
        counts = tuple(len(trial.triggered_bugs()) for trial in rs.trials)
        mean = sum(counts) / len(counts)
        stddev = statistics.stdev(counts) if len(counts) > 1 else 0.0
        out.append(BugCountStats(rs.fuzzer, counts, mean, stddev))
    return out


def write_bug_counts_csv(stats: list[BugCountStats], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["fuzzer", "trials", "mean_bugs", "stddev", "counts"])
        for entry in stats:
            writer.writerow([entry.fuzzer, len(entry.counts), f"{entry.mean:.4f}",
                             f"{entry.stddev:.4f}", " ".join(map(str, entry.counts))])


@dataclass(frozen=True)
class SignifCell:
    target: str
    fuzzer_a: str
    fuzzer_b: str
    result: RankTestResult


def signif_matrix(record_sets: list[RecordSet]) -> list[SignifCell]:
    """Pairwise fuzzer significance per target, on per-trial bug counts.

    Identical sample pairs carry the explicit identical marker (white cells);
    everything else reports the two-sided p-value against the 0.05 threshold.
    """
    cells = []
    by_target: dict[str, list[RecordSet]] = {}
    for rs in record_sets:
        by_target.setdefault(rs.target, []).append(rs)
    for target in sorted(by_target):
        sets = by_target[target]
        for i, rs_a in enumerate(sets):
            for rs_b in sets[i + 1:]:
                counts_a = [len(t.triggered_bugs()) for t in rs_a.trials]
                counts_b = [len(t.triggered_bugs()) for t in rs_b.trials]
                result = mwu_test(counts_a, counts_b)
                cells.append(SignifCell(target, rs_a.fuzzer, rs_b.fuzzer, result))
    return cells


def write_signif_csv(cells: list[SignifCell], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["target", "fuzzer_a", "fuzzer_b", "u", "p_value",
                         "method", "identical", "significant"])
        for cell in cells:
            r = cell.result
            writer.writerow([cell.target, cell.fuzzer_a, cell.fuzzer_b,
                             f"{r.u:g}", f"{r.p_value:.6g}", r.method,
                             int(r.identical), int(r.significant)])
