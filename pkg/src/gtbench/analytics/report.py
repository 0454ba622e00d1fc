"""Directory-level analytics entry point: records in, CSV/SVG artifacts out."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..orchestrate.records import RecordSet, discover_campaign_dirs, load_records
from .tables import (
    bug_count_stats,
    signif_matrix,
    survival_table,
    write_bug_counts_csv,
    write_signif_csv,
)

SURVIVAL_TABLE_CSV = "survival_table.csv"
SIGNIF_MATRIX_CSV = "signif_matrix.csv"
BUG_COUNTS_CSV = "bug_counts.csv"


@dataclass
class AnalysisReport:
    record_sets: list[RecordSet]
    out_dir: Path
    files: list[Path] = field(default_factory=list)
    table_json: dict = field(default_factory=dict)
    bug_counts_json: list[dict] = field(default_factory=list)
    signif_json: list[dict] = field(default_factory=list)


def analyze_records(records_root: str | Path, out_dir: str | Path,
                    plots: bool = False) -> AnalysisReport:
    """Load every campaign under a root and emit the evaluation artifacts."""
    campaign_dirs = discover_campaign_dirs(records_root)
    if not campaign_dirs:
        raise ValueError(f"no campaign records found under {records_root}")
    record_sets = [load_records(d) for d in campaign_dirs]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    table = survival_table(record_sets)
    counts = bug_count_stats(record_sets)
    signif = signif_matrix(record_sets)

    files = []
    table_path = out_dir / SURVIVAL_TABLE_CSV
    table.to_csv(table_path)
    files.append(table_path)
    counts_path = out_dir / BUG_COUNTS_CSV
    write_bug_counts_csv(counts, counts_path)
    files.append(counts_path)
    signif_path = out_dir / SIGNIF_MATRIX_CSV
    write_signif_csv(signif, signif_path)
    files.append(signif_path)
    if plots:
        from .plots import render_survival_plots

        files.extend(render_survival_plots(record_sets, out_dir))

    return AnalysisReport(
        record_sets=record_sets,
        out_dir=out_dir,
        files=files,
        table_json=table.to_json(),
        bug_counts_json=[
            {"fuzzer": c.fuzzer, "mean": c.mean, "stddev": c.stddev, "counts": list(c.counts)}
            for c in counts
        ],
        signif_json=[
            {"target": cell.target, "fuzzer_a": cell.fuzzer_a, "fuzzer_b": cell.fuzzer_b,
             **cell.result.to_json()}
            for cell in signif
        ],
    )
