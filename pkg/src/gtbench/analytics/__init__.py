"""Survival analysis, rank tests, and evaluation tables over campaign records."""

from .ranktest import (
    EXACT_LIMIT,
    METHOD_EXACT,
    METHOD_NORMAL,
    SIGNIFICANCE_LEVEL,
    RankTestResult,
    mwu_test,
)
from .report import AnalysisReport, analyze_records
from .survival import SurvivalCurve, km_estimate
from .tables import (
    BugCountStats,
    SignifCell,
    SurvivalTable,
    bug_count_stats,
    censored_mean,
    signif_matrix,
    survival_table,
    write_bug_counts_csv,
    write_signif_csv,
)

__all__ = [
    "AnalysisReport", "BugCountStats", "EXACT_LIMIT", "METHOD_EXACT",
    "METHOD_NORMAL", "RankTestResult", "SIGNIFICANCE_LEVEL", "SignifCell",
    "SurvivalCurve", "SurvivalTable", "analyze_records", "bug_count_stats",
    "censored_mean", "km_estimate", "mwu_test", "signif_matrix",
    "survival_table", "write_bug_counts_csv", "write_signif_csv",
]
