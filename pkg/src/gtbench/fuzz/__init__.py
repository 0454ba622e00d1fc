"""Baseline coverage-guided mutational fuzzer."""

from .campaign import (
    Campaign,
    CampaignError,
    CampaignResult,
    CampaignStats,
    QueueEntry,
    fuzz_campaign,
    input_sha,
    load_seeds,
)
from .coverage import (
    MAP_SIZE,
    CoverageMap,
    EdgeTracer,
    GlobalCoverage,
    bucket_bit,
    coverage_index,
    is_interesting,
)
from .mutate import (
    ARITH_MAX,
    INTERESTING_8,
    INTERESTING_16,
    INTERESTING_32,
    Arith,
    BitFlip,
    ByteFlip,
    Havoc,
    Interesting,
    Splice,
    deterministic_stages,
    havoc,
    mutate,
    splice,
)

__all__ = [
    "ARITH_MAX", "Arith", "BitFlip", "ByteFlip", "Campaign", "CampaignError",
    "CampaignResult", "CampaignStats", "CoverageMap", "EdgeTracer",
    "GlobalCoverage", "Havoc", "INTERESTING_16", "INTERESTING_32",
    "INTERESTING_8", "Interesting", "MAP_SIZE", "QueueEntry", "Splice",
    "bucket_bit", "coverage_index", "deterministic_stages", "fuzz_campaign",
    "havoc", "input_sha", "is_interesting", "load_seeds", "mutate", "splice",
]
