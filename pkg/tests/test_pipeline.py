"""End-to-end comparison workflow: two fuzzer configurations, one report."""

import csv

import pytest

from gtbench.analytics import analyze_records
from gtbench.orchestrate import CampaignConfig, run_trials


@pytest.fixture(scope="module")
def two_fuzzer_records(tmp_path_factory):
    root = tmp_path_factory.mktemp("records")
    for label, cmp_aid, seed in (("baseline", False, 1), ("cmp-aided", True, 2)):
        config = CampaignConfig(target="chunk-parser", trials=3, rng_seed=seed,
                                poll_interval_s=5.0, execs_per_trial=4000,
                                poll_every_execs=1000, fuzzer=label, cmp_aid=cmp_aid)
        run_trials(config, root / label)
    return root


def test_analysis_over_two_fuzzers(two_fuzzer_records, tmp_path):
    report = analyze_records(two_fuzzer_records, tmp_path / "analysis", plots=True)
    assert len(report.record_sets) == 2

    with open(tmp_path / "analysis" / "survival_table.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert rows
    for fuzzer in ("baseline", "cmp-aided"):
        assert f"{fuzzer}_mean_trigger_s" in rows[0]
    # rows sorted by cross-fuzzer mean trigger time
    means = [float(row["mean_trigger_s"]) for row in rows]
    assert means == sorted(means)

    with open(tmp_path / "analysis" / "signif_matrix.csv", newline="") as f:
        cells = list(csv.DictReader(f))
    assert len(cells) == 1
    assert {cells[0]["fuzzer_a"], cells[0]["fuzzer_b"]} == {"baseline", "cmp-aided"}
    assert 0.0 < float(cells[0]["p_value"]) <= 1.0

    with open(tmp_path / "analysis" / "bug_counts.csv", newline="") as f:
        counts = {row["fuzzer"]: row for row in csv.DictReader(f)}
    assert set(counts) == {"baseline", "cmp-aided"}
    # several shallow bugs fall inside even this tiny budget's walking flips
    assert float(counts["baseline"]["mean_bugs"]) >= 3

    svgs = list((tmp_path / "analysis").glob("survival_*.svg"))
    assert len(svgs) == 7  # one per chunk-parser bug


def test_flat_survival_curve_for_guarded_bug(two_fuzzer_records, tmp_path):
    """The checksum-guarded division bug survives every desk trial: S = 1."""
    from gtbench.analytics import km_estimate
    from gtbench.orchestrate import TRIGGER, load_records

    for label in ("baseline", "cmp-aided"):
        records = load_records(two_fuzzer_records / label)
        observations = records.observations(0, TRIGGER)
        assert observations and all(not observed for _, observed in observations)
        curve = km_estimate(observations)
        assert curve.times == []
        assert curve.survival_at(records.duration_s) == 1.0
