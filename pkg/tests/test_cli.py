"""CLI surface: every documented subcommand, driven through the click runner."""

import base64
import json

import pytest
from click.testing import CliRunner

from gtbench.canary import FATAL_EXIT_STATUS
from gtbench.cli import main
from gtbench.targets import DRIVER_FAULT_EXIT_STATUS, make_seed, pov


@pytest.fixture
def runner():
    return CliRunner()


def test_bugs_listing(runner):
    result = runner.invoke(main, ["bugs"])
    assert result.exit_code == 0, result.output
    assert "density" in result.output
    assert "cp-row-factor-div-zero" in result.output


def test_bugs_json(runner):
    result = runner.invoke(main, ["bugs", "--json", "--target", "kv-parser"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert all(bug["target"] == "kv-parser" for bug in doc["bugs"])


def test_seed_and_target_driver(runner, tmp_path):
    seed_path = tmp_path / "seed.bin"
    result = runner.invoke(main, ["seed", "--target", "chunk-parser", "--out", str(seed_path)])
    assert result.exit_code == 0, result.output
    assert seed_path.read_bytes() == make_seed("chunk-parser")

    result = runner.invoke(main, ["target", "chunk-parser", str(seed_path),
                                  "--report", str(tmp_path / "r.bin")])
    assert result.exit_code == 0, result.output
    assert "clean exit" in result.output


def test_target_driver_exit_codes(runner, tmp_path):
    pov_path = tmp_path / "pov.bin"
    pov_path.write_bytes(pov(0))
    result = runner.invoke(main, ["target", "chunk-parser", str(pov_path), "--mode", "fatal"])
    assert result.exit_code == FATAL_EXIT_STATUS
    result = runner.invoke(main, ["target", "chunk-parser", str(pov_path), "--mode", "detect"])
    assert result.exit_code == DRIVER_FAULT_EXIT_STATUS
    result = runner.invoke(main, ["target", "chunk-parser", str(pov_path)])
    assert result.exit_code == 0


def test_pov_command(runner, tmp_path):
    out = tmp_path / "pov.bin"
    result = runner.invoke(main, ["pov", "3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == pov(3)
    result = runner.invoke(main, ["pov", "3"])
    assert base64.b64decode(result.output.strip()) == pov(3)
    result = runner.invoke(main, ["pov", "11"])
    assert result.exit_code != 0  # unverified bug: explicit error


def test_fuzz_command(runner, tmp_path, seeds_dir):
    out = tmp_path / "fuzz-out"
    result = runner.invoke(main, ["fuzz", "--target", "chunk-parser",
                                  "--seeds", str(seeds_dir), "--execs", "1500",
                                  "--rng-seed", "4", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "executions=1500" in result.output
    assert (out / "stats.json").exists()


def test_fuzz_budget_flags_are_exclusive(runner, seeds_dir, tmp_path):
    result = runner.invoke(main, ["fuzz", "--target", "chunk-parser",
                                  "--seeds", str(seeds_dir), "--out", str(tmp_path / "o")])
    assert result.exit_code != 0
    result = runner.invoke(main, ["fuzz", "--target", "chunk-parser",
                                  "--seeds", str(seeds_dir), "--out", str(tmp_path / "o"),
                                  "--execs", "10", "--duration", "1"])
    assert result.exit_code != 0


def test_run_analyze_pipeline(runner, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(
        "target = kv-parser\n"
        "trials = 2\n"
        "poll_interval_s = 5\n"
        "execs_per_trial = 2000\n"
        "poll_every_execs = 1000\n"
        "rng_seed = 31\n"
    )
    camp = tmp_path / "camp"
    result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(camp)])
    assert result.exit_code == 0, result.output
    assert "valid trials: 2" in result.output
    assert (camp / "events.csv").exists()

    analysis = tmp_path / "analysis"
    result = runner.invoke(main, ["analyze", "--records", str(camp),
                                  "--out", str(analysis)])
    assert result.exit_code == 0, result.output
    assert (analysis / "survival_table.csv").exists()
    assert (analysis / "signif_matrix.csv").exists()
    assert (analysis / "bug_counts.csv").exists()


def test_run_rejects_bad_config(runner, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("target = kv-parser\ntrials = 0\n")
    result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert result.exit_code != 0
    assert "bad config" in result.output


def test_profile_then_pca(runner, tmp_path, seeds_dir, kv_seeds_dir):
    profiles = tmp_path / "profiles"
    for target, seeds in (("chunk-parser", seeds_dir), ("kv-parser", kv_seeds_dir)):
        result = runner.invoke(main, ["profile", "--target", target,
                                      "--seeds", str(seeds), "--out", str(profiles)])
        assert result.exit_code == 0, result.output
    out = tmp_path / "pca-out"
    result = runner.invoke(main, ["pca", "--profiles", str(profiles), "--k", "1",
                                  "--out", str(out), "--pairs", "1,1"])
    assert result.exit_code == 0, result.output
    assert (out / "scores.csv").exists()
    assert (out / "variance.csv").exists()
    assert (out / "scatter_PC1_PC1.svg").exists()


def test_pca_bad_pairs(runner, tmp_path):
    result = runner.invoke(main, ["pca", "--profiles", str(tmp_path), "--k", "1",
                                  "--out", str(tmp_path), "--pairs", "one,two"])
    assert result.exit_code != 0
    assert "bad --pairs" in result.output
