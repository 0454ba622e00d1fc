"""Command-line interface.

Most subcommands are thin clients of the benchmark service: by default they
talk to an in-process instance of the FastAPI app over an ASGI test
transport (no network involved), and ``--server URL`` points them at a
remote instance instead.  The exception is ``gtbench target``, which *is*
the system under test: it runs the instrumented driver directly in this
process so report files, environment variables, and exit codes behave like
a real target binary.
"""

from __future__ import annotations

import base64
import json
import logging
import sys
import time
from pathlib import Path

import click
import httpx

from . import __version__
from .canary import ENV_FATAL, ENV_REPORT_PATH, FATAL_EXIT_STATUS, registry_from_env
from .targets import (
    DEFAULT_NEST_LIMIT,
    DRIVER_FAULT_EXIT_STATUS,
    ExitKind,
    RunMode,
    UnknownTargetError,
    bug_count,
    make_seed,
    run_driver,
    target_names,
)

log = logging.getLogger("gtbench")


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    return local_client()


def local_client() -> httpx.Client:
    """Synchronous client bound to an in-process app instance (no network)."""
    import warnings

    from .service import create_app

    with warnings.catch_warnings():
        # starlette >= 1.3 pre-announces an httpx2-based test client; the
        # httpx-backed one is fully functional here.
        warnings.filterwarnings(
            "ignore", message="Using `httpx` with `starlette.testclient` is deprecated")
        from starlette.testclient import TestClient

        return TestClient(create_app())


def _check(response: httpx.Response) -> dict:
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except Exception:
            detail = response.text
        raise click.ClickException(f"service error {response.status_code}: {detail}")
    return response.json()


def _wait_for_job(client: httpx.Client, job: dict, label: str, quiet: bool = False) -> dict:
    job_id = job["job_id"]
    last_note = time.monotonic()
    while job["state"] in ("pending", "running"):
        time.sleep(0.2)
        job = _check(client.get(f"/jobs/{job_id}"))
        if not quiet and time.monotonic() - last_note > 10:
            click.echo(f"... {label} still running", err=True)
            last_note = time.monotonic()
    if job["state"] == "failed":
        raise click.ClickException(f"{label} failed: {job['error']}")
    return job["result"]


server_option = click.option("--server", default=None, metavar="URL",
                             help="Remote service URL (default: in-process).")


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Ground-truth fuzzing benchmark harness."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("httpx").setLevel(logging.WARNING)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8123, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the benchmark service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command()
@click.argument("target", type=click.Choice(target_names()))
@click.argument("input_file", required=False, type=click.Path(path_type=Path))
@click.option("--mode", type=click.Choice(["normal", "fatal", "detect"]), default="normal",
              show_default=True, help="Execution mode (BENCH_FATAL=1 upgrades normal to fatal).")
@click.option("--report", type=click.Path(path_type=Path), default=None,
              help=f"Canary report file (default: ${ENV_REPORT_PATH}).")
@click.option("--nest-limit", type=int, default=DEFAULT_NEST_LIMIT, show_default=True,
              help="Iteration bound for the recursive-nesting resource bug.")
@click.option("--profile-out", type=click.Path(path_type=Path), default=None,
              help="Write an operation-category profile JSON for this run.")
def target(target: str, input_file: Path | None, mode: str, report: Path | None,
           nest_limit: int, profile_out: Path | None) -> None:
    """Run one instrumented target driver on INPUT_FILE (or stdin).

    Exit status: 0 clean, 77 fatal canary, 99 modeled fault (detect mode).
    """
    import os

    data = input_file.read_bytes() if input_file else sys.stdin.buffer.read()
    run_mode = RunMode(mode)
    if run_mode is RunMode.NORMAL and os.environ.get(ENV_FATAL) == "1":
        run_mode = RunMode.FATAL
    if report is not None:
        os.environ[ENV_REPORT_PATH] = str(report)
    from .canary import Mode

    registry = registry_from_env(bug_count(),
                                 Mode.FATAL if run_mode is RunMode.FATAL else Mode.NORMAL)
    try:
        outcome = run_driver(target, data, run_mode, registry=registry, nest_limit=nest_limit)
    finally:
        registry.flush()
    if profile_out is not None:
        profile_out.write_text(json.dumps({
            "subject": target,
            "seed": input_file.name if input_file else "stdin",
            "family": target,
            "counts": {k: float(v) for k, v in outcome.op_counts.items()},
        }, indent=2))
    registry.close()
    if outcome.exit.kind is ExitKind.FATAL_CANARY:
        click.echo(f"FATAL CANARY: bug {outcome.exit.bug_id} triggered", err=True)
        sys.exit(FATAL_EXIT_STATUS)
    if outcome.exit.kind is ExitKind.MODELED_FAULT:
        click.echo(f"MODELED FAULT: {outcome.exit.fault.value} (bug {outcome.exit.bug_id})",
                   err=True)
        sys.exit(DRIVER_FAULT_EXIT_STATUS)
    triggered = sum(outcome.snapshot.triggered)
    click.echo(f"clean exit; {sum(1 for r in outcome.snapshot.reached if r)} canaries reached, "
               f"{triggered} triggered")


@main.command()
@click.option("--target", "target_name", default=None, help="Limit to one target.")
@click.option("--json", "as_json", is_flag=True, help="Emit the catalog as JSON.")
@server_option
def bugs(target_name: str | None, as_json: bool, server: str | None) -> None:
    """List injected bugs and the suite's bug density."""
    with _client(server) as client:
        params = {"target": target_name} if target_name else {}
        doc = _check(client.get("/catalog", params=params))
    if as_json:
        click.echo(json.dumps(doc, indent=2))
        return
    for bug in doc["bugs"]:
        pov_marker = "pov" if bug["has_pov"] else "no-pov"
        detect_marker = "detectable" if bug["detectable"] else "undetectable"
        click.echo(f"[{bug['id']:2d}] {bug['name']:32s} {bug['class']:24s} "
                   f"{bug['target']:14s} {detect_marker:12s} {pov_marker}")
    click.echo(f"{doc['bug_count']} bugs across {doc['target_count']} targets; "
               f"density {doc['density']:.2f}")


@main.command()
@click.argument("bug_id", type=int)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the input here (default: stdout as base64).")
@server_option
def pov(bug_id: int, out: Path | None, server: str | None) -> None:
    """Fetch the stored proof-of-vulnerability input for a bug."""
    with _client(server) as client:
        doc = _check(client.get(f"/bugs/{bug_id}/pov"))
    data = base64.b64decode(doc["pov_b64"])
    if out is None:
        click.echo(doc["pov_b64"])
    else:
        out.write_bytes(data)
        click.echo(f"wrote {len(data)} bytes for bug {bug_id} ({doc['name']}) to {out}")


@main.command()
@click.option("--target", "target_name", required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def seed(target_name: str, out: Path) -> None:
    """Write the stock valid seed input for a target."""
    try:
        data = make_seed(target_name)
    except UnknownTargetError as exc:
        raise click.ClickException(str(exc)) from exc
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    click.echo(f"wrote {len(data)}-byte seed to {out}")


@main.command()
@click.option("--target", "target_name", required=True)
@click.option("--seeds", "seeds_dir", required=True, type=click.Path(path_type=Path))
@click.option("--duration", "duration_s", type=float, default=None,
              help="Wall-clock budget in seconds.")
@click.option("--execs", type=int, default=None, help="Execution-count budget.")
@click.option("--rng-seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--cmp-aid", is_flag=True, help="Enable the comparison-progress side channel.")
@server_option
def fuzz(target_name: str, seeds_dir: Path, duration_s: float | None, execs: int | None,
         rng_seed: int, out_dir: Path, cmp_aid: bool, server: str | None) -> None:
    """Run one fuzzing campaign against a target."""
    if (duration_s is None) == (execs is None):
        raise click.ClickException("exactly one of --duration or --execs is required")
    with _client(server) as client:
        job = _check(client.post("/fuzz", json={
            "target": target_name, "seeds_dir": str(seeds_dir), "out_dir": str(out_dir),
            "rng_seed": rng_seed, "duration_s": duration_s, "execs": execs,
            "cmp_aid": cmp_aid,
        }))
        result = _wait_for_job(client, job, "fuzz campaign")
    stats = result["stats"]
    click.echo(f"executions={stats['executions']} execs/s={stats['execs_per_sec']} "
               f"queue={stats['queue_size']} crashes={stats['crash_count']}")
    click.echo(f"crash bugs: {result['crash_bugs']}")
    click.echo(f"output: {result['out_dir']}")


@main.command()
@click.option("--config", "config_file", required=True, type=click.Path(path_type=Path),
              help="Flat key=value (or flat JSON) campaign config.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@server_option
def run(config_file: Path, out_dir: Path, server: str | None) -> None:
    """Run a monitored campaign: repeated trials with time-to-bug records."""
    from .orchestrate import CampaignConfig

    try:
        config = CampaignConfig.from_file(config_file)
    except Exception as exc:
        raise click.ClickException(f"bad config: {exc}") from exc
    payload = config.to_json()
    payload["out_dir"] = str(out_dir)
    with _client(server) as client:
        job = _check(client.post("/campaigns", json=payload))
        result = _wait_for_job(client, job, "campaign")
    click.echo(f"valid trials: {result['valid_trials']}  invalid: {result['invalid_trials']}")
    for trial_id, bugs_triggered in sorted(result["triggered_per_trial"].items()):
        detected = result["detected_per_trial"].get(trial_id, [])
        click.echo(f"trial {trial_id}: triggered={bugs_triggered} detected={detected}")
    click.echo(f"records: {result['out_dir']}")


@main.command()
@click.option("--records", "records_dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--plots", is_flag=True, help="Also render per-bug survival SVGs.")
@server_option
def analyze(records_dir: Path, out_dir: Path, plots: bool, server: str | None) -> None:
    """Turn campaign records into survival tables, significance, and plots."""
    with _client(server) as client:
        doc = _check(client.post("/analyze", json={
            "records_dir": str(records_dir), "out_dir": str(out_dir), "plots": plots,
        }))
    for path in doc["files"]:
        click.echo(f"wrote {path}")
    counts = doc["bug_counts"]
    for entry in counts:
        click.echo(f"{entry['fuzzer']}: mean {entry['mean']:.2f} bugs/trial "
                   f"(sd {entry['stddev']:.2f})")


@main.command()
@click.option("--profiles", "profiles_dir", required=True, type=click.Path(path_type=Path))
@click.option("--k", type=int, required=True, help="Number of principal components.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--pairs", default=None, metavar="A,B[;C,D...]",
              help="Component pairs to scatter (default: 1,2 and 3,4 when available).")
@server_option
def pca(profiles_dir: Path, k: int, out_dir: Path, pairs: str | None,
        server: str | None) -> None:
    """PCA workload-diversity analysis over operation-count profiles."""
    pair_list = None
    if pairs is not None:
        try:
            pair_list = [tuple(int(x) for x in chunk.split(",")) for chunk in pairs.split(";")]
        except ValueError as exc:
            raise click.ClickException(f"bad --pairs value: {exc}") from exc
    with _client(server) as client:
        doc = _check(client.post("/diversity/pca", json={
            "k": k, "profiles_dir": str(profiles_dir), "out_dir": str(out_dir),
            "pairs": pair_list,
        }))
    ratios = ", ".join(f"{r:.3f}" for r in doc["explained_variance_ratio"])
    click.echo(f"subjects={len(doc['subjects'])} categories={len(doc['kept_categories'])} "
               f"(dropped {len(doc['dropped_categories'])})")
    click.echo(f"explained variance ratios: {ratios}")
    for path in doc["files"]:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--target", "target_name", required=True)
@click.option("--seeds", "seeds_dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--family", default=None, help="Benchmark family label (default: target name).")
@server_option
def profile(target_name: str, seeds_dir: Path, out_dir: Path, family: str | None,
            server: str | None) -> None:
    """Emit per-seed operation-category profiles from a target's drivers."""
    with _client(server) as client:
        doc = _check(client.post("/profiles/emit", json={
            "target": target_name, "seeds_dir": str(seeds_dir),
            "out_dir": str(out_dir), "family": family,
        }))
    for path in doc["files"]:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
