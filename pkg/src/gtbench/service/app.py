"""FastAPI service wrapping the benchmark core.

Fast operations (catalog, single executions, statistics, analysis over
existing records) answer synchronously; fuzzing runs and campaigns are
naturally long-running, so they run as background jobs polled through
``GET /jobs/{job_id}``.  File paths in requests are interpreted on the
service host.
"""

from __future__ import annotations

import base64

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..analytics import analyze_records, km_estimate, mwu_test
from ..canary import FatalCanary
from ..diversity import (
    DegenerateInputError,
    Profile,
    build_matrix,
    emit_target_profiles,
    load_profiles,
    pca,
    scatter_export,
    write_result_files,
)
from ..fuzz import CampaignError, fuzz_campaign, load_seeds
from ..orchestrate import CampaignConfig, ConfigError, run_trials
from ..targets import (
    DEFAULT_NEST_LIMIT,
    PovUnavailableError,
    RunMode,
    UnknownTargetError,
    bug_by_id,
    catalog,
    run_driver,
)
from .jobs import Job, JobRegistry
from . import schemas


def _job_out(job: Job) -> schemas.JobOut:
    return schemas.JobOut(job_id=job.job_id, kind=job.kind, state=job.state,
                          error=job.error, result=job.result)


def create_app() -> FastAPI:
    app = FastAPI(title="gtbench", version=__version__,
                  description="Ground-truth fuzzing benchmark service")
    jobs = JobRegistry()

    @app.get("/health", response_model=schemas.HealthOut)
    def health() -> schemas.HealthOut:
        return schemas.HealthOut(version=__version__)

    @app.get("/catalog", response_model=schemas.CatalogOut)
    def get_catalog(target: str | None = None) -> schemas.CatalogOut:
        doc = catalog()
        if target is not None:
            if target not in {t["name"] for t in doc["targets"]}:
                raise HTTPException(404, f"unknown target {target!r}")
            doc["bugs"] = [b for b in doc["bugs"] if b["target"] == target]
        return schemas.CatalogOut(**doc)

    @app.get("/bugs/{bug_id}/pov", response_model=schemas.PovOut)
    def get_pov(bug_id: int) -> schemas.PovOut:
        from ..targets import pov as get_pov_bytes

        try:
            bug = bug_by_id(bug_id)
            data = get_pov_bytes(bug_id)
        except UnknownTargetError as exc:
            raise HTTPException(404, str(exc)) from exc
        except PovUnavailableError as exc:
            raise HTTPException(404, str(exc)) from exc
        return schemas.PovOut(bug_id=bug_id, name=bug.name,
                              pov_b64=base64.b64encode(data).decode())

    @app.post("/executions", response_model=schemas.ExecOut)
    def execute(req: schemas.ExecRequest) -> schemas.ExecOut:
        try:
            data = base64.b64decode(req.input_b64, validate=True)
        except Exception as exc:
            raise HTTPException(422, f"input_b64 is not valid base64: {exc}") from exc
        try:
            outcome = run_driver(req.target, data, RunMode(req.mode),
                                 nest_limit=req.nest_limit or DEFAULT_NEST_LIMIT)
        except UnknownTargetError as exc:
            raise HTTPException(404, str(exc)) from exc
        bug_name = None
        if outcome.exit.bug_id is not None:
            bug_name = bug_by_id(outcome.exit.bug_id).name
        return schemas.ExecOut(
            exit_kind=outcome.exit.kind.value,
            bug_id=outcome.exit.bug_id,
            bug_name=bug_name,
            fault=outcome.exit.fault.value if outcome.exit.fault else None,
            snapshot=schemas.SnapshotOut(
                reached=list(outcome.snapshot.reached),
                triggered=list(outcome.snapshot.triggered),
                faulty=outcome.snapshot.faulty,
            ),
            op_counts=outcome.op_counts,
        )

    @app.post("/fuzz", response_model=schemas.JobOut)
    def start_fuzz(req: schemas.FuzzRequest) -> schemas.JobOut:
        if (req.duration_s is None) == (req.execs is None):
            raise HTTPException(422, "exactly one of duration_s or execs is required")
        try:
            seeds = load_seeds(req.seeds_dir)
        except CampaignError as exc:
            raise HTTPException(422, str(exc)) from exc

        def work() -> dict:
            result = fuzz_campaign(req.target, seeds, req.rng_seed,
                                   max_execs=req.execs, max_seconds=req.duration_s,
                                   out_dir=req.out_dir, cmp_aid=req.cmp_aid)
            return {"out_dir": str(result.out_dir), "stats": result.stats.to_json(),
                    "crash_bugs": sorted(result.crashes)}

        return _job_out(jobs.submit("fuzz", work))

    @app.post("/campaigns", response_model=schemas.JobOut)
    def start_campaign(req: schemas.CampaignRequest) -> schemas.JobOut:
        raw = req.model_dump()
        out_dir = raw.pop("out_dir")
        try:
            config = CampaignConfig(**raw)
        except (ConfigError, UnknownTargetError) as exc:
            raise HTTPException(422, str(exc)) from exc

        def work() -> dict:
            output = run_trials(config, out_dir)
            records = output.records
            return {
                "out_dir": str(output.out_dir),
                "valid_trials": records.trial_count,
                "invalid_trials": len(records.invalid),
                "duration_s": records.duration_s,
                "triggered_per_trial": {
                    str(t.trial_id): sorted(t.triggered_bugs()) for t in records.trials
                },
                "detected_per_trial": {
                    str(t.trial_id): sorted(t.detected) for t in records.trials
                },
                "trial_stats": {str(k): v for k, v in output.trial_stats.items()},
            }

        return _job_out(jobs.submit("campaign", work))

    @app.get("/jobs/{job_id}", response_model=schemas.JobOut)
    def get_job(job_id: str) -> schemas.JobOut:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"no job {job_id}")
        return _job_out(job)

    @app.post("/analytics/km", response_model=schemas.KMOut)
    def analytics_km(req: schemas.KMRequest) -> schemas.KMOut:
        try:
            curve = km_estimate([(o.time, o.observed) for o in req.observations],
                                confidence=req.confidence)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return schemas.KMOut(**curve.to_json())

    @app.post("/analytics/mwu", response_model=schemas.MWUOut)
    def analytics_mwu(req: schemas.MWURequest) -> schemas.MWUOut:
        try:
            result = mwu_test(req.sample_a, req.sample_b)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return schemas.MWUOut(**result.to_json())

    @app.post("/analyze", response_model=schemas.AnalyzeOut)
    def analyze(req: schemas.AnalyzeRequest) -> schemas.AnalyzeOut:
        try:
            report = analyze_records(req.records_dir, req.out_dir, plots=req.plots)
        except (ValueError, OSError) as exc:
            raise HTTPException(422, str(exc)) from exc
        return schemas.AnalyzeOut(
            files=[str(p) for p in report.files],
            survival_table=report.table_json,
            bug_counts=report.bug_counts_json,
            signif_matrix=report.signif_json,
        )

    @app.post("/diversity/pca", response_model=schemas.PCAOut)
    def diversity_pca(req: schemas.PCARequest) -> schemas.PCAOut:
        if (req.profiles_dir is None) == (req.profiles is None):
            raise HTTPException(422, "exactly one of profiles_dir or profiles is required")
        try:
            if req.profiles_dir is not None:
                profiles = load_profiles(req.profiles_dir)
            else:
                profiles = [Profile(subject=p.subject, seed=p.seed, counts=p.counts,
                                    family=p.family) for p in req.profiles]
            matrix = build_matrix(profiles)
            result = pca(matrix, req.k)
        except DegenerateInputError as exc:
            raise HTTPException(422, f"degenerate input: {exc}") from exc
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        files: list[str] = []
        if req.out_dir is not None:
            files += [str(p) for p in write_result_files(result, req.out_dir)]
            pairs = req.pairs
            if pairs is None:
                pairs = [(1, 2)] if result.k >= 2 else []
                if result.k >= 4:
                    pairs.append((3, 4))
            try:
                files += [str(p) for p in scatter_export(result, pairs, req.out_dir)]
            except ValueError as exc:
                raise HTTPException(422, str(exc)) from exc
        doc = result.to_json()
        return schemas.PCAOut(files=files, **{
            key: doc[key] for key in ("subjects", "kept_categories", "dropped_categories",
                                      "eigenvalues", "explained_variance_ratio",
                                      "scores", "loadings")
        })

    @app.post("/profiles/emit", response_model=schemas.EmitProfilesOut)
    def profiles_emit(req: schemas.EmitProfilesRequest) -> schemas.EmitProfilesOut:
        from pathlib import Path

        seeds_dir = Path(req.seeds_dir)
        if not seeds_dir.is_dir():
            raise HTTPException(422, f"seeds directory {seeds_dir} does not exist")
        seeds = {p.name: p.read_bytes() for p in sorted(seeds_dir.iterdir()) if p.is_file()}
        if not seeds:
            raise HTTPException(422, f"seeds directory {seeds_dir} is empty")
        try:
            files = emit_target_profiles(req.target, seeds, req.out_dir, family=req.family)
        except UnknownTargetError as exc:
            raise HTTPException(404, str(exc)) from exc
        except FatalCanary as exc:  # seeds are expected to be clean inputs
            raise HTTPException(422, f"seed triggered a bug during profiling: {exc}") from exc
        return schemas.EmitProfilesOut(files=[str(p) for p in files])

    return app
