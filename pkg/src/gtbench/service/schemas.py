"""Pydantic request/response models for the benchmark service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthOut(BaseModel):
    status: str = "ok"
    version: str


class TargetOut(BaseModel):
    name: str
    bug_count: int


class BugOut(BaseModel):
    id: int
    name: str
    bug_class: str = Field(alias="class")
    target: str
    detectable: bool
    has_pov: bool
    shallow: bool
    summary: str

    model_config = {"populate_by_name": True}


class CatalogOut(BaseModel):
    targets: list[TargetOut]
    bugs: list[BugOut]
    bug_count: int
    target_count: int
    density: float


class PovOut(BaseModel):
    bug_id: int
    name: str
    pov_b64: str


class SnapshotOut(BaseModel):
    reached: list[int]
    triggered: list[int]
    faulty: bool


class ExecRequest(BaseModel):
    target: str
    input_b64: str
    mode: Literal["normal", "fatal", "detect"] = "normal"
    nest_limit: Optional[int] = None


class ExecOut(BaseModel):
    exit_kind: Literal["clean", "fatal-canary", "modeled-fault"]
    bug_id: Optional[int] = None
    bug_name: Optional[str] = None
    fault: Optional[str] = None
    snapshot: SnapshotOut
    op_counts: dict[str, int]


class FuzzRequest(BaseModel):
    target: str
    seeds_dir: str
    out_dir: str
    rng_seed: int = 0
    duration_s: Optional[float] = None
    execs: Optional[int] = None
    cmp_aid: bool = False


class CampaignRequest(BaseModel):
    target: str
    out_dir: str
    trials: int = 5
    duration_s: float = 60.0
    poll_interval_s: float = 5.0
    seeds_dir: Optional[str] = None
    rng_seed: int = 0
    workers: int = 1
    fuzzer: str = "baseline"
    execs_per_trial: Optional[int] = None
    poll_every_execs: Optional[int] = None
    cmp_aid: bool = False
    memory_limit_mb: Optional[int] = None


class JobOut(BaseModel):
    job_id: str
    kind: str
    state: Literal["pending", "running", "done", "failed"]
    error: Optional[str] = None
    result: Optional[dict] = None


class Observation(BaseModel):
    time: float
    observed: bool


class KMRequest(BaseModel):
    observations: list[Observation]
    confidence: float = 0.95


class KMOut(BaseModel):
    times: list[float]
    at_risk: list[int]
    events: list[int]
    survival: list[float]
    ci_lower: list[float]
    ci_upper: list[float]
    n_observations: int
    n_censored: int
    confidence: float


class MWURequest(BaseModel):
    sample_a: list[float]
    sample_b: list[float]


class MWUOut(BaseModel):
    u: float
    p_value: float
    method: str
    tie_corrected: bool
    identical: bool
    significant: bool


class AnalyzeRequest(BaseModel):
    records_dir: str
    out_dir: str
    plots: bool = False


class AnalyzeOut(BaseModel):
    files: list[str]
    survival_table: dict
    bug_counts: list[dict]
    signif_matrix: list[dict]


class ProfileIn(BaseModel):
    subject: str
    seed: str
    counts: dict[str, float]
    family: str = "default"


class PCARequest(BaseModel):
    k: int
    profiles_dir: Optional[str] = None
    profiles: Optional[list[ProfileIn]] = None
    out_dir: Optional[str] = None
    pairs: Optional[list[tuple[int, int]]] = None


class PCAOut(BaseModel):
    subjects: list[str]
    kept_categories: list[str]
    dropped_categories: list[str]
    eigenvalues: list[float]
    explained_variance_ratio: list[float]
    scores: list[list[float]]
    loadings: list[list[float]]
    files: list[str] = []


class EmitProfilesRequest(BaseModel):
    target: str
    seeds_dir: str
    out_dir: str
    family: Optional[str] = None


class EmitProfilesOut(BaseModel):
    files: list[str]
