"""Workload diversity via PCA over operation-category count profiles.

A profile records, for one (subject, seed) run, how many operations of each
category the workload performed.  Profiles aggregate into a categories x
subjects matrix whose entry is the mean count over that subject's seeds;
principal-component analysis of the per-category z-scored matrix then places
subjects in a low-dimensional space where clustering (or its absence) shows
how diverse a benchmark's workloads are.

Profiles are an ingestion format: any tracer can produce them, and the
target drivers emit their own (parse/arith/checksum/alloc/compare/copy
categories) so the pipeline runs end-to-end without external tooling.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DegenerateInputError(ValueError):
    """Every category is constant: nothing to decompose after normalization."""


@dataclass(frozen=True)
class Profile:
    subject: str
    seed: str
    counts: dict[str, float]
    family: str = "default"

    @classmethod
    def from_json(cls, raw: dict) -> "Profile":
        return cls(subject=raw["subject"], seed=raw["seed"],
                   counts={str(k): float(v) for k, v in raw["counts"].items()},
                   family=raw.get("family", "default"))

    def to_json(self) -> dict:
        return {"subject": self.subject, "seed": self.seed,
                "family": self.family, "counts": self.counts}


@dataclass
class FeatureMatrix:
    """categories x subjects grid of mean operation counts (non-negative)."""

    categories: list[str]
    subjects: list[str]
    values: np.ndarray  # shape (n_categories, n_subjects)
    families: dict[str, str] = field(default_factory=dict)

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)


def build_matrix(profiles: list[Profile], subjects: list[str] | None = None) -> FeatureMatrix:
    """Aggregate per-seed profiles into the mean-count feature matrix.

    Categories missing from a subject's profiles count as zero.  A requested
    subject with no profiles at all is an error: a mean over zero seeds is
    undefined.
    """
    if not profiles:
        raise ValueError("no profiles supplied")
    by_subject: dict[str, list[Profile]] = {}
    for profile in profiles:
        by_subject.setdefault(profile.subject, []).append(profile)
    if subjects is None:
        subjects = sorted(by_subject)
    missing = [s for s in subjects if not by_subject.get(s)]
    if missing:
        raise ValueError(f"subjects with zero seed profiles: {', '.join(missing)}")
    categories = sorted({cat for profile in profiles for cat in profile.counts})
    values = np.zeros((len(categories), len(subjects)))
    for j, subject in enumerate(subjects):
        runs = by_subject[subject]
        for i, category in enumerate(categories):
            values[i, j] = sum(run.counts.get(category, 0.0) for run in runs) / len(runs)
    if (values < 0).any():
        raise ValueError("operation counts must be non-negative")
    families = {s: by_subject[s][0].family for s in subjects}
    return FeatureMatrix(categories, list(subjects), values, families)


@dataclass
class PCAResult:
    loadings: np.ndarray  # (kept_categories, k), orthonormal columns
    scores: np.ndarray  # (subjects, k)
    explained_variance_ratio: np.ndarray  # (k,)
    eigenvalues: np.ndarray  # (k,)
    kept_categories: list[str]
    dropped_categories: list[str]
    subjects: list[str]
    families: dict[str, str] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def to_json(self) -> dict:
        return {
            "subjects": self.subjects,
            "kept_categories": self.kept_categories,
            "dropped_categories": self.dropped_categories,
            "eigenvalues": self.eigenvalues.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "loadings": self.loadings.tolist(),
            "scores": self.scores.tolist(),
        }


_RANK_TOL = 1e-10


def normalized_matrix(matrix: FeatureMatrix) -> tuple[np.ndarray, list[str], list[str]]:
    """Per-category z-scores; constant categories are dropped (not fatal)."""
    stds = matrix.values.std(axis=1, ddof=1)
    keep = stds > 0
    dropped = [cat for cat, k in zip(matrix.categories, keep) if not k]
    kept = [cat for cat, k in zip(matrix.categories, keep) if k]
    if not kept:
        raise DegenerateInputError("all categories have zero variance across subjects")
    values = matrix.values[keep]
    means = values.mean(axis=1, keepdims=True)
    z = (values - means) / values.std(axis=1, ddof=1, keepdims=True)
    return z, kept, dropped


def pca(matrix: FeatureMatrix, k: int) -> PCAResult:
    """Top-k principal components of the normalized feature matrix.

    Eigendecomposition of the subject covariance of the z-scored categories;
    explained-variance ratios are eigenvalue shares of the full spectrum, so
    they sum to 1 when k equals the rank.  Each loading's largest-magnitude
    entry is made positive for deterministic output.
    """
    if matrix.n_subjects < 2:
        raise ValueError("pca requires at least two subjects")
    z, kept, dropped = normalized_matrix(matrix)
    if k < 1 or k > min(len(kept), matrix.n_subjects):
        raise ValueError(f"k={k} out of range for a {len(kept)}x{matrix.n_subjects} matrix")
    cov = z @ z.T / (matrix.n_subjects - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]
    rank = int((eigenvalues > _RANK_TOL * max(eigenvalues[0], 1.0)).sum())
    if k > rank:
        raise ValueError(f"k={k} exceeds the matrix rank {rank}")
    total = eigenvalues.sum()
    loadings = eigenvectors[:, :k].copy()
    for col in range(k):
        pivot = np.argmax(np.abs(loadings[:, col]))
        if loadings[pivot, col] < 0:
            loadings[:, col] = -loadings[:, col]
    scores = z.T @ loadings
    return PCAResult(
        loadings=loadings,
        scores=scores,
        explained_variance_ratio=eigenvalues[:k] / total,
        eigenvalues=eigenvalues[:k],
        kept_categories=kept,
        dropped_categories=dropped,
        subjects=list(matrix.subjects),
        families=dict(matrix.families),
    )


def scatter_export(result: PCAResult, pairs: list[tuple[int, int]],
                   out_dir: str | Path, svg: bool = True) -> list[Path]:
    """Per-subject score scatter data for component pairs (1-based indices).

    Writes one CSV (and optionally one SVG) per pair; an empty pair list is a
    successful no-op.  Exported points are the PCA scores verbatim.
    """
    out_dir = Path(out_dir)
    written: list[Path] = []
    for a, b in pairs:
        for component in (a, b):
            if not 1 <= component <= result.k:
                raise ValueError(f"component {component} not in 1..{result.k}")
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"scatter_PC{a}_PC{b}.csv"
        with open(csv_path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["subject", "family", f"PC{a}", f"PC{b}"])
            for j, subject in enumerate(result.subjects):
                writer.writerow([subject, result.families.get(subject, "default"),
                                 repr(float(result.scores[j, a - 1])),
                                 repr(float(result.scores[j, b - 1]))])
        written.append(csv_path)
        if svg:
            written.append(_scatter_svg(result, a, b, out_dir / f"scatter_PC{a}_PC{b}.svg"))
    return written


def _scatter_svg(result: PCAResult, a: int, b: int, out_path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    families = sorted({result.families.get(s, "default") for s in result.subjects})
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, family in enumerate(families):
        idx = [j for j, s in enumerate(result.subjects)
               if result.families.get(s, "default") == family]
        ax.scatter(result.scores[idx, a - 1], result.scores[idx, b - 1],
                   s=18, label=family, color=colors[i % len(colors)])
    ax.set_xlabel(f"PC{a}")
    ax.set_ylabel(f"PC{b}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    return out_path


def write_result_files(result: PCAResult, out_dir: str | Path) -> list[Path]:
    """Standard output files: scores.csv and variance.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = out_dir / "scores.csv"
    with open(scores_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["subject", "family"] + [f"PC{i + 1}" for i in range(result.k)])
        for j, subject in enumerate(result.subjects):
            writer.writerow([subject, result.families.get(subject, "default")]
                            + [repr(float(v)) for v in result.scores[j]])
    variance_path = out_dir / "variance.csv"
    with open(variance_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["component", "eigenvalue", "explained_variance_ratio"])
        for i in range(result.k):
            writer.writerow([i + 1, repr(float(result.eigenvalues[i])),
                             repr(float(result.explained_variance_ratio[i]))])
    return [scores_path, variance_path]


def load_profiles(profiles_dir: str | Path) -> list[Profile]:
    """Read one JSON profile per file from a directory (sorted by name)."""
    profiles_dir = Path(profiles_dir)
    if not profiles_dir.is_dir():
        raise ValueError(f"profiles directory {profiles_dir} does not exist")
    profiles = []
    for path in sorted(profiles_dir.glob("*.json")):
        profiles.append(Profile.from_json(json.loads(path.read_text())))
    if not profiles:
        raise ValueError(f"no profile JSON files under {profiles_dir}")
    return profiles


def emit_target_profiles(target: str, seeds: dict[str, bytes], out_dir: str | Path,
                         family: str | None = None) -> list[Path]:
    """Run the target driver over seeds and write one profile JSON per seed."""
    from .targets import RunMode, run_driver

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for seed_name, data in sorted(seeds.items()):
        outcome = run_driver(target, data, RunMode.NORMAL)
        profile = Profile(subject=target, seed=seed_name,
                          counts={k: float(v) for k, v in outcome.op_counts.items()},
                          family=family or target)
        path = out_dir / f"{target}__{seed_name}.json"
        path.write_text(json.dumps(profile.to_json(), indent=2))
        written.append(path)
    return written
