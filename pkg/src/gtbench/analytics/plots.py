"""SVG step plots of per-bug survival curves.

One plot per bug: dotted lines are survival of the *reached* event, solid
lines survival of the *triggered* event, one color per fuzzer, confidence
bands as shaded regions.
"""

from __future__ import annotations

from pathlib import Path

from ..orchestrate.monitor import REACH, TRIGGER
from ..orchestrate.records import RecordSet
from .survival import SurvivalCurve, km_estimate


def _step_points(curve: SurvivalCurve, duration: float) -> tuple[list[float], list[float]]:
    xs = [0.0] + list(curve.times) + [duration]
    ys = [1.0] + list(curve.survival) + [curve.survival[-1] if curve.survival else 1.0]
    return xs, ys


def plot_survival(record_sets: list[RecordSet], bug_id: int, out_path: str | Path,
                  bug_name: str | None = None) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    duration = record_sets[0].duration_s
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, rs in enumerate(record_sets):
        color = colors[i % len(colors)]
        for kind, style in ((REACH, ":"), (TRIGGER, "-")):
            observations = rs.observations(bug_id, kind)
            if not observations:
                continue
            curve = km_estimate(observations)
            xs, ys = _step_points(curve, duration)
            label = f"{rs.fuzzer} ({'reached' if kind == REACH else 'triggered'})"
            ax.step(xs, ys, where="post", linestyle=style, color=color, label=label)
            if curve.times:
                band_x = list(curve.times) + [duration]
                lower = list(curve.ci_lower) + [curve.ci_lower[-1]]
                upper = list(curve.ci_upper) + [curve.ci_upper[-1]]
                ax.fill_between(band_x, lower, upper, step="post", alpha=0.15,
                                color=color, linewidth=0)
    ax.set_xlim(0, duration)
    ax.set_ylim(-0.02, 1.05)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("survival probability")
    ax.set_title(bug_name or f"bug {bug_id}")
    ax.legend(fontsize=7, loc="lower left")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    return out_path


def render_survival_plots(record_sets: list[RecordSet], out_dir: str | Path) -> list[Path]:
    from .tables import _bug_name

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bug_ids = sorted({bug for rs in record_sets for bug in rs.bug_ids()})
    written = []
    for bug_id in bug_ids:
        name = _bug_name(bug_id)
        written.append(plot_survival(record_sets, bug_id,
                                     out_dir / f"survival_{name}.svg", bug_name=name))
    return written
