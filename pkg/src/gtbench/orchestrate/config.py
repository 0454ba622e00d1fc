"""Campaign configuration: repeated trials of one fuzzer against one target."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..targets import TARGETS, UnknownTargetError

DEFAULT_POLL_INTERVAL_S = 5.0


class ConfigError(ValueError):
    pass


@dataclass
class CampaignConfig:
    """Parameters for one campaign (a set of repeated, independent trials).

    Trials are stamped at poll-tick resolution, so the trial duration must be
    a whole number of poll intervals.  Setting ``execs_per_trial`` (with
    ``poll_every_execs``) switches the budget from wall-clock to execution
    count: polls then fire every N executions and tick k still maps to time
    k * poll_interval_s, which makes whole campaigns bit-reproducible.

    ``memory_limit_mb`` is recorded in the campaign header for bookkeeping;
    enforcement is platform-dependent and out of scope.
    """

    target: str
    trials: int = 5
    duration_s: float = 60.0
    poll_interval_s: float = DEFAULT_POLL_INTERVAL_S
    seeds_dir: str | None = None
    rng_seed: int = 0
    workers: int = 1
    fuzzer: str = "baseline"
    execs_per_trial: int | None = None
    poll_every_execs: int | None = None
    cmp_aid: bool = False
    memory_limit_mb: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.target not in TARGETS:
            raise UnknownTargetError(f"unknown target {self.target!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.poll_interval_s <= 0:
            raise ConfigError("poll_interval_s must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if (self.execs_per_trial is None) != (self.poll_every_execs is None):
            raise ConfigError("execs_per_trial and poll_every_execs go together")
        if self.execs_per_trial is not None:
            if self.execs_per_trial < 1 or self.poll_every_execs < 1:
                raise ConfigError("execution budgets must be >= 1")
            if self.execs_per_trial % self.poll_every_execs != 0:
                raise ConfigError("execs_per_trial must be a multiple of poll_every_execs")
        else:
            if self.poll_interval_s > self.duration_s:
                raise ConfigError("poll_interval_s must not exceed duration_s")
            ratio = self.duration_s / self.poll_interval_s
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError("duration_s must be a whole number of poll intervals")

    @property
    def n_polls(self) -> int:
        if self.execs_per_trial is not None:
            return self.execs_per_trial // self.poll_every_execs
        return round(self.duration_s / self.poll_interval_s)

    @property
    def effective_duration_s(self) -> float:
        """Trial duration on the recorded time scale (the censoring time)."""
        return self.n_polls * self.poll_interval_s

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**raw)

    @classmethod
    def from_file(cls, path: str | Path) -> "CampaignConfig":
        """Load a config from a flat key-value document (or flat JSON object)."""
        text = Path(path).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            raw = json.loads(text)
            if not isinstance(raw, dict):
                raise ConfigError("config JSON must be a flat object")
            return cls.from_dict(raw)
        return cls.from_dict(_parse_flat_kv(text))


_BOOLS = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}

_INT_KEYS = {"trials", "rng_seed", "workers", "execs_per_trial", "poll_every_execs",
             "memory_limit_mb"}
_FLOAT_KEYS = {"duration_s", "poll_interval_s"}
_BOOL_KEYS = {"cmp_aid"}


def _parse_flat_kv(text: str) -> dict:
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _INT_KEYS:
            raw[key] = int(value)
        elif key in _FLOAT_KEYS:
            raw[key] = float(value)
        elif key in _BOOL_KEYS:
            try:
                raw[key] = _BOOLS[value.lower()]
            except KeyError:
                raise ConfigError(f"line {lineno}: {key} expects a boolean, got {value!r}") from None
        else:
            raw[key] = value
    return raw
