"""Minimal background-job registry for long-running fuzz/campaign work."""

from __future__ import annotations

import threading
import traceback
import uuid
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class Job:
    job_id: str
    kind: str
    state: str = "pending"  # pending -> running -> done | failed
    error: str | None = None
    result: dict | None = None


@dataclass
class JobRegistry:
    _jobs: dict[str, Job] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def submit(self, kind: str, work: Callable[[], dict]) -> Job:
        job = Job(job_id=uuid.uuid4().hex[:12], kind=kind)
        with self._lock:
            self._jobs[job.job_id] = job

        def runner() -> None:
            job.state = "running"
            try:
                job.result = work()
                job.state = "done"
            except Exception as exc:  # noqa: BLE001 - job isolation boundary
                job.error = f"{type(exc).__name__}: {exc}"
                job.state = "failed"
                traceback.print_exc()

        thread = threading.Thread(target=runner, name=f"job-{job.job_id}", daemon=True)
        thread.start()
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)
