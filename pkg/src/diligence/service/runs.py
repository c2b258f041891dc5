"""Run lifecycle management: queueing, execution, snapshots, and journal.

Runs execute on a worker pool; each one is an independent pipeline run with
its own artifact directory. The manager serializes its own bookkeeping and
reads node statuses through the engine's consistent snapshot, so an API
request mid-run always sees one coherent observation point. An append-only
JSONL journal records every lifecycle transition for crash inspection.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from diligence.engine import RunContext, WorkflowGraph
from diligence.intake import resolve_company
from diligence.models import CompanyRecord, TriggerPayload
from diligence.pipeline import PipelineConfig, run_pipeline

RunState = Literal["Queued", "Running", "Succeeded", "Failed"]


class RunRecord(BaseModel):
    """Externally visible snapshot of one run."""

    model_config = ConfigDict(extra="forbid")

    run_id: str
    company_id: str
    requested_by: str
    requested_at: str
    state: RunState
    node_statuses: dict[str, str]
    node_notes: dict[str, str] = {}
    report_path: Optional[str] = None
    undelivered: bool = False
    error: Optional[str] = None


@dataclass
class _Run:
    payload: TriggerPayload
    run_id: str
    state: RunState = "Queued"
    ctx: Optional[RunContext] = None
    error: Optional[str] = None
    finished: threading.Event = field(default_factory=threading.Event)


class RunManager:
    """Owns every run the service has accepted."""

    def __init__(
        self,
        config: PipelineConfig,
        graph: Optional[WorkflowGraph] = None,
        *,
        journal_path: Optional[Path] = None,
        max_parallel_runs: int = 4,
    ):
        self._config = config
        self._graph = graph
        self._journal_path = journal_path
        self._runs: dict[str, _Run] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(
            max_workers=max_parallel_runs, thread_name_prefix="diligence-run"
        )

    # -- lifecycle ---------------------------------------------------------

    def trigger(self, payload: TriggerPayload) -> str:
        """Accept a run: validate the company, queue, return the run id."""
        resolve_company(payload, self._config.company_db)  # CompanyNotFoundError
        run = _Run(payload=payload, run_id=uuid.uuid4().hex)
        with self._lock:
            self._runs[run.run_id] = run
        self._journal(run, "queued")
        self._pool.submit(self._execute, run)
        return run.run_id

    def _execute(self, run: _Run) -> None:
        def adopt(ctx: RunContext) -> None:
            with self._lock:
                run.ctx = ctx
                run.state = "Running"
            self._journal(run, "running")

        try:
            ctx = run_pipeline(
                self._config,
                run.payload,
                graph=self._graph,
                run_id=run.run_id,
                on_context=adopt,
            )
            with self._lock:
                run.ctx = ctx
                run.state = "Failed" if ctx.run_failed else "Succeeded"
                run.error = ctx.failure_reason
        except Exception as exc:  # noqa: BLE001 - a crashed run must be reportable
            with self._lock:
                run.state = "Failed"
                run.error = f"{type(exc).__name__}: {exc}"
        self._journal(run, "finished")
        run.finished.set()

    # -- reading -----------------------------------------------------------

    def _get(self, run_id: str) -> _Run:
        with self._lock:
            run = self._runs.get(run_id)
        if run is None:
            raise KeyError(run_id)
        return run

    def record(self, run_id: str) -> RunRecord:
        run = self._get(run_id)
        with self._lock:
            state = run.state
            ctx = run.ctx
            error = run.error
        if ctx is not None:
            snapshot = ctx.snapshot_statuses()
            statuses = {
                node_id: status.state.value for node_id, status in snapshot.items()
            }
            notes = {
                node_id: status.error
                for node_id, status in snapshot.items()
                if status.error
            }
        else:
            statuses = {}
            notes = {}
        report_path: Optional[str] = None
        undelivered = False
        if state == "Succeeded" and ctx is not None:
            report_path = self._report_path(run_id)
            receipt = (ctx.artifacts.get("deliver") or {}).get("receipt") or {}
            undelivered = receipt.get("delivered") is not True
        return RunRecord(
            run_id=run.run_id,
            company_id=run.payload.company_id,
            requested_by=run.payload.requested_by,
            requested_at=run.payload.requested_at,
            state=state,
            node_statuses=statuses,
            node_notes=notes,
            report_path=report_path,
            undelivered=undelivered,
            error=error,
        )

    def report_html(self, run_id: str) -> Optional[str]:
        """The rendered report, or None while the run has not succeeded."""
        run = self._get(run_id)
        with self._lock:
            state = run.state
            ctx = run.ctx
        if state != "Succeeded" or ctx is None:
            return None
        rendered = ctx.artifacts.get("render_report")
        return rendered["html"] if rendered else None

    def wait(self, run_id: str, timeout: Optional[float] = None) -> bool:
        return self._get(run_id).finished.wait(timeout)

    def run_ids(self) -> list[str]:
        with self._lock:
            return list(self._runs)

    def companies(self) -> list[CompanyRecord]:
        return list(self._config.company_db)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # -- internals -----------------------------------------------------------

    def _report_path(self, run_id: str) -> Optional[str]:
        if self._config.out_dir is None:
            return None
        path = Path(self._config.out_dir) / run_id / "report.html"
        return str(path) if path.is_file() else None

    def _journal(self, run: _Run, event: str) -> None:
        if self._journal_path is None:
            return
        line = {
            "t": datetime.now(timezone.utc).isoformat(),
            "event": event,
            "run_id": run.run_id,
            "company_id": run.payload.company_id,
            "state": run.state,
        }
        if run.error:
            line["error"] = run.error
        payload = json.dumps(line, sort_keys=True) + "\n"
        with self._lock:
            self._journal_path.parent.mkdir(parents=True, exist_ok=True)
            with self._journal_path.open("a", encoding="utf-8") as fh:
                fh.write(payload)


__all__ = ["RunManager", "RunRecord", "RunState"]
