"""HTTP API over the run manager.

Four endpoints drive the whole product: trigger a run, poll its record,
fetch the finished report, list the companies available to the trigger
form. When a built console bundle exists (``frontend/dist``), it is served
at the root path so the API and UI share one origin.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from diligence.errors import CompanyNotFoundError
from diligence.models import CompanyRecord, TriggerPayload
from diligence.service.config import (
    ServiceSettings,
    build_pipeline_config,
    load_service_graph,
    settings_from_env,
)
from diligence.service.runs import RunManager, RunRecord


class TriggerRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    company_id: str = Field(min_length=1)
    requested_by: str = Field(min_length=1)


class TriggerResponse(BaseModel):
    run_id: str


class CompanyEntry(BaseModel):
    company_id: str
    name: str
    sector: str
    headquarters: str
    has_registry_number: bool


def _company_entry(record: CompanyRecord) -> CompanyEntry:
    return CompanyEntry(
        company_id=record.company_id,
        name=record.name,
        sector=record.sector,
        headquarters=record.headquarters,
        has_registry_number=record.registration is not None,
    )


def create_app(
    settings: Optional[ServiceSettings] = None,
    *,
    manager: Optional[RunManager] = None,
    frontend_dir: Optional[Path] = Path("frontend/dist"),
) -> FastAPI:
    """Build the service; tests may inject a preconfigured manager."""
    if manager is None:
        settings = settings or settings_from_env()
        manager = RunManager(
            build_pipeline_config(settings),
            load_service_graph(settings),
            journal_path=settings.journal_path,
        )

    app = FastAPI(title="diligence", docs_url=None, redoc_url=None)
    app.state.manager = manager

    @app.post("/runs", response_model=TriggerResponse)
    def trigger_run(request: TriggerRequest) -> TriggerResponse:
        try:
            payload = TriggerPayload(
                company_id=request.company_id, requested_by=request.requested_by
            )
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            run_id = manager.trigger(payload)
        except CompanyNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return TriggerResponse(run_id=run_id)

    @app.get("/runs/{run_id}", response_model=RunRecord)
    def get_run(run_id: str) -> RunRecord:
        try:
            return manager.record(run_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown run: {run_id}")

    @app.get("/runs/{run_id}/report", response_class=HTMLResponse)
    def get_report(run_id: str) -> HTMLResponse:
        try:
            html = manager.report_html(run_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown run: {run_id}")
        if html is None:
            raise HTTPException(
                status_code=404,
                detail="report not available: the run has not succeeded",
            )
        return HTMLResponse(html)

    @app.get("/companies", response_model=list[CompanyEntry])
    def list_companies() -> list[CompanyEntry]:
        return [_company_entry(r) for r in manager.companies()]

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount(
            "/", StaticFiles(directory=str(frontend_dir), html=True), name="console"
        )

    return app
