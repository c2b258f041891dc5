"""Node handlers binding the shipped workflow graph to the domain modules.

``build_handlers`` closes a :class:`PipelineConfig` over one handler per
node of ``graphs/diligence.v1``; ``run_pipeline`` is the one-call façade
the service and CLI use. Handlers communicate only through JSON-safe
artifacts so a run can cross thread boundaries and be journaled verbatim.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

from diligence.agents.runner import run_agent
from diligence.agents.schema import AgentRole
from diligence.canonical import canonical_json
from diligence.delivery import DeliverySink
from diligence.engine import NodeInputs, RunContext, WorkflowGraph, execute_run
from diligence.engine.graphfile import parse_graph
from diligence.errors import DeliveryError, DiligenceError
from diligence.extract import (
    ExtractorBackend,
    extract_text,
    has_text_layer,
    summarize_financials,
    summarize_modifications,
)
from diligence.fallback import RegistryOutcome, query_alt_provider, resolve_financials
from diligence.intake import build_profile_output, resolve_company
from diligence.models import (
    CompanyRecord,
    CorporateEvent,
    DocumentIndexEntry,
    ExtractedDocument,
    FinancialStatementRecord,
    ThirdPartyEntry,
    TriggerPayload,
)
from diligence.providers.base import (
    AltFinancialsProvider,
    CompletionProvider,
    RetrievalProvider,
)
from diligence.registry import (
    EndpointClient,
    PdfBlob,
    classify_documents,
    fetch_document_index,
    fetch_pdf,
    has_valid_registry_number,
    select_recent,
)
from diligence.report import assemble_report, render_html

Handler = Callable[[NodeInputs], Any]

DEFAULT_GRAPH_RESOURCE = "graphs/diligence.v1"


def load_default_graph() -> WorkflowGraph:
    """The graph definition shipped inside the package."""
    raw = resources.files("diligence").joinpath(DEFAULT_GRAPH_RESOURCE)
    return parse_graph(
        json.loads(raw.read_text(encoding="utf-8")), source=DEFAULT_GRAPH_RESOURCE
    )


@dataclass
class PipelineConfig:
    """Everything a run needs beyond the trigger payload.

    ``registry_client`` may be None for companies that never take the
    registry branch; reaching ``registry_index`` without one is a node
    failure that degrades into the third-party fallback. ``out_dir`` is
    where each run's report file lands (``<out_dir>/<run_id>/report.html``);
    without it the report exists only as an in-memory artifact and a
    configured sink cannot deliver.
    """

    company_db: list[CompanyRecord]
    completion: CompletionProvider
    retrieval: Optional[RetrievalProvider] = None
    registry_client: Optional[EndpointClient] = None
    alt_providers: Sequence[AltFinancialsProvider] = ()
    extractor: Optional[ExtractorBackend] = None
    sink: Optional[DeliverySink] = None
    out_dir: Optional[Path] = None
    recent_docs: int = 5
    recent_years: int = 2


def _company(inputs: NodeInputs) -> CompanyRecord:
    return CompanyRecord.model_validate(inputs.require("intake"))


def build_handlers(config: PipelineConfig) -> dict[str, Handler]:
    """One handler per node id of the shipped graph, closed over *config*."""

    def _registry(inputs: NodeInputs) -> EndpointClient:
        if config.registry_client is None:
            raise DiligenceError(
                f"node {inputs.node_id!r} needs a registry client, but none is configured"
            )
        return config.registry_client

    def _agent(role: AgentRole, agent_inputs: dict[str, Any]) -> dict[str, Any]:
        output = run_agent(role, agent_inputs, config.completion, config.retrieval)
        return output.model_dump(mode="json")

    # -- intake leg ---------------------------------------------------------

    def trigger(inputs: NodeInputs) -> dict[str, Any]:
        payload = inputs.trigger_payload
        if not isinstance(payload, TriggerPayload):
            payload = TriggerPayload.model_validate(payload)
        return payload.model_dump(mode="json")

    def intake(inputs: NodeInputs) -> dict[str, Any]:
        payload = TriggerPayload.model_validate(inputs.require("trigger"))
        record = resolve_company(payload, config.company_db)
        return record.model_dump(mode="json")

    def context_agent(inputs: NodeInputs) -> dict[str, Any]:
        output = build_profile_output(_company(inputs), config.completion)
        return output.model_dump(mode="json")

    def source_mapper(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(
            AgentRole.SOURCE_MAPPER,
            {
                "company": inputs.require("intake"),
                "profile": inputs.require("context_agent")["payload"],
            },
        )

    # -- market intelligence --------------------------------------------------

    def _grounded_inputs(inputs: NodeInputs) -> dict[str, Any]:
        return {
            "company": inputs.require("intake"),
            "profile": inputs.require("context_agent")["payload"],
            "sources": inputs.require("source_mapper")["payload"],
        }

    def sector(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(AgentRole.SECTOR, _grounded_inputs(inputs))

    def competition(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(AgentRole.COMPETITION, _grounded_inputs(inputs))

    def news(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(AgentRole.NEWS, {"company": inputs.require("intake")})

    def signals(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(AgentRole.SIGNALS, {"company": inputs.require("intake")})

    # -- registry branch ------------------------------------------------------

    def registry_router(inputs: NodeInputs) -> str:
        return has_valid_registry_number(_company(inputs))

    def registry_index(inputs: NodeInputs) -> dict[str, Any]:
        record = _company(inputs)
        number = record.registration or ""
        entries = fetch_document_index(number, _registry(inputs))
        return {
            "registry_number": number,
            "documents": [e.model_dump(mode="json") for e in entries],
        }

    def classify_docs(inputs: NodeInputs) -> dict[str, Any]:
        entries = [
            DocumentIndexEntry.model_validate(raw)
            for raw in inputs.require("registry_index")["documents"]
        ]
        recent = select_recent(entries, config.recent_docs)
        financial, modification = classify_documents(recent)
        return {
            "financial": [e.model_dump(mode="json") for e in financial],
            "modification": [e.model_dump(mode="json") for e in modification],
            "dates": {e.doc_id: e.published_date for e in recent},
        }

    def _fetch_stream(inputs: NodeInputs, stream: str) -> dict[str, Any]:
        client = _registry(inputs)
        blobs = []
        for entry in inputs.require("classify_docs")[stream]:
            blob = fetch_pdf(entry["doc_id"], client)
            blobs.append(
                {
                    "doc_id": blob.doc_id,
                    "data_b64": base64.b64encode(blob.data).decode("ascii"),
                    "content_hash": blob.content_hash,
                }
            )
        return {"blobs": blobs}

    def fetch_fin(inputs: NodeInputs) -> dict[str, Any]:
        return _fetch_stream(inputs, "financial")

    def fetch_mod(inputs: NodeInputs) -> dict[str, Any]:
        return _fetch_stream(inputs, "modification")

    def _extract_stream(inputs: NodeInputs, fetch_node: str) -> dict[str, Any]:
        documents = []
        for raw in inputs.require(fetch_node)["blobs"]:
            blob = PdfBlob(
                doc_id=raw["doc_id"],
                data=base64.b64decode(raw["data_b64"]),
                content_hash=raw["content_hash"],
            )
            document = extract_text(blob, backend=config.extractor)
            if not has_text_layer(document):
                inputs.annotate(
                    f"document {document.doc_id} carries no text layer "
                    "(likely a scanned image); nothing to distill from it"
                )
            documents.append(document.model_dump(mode="json"))
        return {"documents": documents}

    def extract_fin(inputs: NodeInputs) -> dict[str, Any]:
        return _extract_stream(inputs, "fetch_fin")

    def extract_mod(inputs: NodeInputs) -> dict[str, Any]:
        return _extract_stream(inputs, "fetch_mod")

    def _documents(inputs: NodeInputs, extract_node: str) -> list[ExtractedDocument]:
        return [
            ExtractedDocument.model_validate(raw)
            for raw in inputs.require(extract_node)["documents"]
        ]

    def fin_summary(inputs: NodeInputs) -> dict[str, Any]:
        records = summarize_financials(
            _documents(inputs, "extract_fin"),
            config.completion,
            dates=inputs.require("classify_docs")["dates"],
            annotate=inputs.annotate,
            recent_years=config.recent_years,
        )
        return {"records": [r.model_dump(mode="json") for r in records]}

    def mod_summary(inputs: NodeInputs) -> dict[str, Any]:
        events = summarize_modifications(
            _documents(inputs, "extract_mod"),
            config.completion,
            dates=inputs.require("classify_docs")["dates"],
        )
        return {"events": [e.model_dump(mode="json") for e in events]}

    # -- fallback branch and join ----------------------------------------------

    def alt_financials(inputs: NodeInputs) -> dict[str, Any]:
        company = _company(inputs)
        entry: Optional[ThirdPartyEntry] = None
        for provider in config.alt_providers:
            entry = query_alt_provider(company, provider, annotate=inputs.annotate)
            if entry is not None:
                break
        return {
            "entry": entry.model_dump(mode="json") if entry is not None else None,
            "providers_tried": [p.identity() for p in config.alt_providers],
        }

    def _registry_outcome(inputs: NodeInputs) -> RegistryOutcome:
        """Reconstruct what the registry branch produced from its artifacts."""
        artifacts = inputs.artifacts
        summary = artifacts.get("fin_summary")
        if summary is not None:
            records = [
                FinancialStatementRecord.model_validate(raw)
                for raw in summary["records"]
            ]
            events = [
                CorporateEvent.model_validate(raw)
                for raw in artifacts.get("mod_summary", {}).get("events", [])
            ]
            if records:
                return RegistryOutcome("success", records=records, events=events)
            if not artifacts.get("registry_index", {}).get("documents"):
                return RegistryOutcome(
                    "empty", detail="the registry listed no filings for this company"
                )
            if not artifacts.get("classify_docs", {}).get("financial"):
                return RegistryOutcome(
                    "empty",
                    detail="the registry filings contained no financial statements",
                )
            return RegistryOutcome("success")  # ran to completion, nothing extractable
        if has_valid_registry_number(_company(inputs)) == "Yes":
            return RegistryOutcome(
                "failed", detail="the registry document branch failed upstream"
            )
        return RegistryOutcome.unavailable()

    def fin_resolve(inputs: NodeInputs) -> dict[str, Any]:
        company = _company(inputs)
        outcome = _registry_outcome(inputs)
        alt_artifact = inputs.artifacts.get("alt_financials")
        resolved_entry: Optional[ThirdPartyEntry] = None
        alt_attempted = False
        if outcome.status == "unavailable":
            # The fallback node owns the third-party chain on this branch; do
            # not query the providers a second time here, even if it failed.
            alt_attempted = True
            if alt_artifact is not None and alt_artifact.get("entry") is not None:
                resolved_entry = ThirdPartyEntry.model_validate(alt_artifact["entry"])
        section = resolve_financials(
            company,
            outcome,
            config.alt_providers,
            annotate=inputs.annotate,
            alt_entry=resolved_entry,
            alt_attempted=alt_attempted,
        )
        return section.model_dump(mode="json")

    # -- synthesis and rendering -------------------------------------------------

    def researcher(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(
            AgentRole.RESEARCHER,
            {
                "company": inputs.require("intake"),
                "sector": inputs.require("sector"),
                "competition": inputs.require("competition"),
                "news": inputs.require("news"),
                "signals": inputs.require("signals"),
                "financials": inputs.require("fin_resolve"),
            },
        )

    def analyst(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(
            AgentRole.ANALYST,
            {
                "company": inputs.require("intake"),
                "researcher": inputs.require("researcher"),
                "financials": inputs.require("fin_resolve"),
            },
        )

    def overall_info(inputs: NodeInputs) -> dict[str, Any]:
        return _agent(
            AgentRole.OVERALL_INFO,
            {
                "company": inputs.require("intake"),
                "profile": inputs.require("context_agent")["payload"],
                "analyst": inputs.require("analyst"),
            },
        )

    def render_report(inputs: NodeInputs) -> dict[str, Any]:
        report = assemble_report(inputs.artifacts)
        return {"report": report.model_dump(mode="json"), "html": render_html(report)}

    def deliver(inputs: NodeInputs) -> dict[str, Any]:
        html = inputs.require("render_report")["html"]
        payload = TriggerPayload.model_validate(inputs.require("trigger"))
        report_path: Optional[Path] = None
        if config.out_dir is not None:
            run_dir = Path(config.out_dir) / inputs.run_id
            run_dir.mkdir(parents=True, exist_ok=True)
            report_path = run_dir / "report.html"
            report_path.write_text(html, encoding="utf-8")
        if config.sink is None:
            receipt: dict[str, Any] = {
                "sink": "none",
                "delivered": False,
                "reason": "no delivery sink configured",
            }
        else:
            if report_path is None:
                raise DeliveryError(
                    "a delivery sink is configured but the pipeline has no "
                    "output directory to write the report file into"
                )
            receipt = config.sink.deliver(report_path, payload.requested_by, inputs.run_id)
        inputs.annotate(f"delivery receipt: {canonical_json(receipt)}")
        return {
            "report_path": str(report_path) if report_path is not None else None,
            "receipt": receipt,
        }

    return {
        "trigger": trigger,
        "intake": intake,
        "context_agent": context_agent,
        "source_mapper": source_mapper,
        "sector": sector,
        "competition": competition,
        "news": news,
        "signals": signals,
        "registry_router": registry_router,
        "registry_index": registry_index,
        "classify_docs": classify_docs,
        "fetch_fin": fetch_fin,
        "fetch_mod": fetch_mod,
        "extract_fin": extract_fin,
        "extract_mod": extract_mod,
        "fin_summary": fin_summary,
        "mod_summary": mod_summary,
        "alt_financials": alt_financials,
        "fin_resolve": fin_resolve,
        "researcher": researcher,
        "analyst": analyst,
        "overall_info": overall_info,
        "render_report": render_report,
        "deliver": deliver,
    }


def run_pipeline(
    config: PipelineConfig,
    payload: TriggerPayload | Mapping[str, Any],
    *,
    graph: Optional[WorkflowGraph] = None,
    run_id: Optional[str] = None,
    max_workers: int = 8,
    on_context: Optional[Callable[[RunContext], None]] = None,
) -> RunContext:
    """Execute one due-diligence run end to end and return its context."""
    if isinstance(payload, TriggerPayload):
        trigger_payload: Any = payload.model_dump(mode="json")
    else:
        trigger_payload = dict(payload)
    return execute_run(
        graph or load_default_graph(),
        build_handlers(config),
        trigger_payload,
        run_id=run_id,
        max_workers=max_workers,
        on_context=on_context,
    )
