"""Generic agent execution: prompt assembly, retrieval grounding, schema
validation with one feedback re-ask, citation resolution, and fingerprinting."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any, Optional, Sequence

from diligence.agents.queries import DEFAULT_TOP_K_SOURCES, queries_for
from diligence.agents.schema import (
    ROLE_SCHEMAS,
    AgentOutput,
    AgentRole,
    collect_citation_indices,
    validate_output,
)
from diligence.canonical import canonical_json, fingerprint
from diligence.errors import CitationError, DiligenceError, MissingArtifactError, SchemaRejectedError
from diligence.models import Citation
from diligence.providers.base import CompletionProvider, ContextDoc, RetrievalProvider, RetrievalResult
from diligence.validation import ValidationReport


@lru_cache(maxsize=1)
def _manifest() -> dict[str, Any]:
    raw = resources.files("diligence.agents").joinpath("templates/manifest.json")
    return json.loads(raw.read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def _template_text(filename: str) -> str:
    raw = resources.files("diligence.agents").joinpath(f"templates/{filename}")
    return raw.read_text(encoding="utf-8")


def role_manifest(role: AgentRole) -> dict[str, Any]:
    entry = _manifest().get(role.value)
    if entry is None:
        raise DiligenceError(f"role {role.value} has no template manifest entry")
    return entry


def render_prompt(role: AgentRole, inputs: dict[str, Any]) -> str:
    entry = role_manifest(role)
    template = _template_text(entry["template"])
    return f"ROLE: {role.value}\n\nINPUTS:\n{canonical_json(inputs)}\n\n{template}"


def search(query: str, retrieval: RetrievalProvider) -> list[RetrievalResult]:
    """Provider-backed search with the empty-query guard."""
    if not query or not query.strip():
        raise DiligenceError("retrieval query must be non-empty")
    return retrieval.search(query)


def _gather_context(
    role: AgentRole,
    inputs: dict[str, Any],
    retrieval: Optional[RetrievalProvider],
    top_k_sources: int,
) -> list[ContextDoc]:
    queries = queries_for(role, inputs, top_k_sources)
    if not queries:
        return []
    if retrieval is None:
        raise DiligenceError(
            f"role {role.value} issues retrieval queries but no retrieval "
            "provider was supplied"
        )
    docs: list[ContextDoc] = []
    for query in queries:
        for result in search(query, retrieval):
            docs.append(
                ContextDoc(
                    source_ref=result.source_ref,
                    text=result.snippet,
                    retrieved_at=result.retrieved_at,
                )
            )
    return docs


def _parse_completion(
    raw: str, context_docs: Sequence[ContextDoc], report: ValidationReport
) -> tuple[dict[str, Any], list[Citation]]:
    """Decode the completion into (payload, citations); faults become violations."""
    try:
        decoded = json.loads(raw)
    except json.JSONDecodeError as exc:
        report.add("completion-not-json", f"completion was not valid JSON: {exc}")
        return {}, []
    if not isinstance(decoded, dict) or not isinstance(decoded.get("payload"), dict):
        report.add(
            "completion-shape",
            "completion must be an object with a 'payload' object",
        )
        return {}, []
    payload = decoded["payload"]
    citations: list[Citation] = []
    for i, raw_cite in enumerate(decoded.get("citations", [])):
        if isinstance(raw_cite, dict) and "context_doc" in raw_cite:
            idx = raw_cite["context_doc"]
            if not isinstance(idx, int) or not (0 <= idx < len(context_docs)):
                report.add(
                    "citation-unresolvable",
                    f"citations[{i}] points at context document {idx!r}, but only "
                    f"{len(context_docs)} were supplied",
                )
                continue
            doc = context_docs[idx]
            citations.append(
                Citation(
                    source_ref=doc.source_ref,
                    page=doc.page,
                    retrieved_at=doc.retrieved_at,
                    snippet=doc.text[:300] if doc.text else None,
                )
            )
        else:
            try:
                citations.append(Citation.model_validate(raw_cite))
            except Exception as exc:  # pydantic ValidationError
                report.add("citation-invalid", f"citations[{i}] malformed: {exc}")
    return payload, citations


def _check(
    role: AgentRole,
    payload: dict[str, Any],
    citations: list[Citation],
    report: ValidationReport,
) -> None:
    sub = validate_output(role, payload)
    report.violations.extend(sub.violations)
    if sub.ok:
        model = ROLE_SCHEMAS[role].model_validate(payload)
        for idx in collect_citation_indices(role, model):
            if idx >= len(citations):
                report.add(
                    "citation-unresolvable",
                    f"payload cites citation index {idx}, but the output carries "
                    f"only {len(citations)} citations",
                )


def run_agent(
    role: AgentRole,
    inputs: dict[str, Any],
    completion: CompletionProvider,
    retrieval: Optional[RetrievalProvider] = None,
    *,
    top_k_sources: int = DEFAULT_TOP_K_SOURCES,
) -> AgentOutput:
    """Execute one agent role over its inputs and return a validated output.

    A schema- or citation-invalid completion earns exactly one re-ask with the
    violation list appended; a second rejection raises SchemaRejectedError.
    Transport errors from providers propagate unchanged (the engine applies
    its own retry policy per node kind).
    """
    entry = role_manifest(role)
    missing = [key for key in entry["requires"] if key not in inputs]
    if missing:
        raise MissingArtifactError(
            f"role {role.value} requires inputs {entry['requires']}, "
            f"missing: {', '.join(missing)}"
        )

    context_docs = _gather_context(role, inputs, retrieval, top_k_sources)
    prompt = render_prompt(role, inputs)

    attempt_prompt = prompt
    last_report: ValidationReport | None = None
    for attempt in (1, 2):
        raw = completion.complete(attempt_prompt, context_docs)
        report = ValidationReport()
        payload, citations = _parse_completion(raw, context_docs, report)
        if report.ok:
            _check(role, payload, citations, report)
        if report.ok:
            model = ROLE_SCHEMAS[role].model_validate(payload)
            fp = fingerprint(
                {
                    "role": role.value,
                    "inputs": inputs,
                    "completion_provider": completion.identity(),
                    "retrieval_provider": retrieval.identity() if retrieval else None,
                }
            )
            return AgentOutput(
                role=role,
                payload=model.model_dump(mode="json"),
                citations=citations,
                provider_fingerprint=fp,
            )
        last_report = report
        if attempt == 1:
            feedback = "\n".join(f"- {v}" for v in report.violations)
            attempt_prompt = (
                f"{prompt}\n\nSCHEMA FEEDBACK: your previous response was "
                f"rejected for these violations; fix them and answer again:\n{feedback}"
            )

    assert last_report is not None
    summary = "; ".join(str(v) for v in last_report.violations)
    if any(v.code.startswith("citation") or v.code == "uncited-quantitative-claim"
           for v in last_report.violations):
        raise CitationError(f"{role.value} output rejected after re-ask: {summary}")
    raise SchemaRejectedError(f"{role.value} output rejected after re-ask: {summary}")
