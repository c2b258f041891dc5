"""Company database loading, trigger resolution, and anchored profile building.

The company database is a JSON list loaded once at startup and read-only
afterwards. The profile builder runs the context agent and then verifies that
every anchor fact is copied verbatim from the source record — an invented
baseline fact is a hard failure, not a warning.
"""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import ValidationError

from diligence.agents.runner import run_agent
from diligence.agents.schema import AgentOutput, AgentRole
from diligence.errors import AnchorFactError, CompanyDbError, CompanyNotFoundError
from diligence.models import CompanyProfile, CompanyRecord, TriggerPayload
from diligence.providers.base import CompletionProvider
from diligence.validation import ValidationReport


def load_company_db(path: str | Path) -> list[CompanyRecord]:
    path = Path(path)
    if not path.is_file():
        raise CompanyDbError(f"company database not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CompanyDbError(
            f"{path}: not valid JSON (line {exc.lineno}, column {exc.colno}: {exc.msg})"
        ) from exc
    if not isinstance(data, list):
        raise CompanyDbError(f"{path}: expected a JSON list of company records")

    records: list[CompanyRecord] = []
    seen: set[str] = set()
    for i, raw in enumerate(data):
        try:
            record = CompanyRecord.model_validate(raw)
        except ValidationError as exc:
            fields = ", ".join(
                ".".join(str(p) for p in err["loc"]) or "<root>" for err in exc.errors()
            )
            raise CompanyDbError(
                f"{path}: record at index {i} is invalid (fields: {fields}): {exc}"
            ) from exc
        if record.company_id in seen:
            raise CompanyDbError(
                f"{path}: duplicate company_id {record.company_id!r} at index {i}"
            )
        seen.add(record.company_id)
        records.append(record)
    return records


def resolve_company(payload: TriggerPayload, db: list[CompanyRecord]) -> CompanyRecord:
    """Exact, case-sensitive company_id lookup."""
    for record in db:
        if record.company_id == payload.company_id:
            return record
    raise CompanyNotFoundError(f"company not found: {payload.company_id}")


def _allowed_anchor_values(record: CompanyRecord) -> dict[str, set[str]]:
    allowed: dict[str, set[str]] = {
        "company_id": {record.company_id},
        "name": {record.name},
        "founders": set(record.founders),
        "sector": {record.sector},
        "initial_investment_year": {str(record.initial_investment_year)},
        "headquarters": {record.headquarters},
    }
    if record.registration is not None:
        allowed["registration"] = {record.registration}
    if record.alt_identifiers:
        allowed["alt_identifiers"] = set(record.alt_identifiers.values())
    return allowed


def verify_anchor_facts(record: CompanyRecord, profile: CompanyProfile) -> ValidationReport:
    """Every (attribute, value) must be copied verbatim from the record."""
    report = ValidationReport()
    allowed = _allowed_anchor_values(record)
    for attribute, value in profile.anchor_facts:
        if attribute not in allowed:
            report.add(
                "unknown-anchor-attribute",
                f"record has no attribute {attribute!r}",
                attribute,
            )
        elif value not in allowed[attribute]:
            report.add(
                "anchor-fact-not-verbatim",
                f"value {value!r} does not appear verbatim in the record's "
                f"{attribute!r}",
                attribute,
            )
    return report


def build_profile_output(
    record: CompanyRecord, completion: CompletionProvider
) -> AgentOutput:
    """Run the context agent and gate the result on anchor-fact verification."""
    output = run_agent(
        AgentRole.CONTEXT_AGENT,
        inputs={"company": record.model_dump(mode="json")},
        completion=completion,
    )
    profile = CompanyProfile.model_validate(output.payload)
    report = verify_anchor_facts(record, profile)
    if not report.ok:
        report.raise_if_failed(AnchorFactError)
    return output


def build_profile(record: CompanyRecord, completion: CompletionProvider) -> CompanyProfile:
    return CompanyProfile.model_validate(build_profile_output(record, completion).payload)
