"""Role registry: one output schema per agent role, plus the citation rules.

The citation discipline has two mechanisms:

1. Structured claims — any sub-object carrying numbers (market sizes, signal
   values, competitor funding notes, news items) has a required ``citation``
   index into the output's citation list; the schema itself forces it.
2. Free-text scanning — fields that are pure prose (summaries, rationales,
   recommended actions, blind spots) must not contain numerals at all: a
   figure belongs in a cited structured claim, not loose text. Researcher
   development notes are the one exception: they may contain numerals when
   the note itself carries a citation.

Analyst scores and recommendation horizons are the agent's own assessments,
not claims about the world, so they are exempt from citation requirements.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from diligence.models import (
    Citation,
    CompanyProfile,
    CorporateEvent,
    FinancialStatementRecord,
    ThirdPartyEntry,
    has_digits,
    validate_iso_date,
)
from diligence.validation import ValidationReport


class AgentRole(str, Enum):
    CONTEXT_AGENT = "ContextAgent"
    SOURCE_MAPPER = "SourceMapper"
    SECTOR = "Sector"
    COMPETITION = "Competition"
    NEWS = "News"
    SIGNALS = "Signals"
    RESEARCHER = "Researcher"
    ANALYST = "Analyst"
    OVERALL_INFO = "OverallInfo"
    FIN_SUMMARY = "FinSummary"
    MOD_SUMMARY = "ModSummary"
    ALT_FINANCIALS = "AltFinancials"


class SourceEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    url: str = Field(min_length=1)
    rationale: str


class SourceMapperPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sources: list[SourceEntry] = Field(min_length=1)


class MarketSizeClaim(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: str = Field(min_length=1)
    value: float
    unit: str = Field(min_length=1)
    citation: int = Field(ge=0)


class TrendEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str = Field(min_length=1)
    citation: int = Field(ge=0)


class SectorPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    market_size: list[MarketSizeClaim]
    trends: list[TrendEntry]


class CompetitorEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    tier: Literal["Direct", "Adjacent", "NicheInnovator"]
    funding_status: str
    activity_note: str
    citation: int = Field(ge=0)


class CompetitionPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    competitors: list[CompetitorEntry]


class NewsEvent(BaseModel):
    model_config = ConfigDict(extra="forbid")

    date: str
    kind: Literal["Partnership", "ProductLaunch", "Funding", "Other"]
    headline: str = Field(min_length=1)
    citation: int = Field(ge=0)

    @field_validator("date")
    @classmethod
    def _date_shape(cls, v: str) -> str:
        return validate_iso_date(v, "date")


class NewsPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    events: list[NewsEvent]


class SignalEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    metric: str = Field(min_length=1)
    value: float
    direction: Literal["up", "down", "flat"]
    citation: int = Field(ge=0)


class SignalsPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    signals: list[SignalEntry]


class NoteEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str = Field(min_length=1)
    citation: Optional[int] = Field(default=None, ge=0)


class ResearcherPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    developments: list[NoteEntry]
    blind_spots: list[str]
    consolidated_citations: list[int]


class AnalystScores(BaseModel):
    model_config = ConfigDict(extra="forbid")

    market_timing: int = Field(ge=1, le=10)
    product_differentiation: int = Field(ge=1, le=10)


class Recommendation(BaseModel):
    model_config = ConfigDict(extra="forbid")

    audience: Literal["Fund", "Startup"]
    horizon_days: int = Field(ge=30, le=180)
    action: str = Field(min_length=1)


class AnalystPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    executive_summary: str = Field(min_length=1)
    scores: AnalystScores
    recommendations: list[Recommendation]


class OverallInfoPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str = Field(min_length=1)


class FinSummaryPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    records: list[FinancialStatementRecord]


class ModSummaryPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    events: list[CorporateEvent]


class AltFinancialsPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    entry: Optional[ThirdPartyEntry] = None


ROLE_SCHEMAS: dict[AgentRole, Type[BaseModel]] = {
    AgentRole.CONTEXT_AGENT: CompanyProfile,
    AgentRole.SOURCE_MAPPER: SourceMapperPayload,
    AgentRole.SECTOR: SectorPayload,
    AgentRole.COMPETITION: CompetitionPayload,
    AgentRole.NEWS: NewsPayload,
    AgentRole.SIGNALS: SignalsPayload,
    AgentRole.RESEARCHER: ResearcherPayload,
    AgentRole.ANALYST: AnalystPayload,
    AgentRole.OVERALL_INFO: OverallInfoPayload,
    AgentRole.FIN_SUMMARY: FinSummaryPayload,
    AgentRole.MOD_SUMMARY: ModSummaryPayload,
    AgentRole.ALT_FINANCIALS: AltFinancialsPayload,
}


class AgentOutput(BaseModel):
    """The unit every agent node produces: validated payload plus provenance."""

    model_config = ConfigDict(extra="forbid")

    role: AgentRole
    payload: dict[str, Any]
    citations: list[Citation]
    provider_fingerprint: str

    def parsed_payload(self) -> BaseModel:
        return ROLE_SCHEMAS[self.role].model_validate(self.payload)


def _scan_digit_free(report: ValidationReport, field: str, text: str) -> None:
    if has_digits(text):
        report.add(
            "uncited-quantitative-claim",
            "numerals are not allowed in this prose field; figures belong in a "
            "cited structured claim",
            field,
        )


def _claim_rules(role: AgentRole, model: BaseModel, report: ValidationReport) -> None:
    if role is AgentRole.CONTEXT_AGENT:
        _scan_digit_free(report, "summary", model.summary)  # type: ignore[attr-defined]
    elif role is AgentRole.SOURCE_MAPPER:
        for i, entry in enumerate(model.sources):  # type: ignore[attr-defined]
            _scan_digit_free(report, f"sources[{i}].rationale", entry.rationale)
    elif role is AgentRole.RESEARCHER:
        for i, note in enumerate(model.developments):  # type: ignore[attr-defined]
            if has_digits(note.text) and note.citation is None:
                report.add(
                    "uncited-quantitative-claim",
                    "development note contains numerals but cites nothing",
                    f"developments[{i}]",
                )
        for i, spot in enumerate(model.blind_spots):  # type: ignore[attr-defined]
            _scan_digit_free(report, f"blind_spots[{i}]", spot)
    elif role is AgentRole.ANALYST:
        _scan_digit_free(report, "executive_summary", model.executive_summary)  # type: ignore[attr-defined]
        for i, rec in enumerate(model.recommendations):  # type: ignore[attr-defined]
            _scan_digit_free(report, f"recommendations[{i}].action", rec.action)
    elif role is AgentRole.OVERALL_INFO:
        _scan_digit_free(report, "text", model.text)  # type: ignore[attr-defined]


def validate_output(role: AgentRole, candidate: dict[str, Any]) -> ValidationReport:
    """Check a candidate payload against the role schema and claim rules."""
    report = ValidationReport()
    schema = ROLE_SCHEMAS[role]
    try:
        model = schema.model_validate(candidate)
    except ValidationError as exc:
        for err in exc.errors():
            loc = ".".join(str(part) for part in err["loc"]) or "<root>"
            report.add("schema", err["msg"], loc)
        return report
    _claim_rules(role, model, report)
    return report


def collect_citation_indices(role: AgentRole, model: BaseModel) -> list[int]:
    """Every citation index the payload references, for range checking."""
    indices: list[int] = []
    if role is AgentRole.SECTOR:
        indices += [c.citation for c in model.market_size]  # type: ignore[attr-defined]
        indices += [t.citation for t in model.trends]  # type: ignore[attr-defined]
    elif role is AgentRole.COMPETITION:
        indices += [c.citation for c in model.competitors]  # type: ignore[attr-defined]
    elif role is AgentRole.NEWS:
        indices += [e.citation for e in model.events]  # type: ignore[attr-defined]
    elif role is AgentRole.SIGNALS:
        indices += [s.citation for s in model.signals]  # type: ignore[attr-defined]
    elif role is AgentRole.RESEARCHER:
        indices += [n.citation for n in model.developments if n.citation is not None]  # type: ignore[attr-defined]
        indices += list(model.consolidated_citations)  # type: ignore[attr-defined]
    return indices
