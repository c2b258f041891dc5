"""Report assembly and deterministic HTML rendering.

The report has six sections in a fixed order; every figure, claim, and event
carries a superscript reference that resolves into a numbered citation index
at the bottom.  Three rules shape everything here:

* **Nothing disappears silently.**  An intelligence stream that was skipped
  or failed upstream renders as an explicit gap line in its section.
* **The financial section is provenance-complete.**  Every numeric token in
  it is paired with a citation anchor (the NotFound state renders the same
  card with zero numerals and zero anchors), and the section carries exactly
  one machine-readable ``data-state`` marker.
* **Rendering is a pure function.**  Identical assembled reports produce
  byte-identical HTML -- no timestamps, no run identifiers, no environment
  leakage.  Styling is inlined so the document survives email clients.
"""

from __future__ import annotations

import html
from decimal import Decimal
from typing import Any, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from diligence.agents.schema import (
    AnalystPayload,
    CompetitionPayload,
    NewsPayload,
    OverallInfoPayload,
    SectorPayload,
)
from diligence.engine.model import NodeState, RunContext
from diligence.errors import MissingArtifactError
from diligence.models import (
    Citation,
    CompanyProfile,
    CompanyRecord,
    EpistemicState,
    FinancialSection,
)

# artifact key (as this module names it) -> producing node in the shipped graph
DEFAULT_ARTIFACT_KEYS: Mapping[str, str] = {
    "company": "intake",
    "profile": "context_agent",
    "sector": "sector",
    "competition": "competition",
    "news": "news",
    "financials": "fin_resolve",
    "analyst": "analyst",
    "overall": "overall_info",
}

MANDATORY = ("company", "profile", "financials", "analyst", "overall")

NO_EVENTS_LINE = "no statutory changes retrieved"

STATE_MARKERS: Mapping[EpistemicState, str] = {
    EpistemicState.REGISTRY_VERIFIED: "registry-verified",
    EpistemicState.THIRD_PARTY_APPROX: "third-party",
    EpistemicState.NOT_FOUND: "not-found",
}


# --------------------------------------------------------------------------
# Document model
# --------------------------------------------------------------------------


class ReportCitation(BaseModel):
    model_config = ConfigDict(extra="forbid")

    number: int = Field(ge=1)
    source_ref: str
    page: Optional[int] = None
    retrieved_at: str = ""
    snippet: str = ""


class MarketSizeLine(BaseModel):
    label: str
    value: float
    unit: str
    ref: int


class TrendLine(BaseModel):
    text: str
    ref: int


class NewsLine(BaseModel):
    date: str
    kind: str
    headline: str
    ref: int


class CompetitorLine(BaseModel):
    name: str
    tier: str
    funding_status: str
    activity_note: str
    ref: int


class MetricRow(BaseModel):
    metric: str
    amount_text: str
    ref: int


class YearBlock(BaseModel):
    fiscal_year: int
    ref: int  # the year header cites the record's first line item
    rows: list[MetricRow]


class ThirdPartyFieldRow(BaseModel):
    name: str
    fiscal_year: Optional[int] = None
    value_text: str
    ref: int


class ThirdPartyBlock(BaseModel):
    provider: str
    rows: list[ThirdPartyFieldRow]


class EventLine(BaseModel):
    date: str
    kind: str
    description: str
    ref: int


class RecommendationLine(BaseModel):
    audience: str
    horizon_days: int
    action: str


class OverviewSection(BaseModel):
    facts: list[tuple[str, str]]
    profile_summary: str
    overall_text: str


class MarketSection(BaseModel):
    market_size: list[MarketSizeLine] = Field(default_factory=list)
    trends: list[TrendLine] = Field(default_factory=list)
    sector_gap: Optional[str] = None
    news_events: list[NewsLine] = Field(default_factory=list)
    news_gap: Optional[str] = None


class CompetitionSection(BaseModel):
    competitors: list[CompetitorLine] = Field(default_factory=list)
    gap: Optional[str] = None


class FinancialSummarySection(BaseModel):
    state: EpistemicState
    provenance_note: str
    years: list[YearBlock] = Field(default_factory=list)
    third_party: Optional[ThirdPartyBlock] = None
    flag_text: str = ""


class EventsSection(BaseModel):
    events: list[EventLine] = Field(default_factory=list)
    gap: Optional[str] = None


class AssessmentSection(BaseModel):
    executive_summary: str
    market_timing: int
    product_differentiation: int
    recommendations: list[RecommendationLine]


class ReportDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    company_id: str
    company_name: str
    header_facts: list[tuple[str, str]]
    overview: OverviewSection
    market: MarketSection
    competition: CompetitionSection
    financial: FinancialSummarySection
    events: EventsSection
    assessment: AssessmentSection
    citation_index: list[ReportCitation]


# --------------------------------------------------------------------------
# Assembly
# --------------------------------------------------------------------------


class _CitationIndexer:
    """Numbers citations in first-appearance order, deduplicating repeats."""

    def __init__(self) -> None:
        self._numbers: dict[tuple, int] = {}
        self.entries: list[ReportCitation] = []

    def number(self, citation: Citation) -> int:
        key = (citation.source_ref, citation.page, citation.retrieved_at)
        existing = self._numbers.get(key)
        if existing is not None:
            return existing
        number = len(self.entries) + 1
        self._numbers[key] = number
        self.entries.append(
            ReportCitation(
                number=number,
                source_ref=citation.source_ref,
                page=citation.page,
                retrieved_at=citation.retrieved_at,
                snippet=citation.snippet,
            )
        )
        return number


def _gap_line(stream: str, cause: Optional[str]) -> str:
    base = f"{stream} intelligence was not produced for this run"
    return f"{base} ({cause})." if cause else f"{base}."


class _AgentCitations:
    """Resolves a payload's citation indices against its output's citations."""

    def __init__(self, output: Mapping[str, Any], indexer: _CitationIndexer):
        self._citations = [
            Citation.model_validate(c) for c in output.get("citations", [])
        ]
        self._indexer = indexer
        self._role = output.get("role", "?")

    def ref(self, index: int) -> int:
        if not 0 <= index < len(self._citations):
            raise MissingArtifactError(
                f"{self._role} claim cites citation {index}, but the output "
                f"carries {len(self._citations)}"
            )
        return self._indexer.number(self._citations[index])


SourceLike = Union[RunContext, Mapping[str, Any]]


def _artifacts_and_causes(
    source: SourceLike, keys: Mapping[str, str]
) -> tuple[dict[str, Any], dict[str, str]]:
    """Normalise either a finished run context or a plain artifact mapping."""
    artifacts: dict[str, Any] = {}
    causes: dict[str, str] = {}
    if isinstance(source, RunContext):
        for name, node_id in keys.items():
            if node_id in source.artifacts:
                artifacts[name] = source.artifacts[node_id]
            else:
                status = source.snapshot_statuses().get(node_id)
                if status is not None and status.state is NodeState.SKIPPED:
                    causes[name] = status.error or "skipped"
                elif status is not None and status.state is NodeState.FAILED:
                    causes[name] = status.error or "failed"
    else:
        for name, node_id in keys.items():
            if node_id in source:
                artifacts[name] = source[node_id]
    return artifacts, causes


def _amount_text(value: Decimal) -> str:
    return f"{value:,.2f}"


def _third_party_value_text(value: Decimal) -> str:
    return f"{value:,.0f}" if value == value.to_integral_value() else f"{value:,.2f}"


def assemble_report(
    source: SourceLike,
    keys: Mapping[str, str] = DEFAULT_ARTIFACT_KEYS,
) -> ReportDocument:
    """Assemble the six-section report from run artifacts.

    *source* is either a finished run context (gap lines then carry the skip
    cause) or the artifact mapping a node handler sees (gap lines are
    generic).  Raises :class:`MissingArtifactError` when a mandatory artifact
    (company, profile, financials, analyst, overall) is absent.
    """
    artifacts, causes = _artifacts_and_causes(source, keys)
    missing = [name for name in MANDATORY if name not in artifacts]
    if missing:
        raise MissingArtifactError(
            "report assembly is missing mandatory artifacts: " + ", ".join(missing)
        )

    indexer = _CitationIndexer()
    company = CompanyRecord.model_validate(artifacts["company"])
    profile = CompanyProfile.model_validate(artifacts["profile"]["payload"])
    overall = OverallInfoPayload.model_validate(artifacts["overall"]["payload"])
    financials = FinancialSection.model_validate(artifacts["financials"])
    analyst = AnalystPayload.model_validate(artifacts["analyst"]["payload"])

    header_facts = [
        ("Company", company.name),
        ("Sector", company.sector),
        ("Founders", ", ".join(company.founders)),
        ("Headquarters", company.headquarters),
        ("Initial investment year", str(company.initial_investment_year)),
        (
            "Registry number",
            company.registration if company.registration else "not on record",
        ),
    ]

    overview = OverviewSection(
        facts=profile.anchor_facts,
        profile_summary=profile.summary,
        overall_text=overall.text,
    )

    # market intelligence: sector and news sub-blocks, each gap-flagged alone
    market = MarketSection()
    if "sector" in artifacts:
        sector_cites = _AgentCitations(artifacts["sector"], indexer)
        sector = SectorPayload.model_validate(artifacts["sector"]["payload"])
        market.market_size = [
            MarketSizeLine(
                label=c.label, value=c.value, unit=c.unit, ref=sector_cites.ref(c.citation)
            )
            for c in sector.market_size
        ]
        market.trends = [
            TrendLine(text=t.text, ref=sector_cites.ref(t.citation))
            for t in sector.trends
        ]
    else:
        market.sector_gap = _gap_line("Sector", causes.get("sector"))
    if "news" in artifacts:
        news_cites = _AgentCitations(artifacts["news"], indexer)
        news = NewsPayload.model_validate(artifacts["news"]["payload"])
        market.news_events = [
            NewsLine(
                date=e.date,
                kind=e.kind,
                headline=e.headline,
                ref=news_cites.ref(e.citation),
            )
            for e in news.events
        ]
    else:
        market.news_gap = _gap_line("News", causes.get("news"))

    competition_section = CompetitionSection()
    if "competition" in artifacts:
        comp_cites = _AgentCitations(artifacts["competition"], indexer)
        competition = CompetitionPayload.model_validate(
            artifacts["competition"]["payload"]
        )
        competition_section.competitors = [
            CompetitorLine(
                name=c.name,
                tier=c.tier,
                funding_status=c.funding_status,
                activity_note=c.activity_note,
                ref=comp_cites.ref(c.citation),
            )
            for c in competition.competitors
        ]
    else:
        competition_section.gap = _gap_line("Competitor", causes.get("competition"))

    financial_section = _assemble_financials(financials, indexer)
    events_section = _assemble_events(financials, indexer)

    assessment = AssessmentSection(
        executive_summary=analyst.executive_summary,
        market_timing=analyst.scores.market_timing,
        product_differentiation=analyst.scores.product_differentiation,
        recommendations=[
            RecommendationLine(
                audience=r.audience, horizon_days=r.horizon_days, action=r.action
            )
            for r in analyst.recommendations
        ],
    )

    return ReportDocument(
        company_id=company.company_id,
        company_name=company.name,
        header_facts=header_facts,
        overview=overview,
        market=market,
        competition=competition_section,
        financial=financial_section,
        events=events_section,
        assessment=assessment,
        citation_index=indexer.entries,
    )


def _assemble_financials(
    financials: FinancialSection, indexer: _CitationIndexer
) -> FinancialSummarySection:
    section = FinancialSummarySection(
        state=financials.state, provenance_note=financials.provenance_note
    )
    if financials.state is EpistemicState.REGISTRY_VERIFIED:
        for record in financials.registry_records:
            rows = [
                MetricRow(
                    metric=metric,
                    amount_text=_amount_text(item.amount),
                    ref=indexer.number(item.citation),
                )
                for metric, item in sorted(record.line_items.items())
            ]
            section.years.append(
                YearBlock(fiscal_year=record.fiscal_year, ref=rows[0].ref, rows=rows)
            )
    elif financials.state is EpistemicState.THIRD_PARTY_APPROX:
        entry = financials.third_party
        assert entry is not None  # guaranteed by FinancialSection validation
        section.third_party = ThirdPartyBlock(
            provider=entry.provider,
            rows=[
                ThirdPartyFieldRow(
                    name=name,
                    fiscal_year=fld.fiscal_year,
                    value_text=_third_party_value_text(fld.value),
                    ref=indexer.number(entry.citations[fld.citation]),
                )
                for name, fld in sorted(entry.fields.items())
            ],
        )
    else:
        section.flag_text = (
            "Not Found — no verified financial data is available for this company."
        )
    return section


def _assemble_events(
    financials: FinancialSection, indexer: _CitationIndexer
) -> EventsSection:
    if financials.state is EpistemicState.REGISTRY_VERIFIED and financials.corporate_events:
        return EventsSection(
            events=[
                EventLine(
                    date=e.date,
                    kind=e.kind,
                    description=e.description,
                    ref=indexer.number(e.citation),
                )
                for e in financials.corporate_events
            ]
        )
    return EventsSection(gap=NO_EVENTS_LINE)


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------

_BODY = "margin:0;padding:24px;background:#f4f4f0;"
_MAIN = (
    "max-width:760px;margin:0 auto;background:#ffffff;padding:32px 40px;"
    "font-family:Georgia,'Times New Roman',serif;color:#1c1c1c;line-height:1.5;"
)
_H1 = "font-size:26px;margin:0 0 4px 0;"
_H2 = (
    "font-size:18px;margin:28px 0 8px 0;border-bottom:1px solid #d8d8d0;"
    "padding-bottom:4px;"
)
_H3 = "font-size:14px;margin:16px 0 6px 0;text-transform:uppercase;letter-spacing:0.05em;"
_TABLE = "border-collapse:collapse;width:100%;margin:8px 0;"
_TH = "text-align:left;padding:6px 8px;border-bottom:2px solid #444;font-size:13px;"
_TD = "padding:6px 8px;border-bottom:1px solid #e0e0d8;font-size:14px;"
_NOTE = "font-size:13px;color:#555;font-style:italic;margin:6px 0;"
_GAP = "font-size:14px;color:#777;font-style:italic;margin:6px 0;"
_SUP = "color:#1a5276;text-decoration:none;"
_CITE = "font-size:12px;color:#444;margin:4px 0;"


def _esc(text: object) -> str:
    return html.escape(str(text), quote=True)


def _sup(ref: int) -> str:
    return f'<sup><a href="#cite-{ref}" style="{_SUP}">[{ref}]</a></sup>'


def render_html(report: ReportDocument) -> str:
    """Render the assembled report as one self-contained HTML document."""
    parts: list[str] = []
    out = parts.append

    out("<!DOCTYPE html>")
    out('<html lang="en">')
    out(
        '<head><meta charset="utf-8">'
        f"<title>Due diligence report: {_esc(report.company_name)}</title></head>"
    )
    out(f'<body style="{_BODY}">')
    out(f'<main style="{_MAIN}">')

    out("<header>")
    out(f'<h1 style="{_H1}">{_esc(report.company_name)}</h1>')
    out(f'<p style="{_NOTE}">Due diligence report</p>')
    out(f'<table style="{_TABLE}">')
    for label, value in report.header_facts:
        out(
            f'<tr><td style="{_TD}"><strong>{_esc(label)}</strong></td>'
            f'<td style="{_TD}">{_esc(value)}</td></tr>'
        )
    out("</table>")
    out("</header>")

    _render_overview(out, report)
    _render_market(out, report)
    _render_competition(out, report)
    _render_financial(out, report)
    _render_events(out, report)
    _render_assessment(out, report)
    _render_citation_index(out, report)

    out("</main>")
    out("</body>")
    out("</html>")
    return "\n".join(parts)


def _render_overview(out, report: ReportDocument) -> None:
    out('<section id="company-overview">')
    out(f'<h2 style="{_H2}">Company Overview</h2>')
    out(f"<p>{_esc(report.overview.profile_summary)}</p>")
    out(f"<p>{_esc(report.overview.overall_text)}</p>")
    if report.overview.facts:
        out(f'<table style="{_TABLE}">')
        out(
            f'<tr><th style="{_TH}">Verified attribute</th>'
            f'<th style="{_TH}">Value</th></tr>'
        )
        for attribute, value in report.overview.facts:
            out(
                f'<tr><td style="{_TD}">{_esc(attribute)}</td>'
                f'<td style="{_TD}">{_esc(value)}</td></tr>'
            )
        out("</table>")
    out("</section>")


def _render_market(out, report: ReportDocument) -> None:
    market = report.market
    out('<section id="market-intelligence">')
    out(f'<h2 style="{_H2}">Market Intelligence</h2>')
    out(f'<h3 style="{_H3}">Sector</h3>')
    if market.sector_gap is not None:
        out(f'<p style="{_GAP}">{_esc(market.sector_gap)}</p>')
    else:
        if market.market_size:
            out(f'<table style="{_TABLE}">')
            out(
                f'<tr><th style="{_TH}">Market</th><th style="{_TH}">Size</th>'
                f'<th style="{_TH}">Unit</th></tr>'
            )
            for line in market.market_size:
                out(
                    f'<tr><td style="{_TD}">{_esc(line.label)}</td>'
                    f'<td style="{_TD}">{line.value:g}{_sup(line.ref)}</td>'
                    f'<td style="{_TD}">{_esc(line.unit)}</td></tr>'
                )
            out("</table>")
        if market.trends:
            out("<ul>")
            for trend in market.trends:
                out(f"<li>{_esc(trend.text)}{_sup(trend.ref)}</li>")
            out("</ul>")
        if not market.market_size and not market.trends:
            out(f'<p style="{_GAP}">no sector claims were grounded in retrieval.</p>')
    out(f'<h3 style="{_H3}">News</h3>')
    if market.news_gap is not None:
        out(f'<p style="{_GAP}">{_esc(market.news_gap)}</p>')
    elif market.news_events:
        out("<ul>")
        for event in market.news_events:
            out(
                f"<li>{_esc(event.date)} — {_esc(event.kind)}: "
                f"{_esc(event.headline)}{_sup(event.ref)}</li>"
            )
        out("</ul>")
    else:
        out(f'<p style="{_GAP}">no notable news events were retrieved.</p>')
    out("</section>")


def _render_competition(out, report: ReportDocument) -> None:
    section = report.competition
    out('<section id="competitive-landscape">')
    out(f'<h2 style="{_H2}">Competitive Landscape</h2>')
    if section.gap is not None:
        out(f'<p style="{_GAP}">{_esc(section.gap)}</p>')
    elif section.competitors:
        out(f'<table style="{_TABLE}">')
        out(
            f'<tr><th style="{_TH}">Competitor</th><th style="{_TH}">Tier</th>'
            f'<th style="{_TH}">Funding</th><th style="{_TH}">Activity</th></tr>'
        )
        for comp in section.competitors:
            out(
                f'<tr><td style="{_TD}">{_esc(comp.name)}{_sup(comp.ref)}</td>'
                f'<td style="{_TD}">{_esc(comp.tier)}</td>'
                f'<td style="{_TD}">{_esc(comp.funding_status)}</td>'
                f'<td style="{_TD}">{_esc(comp.activity_note)}</td></tr>'
            )
        out("</table>")
    else:
        out(f'<p style="{_GAP}">no competitors were identified in retrieval.</p>')
    out("</section>")


def _render_financial(out, report: ReportDocument) -> None:
    section = report.financial
    marker = STATE_MARKERS[section.state]
    out(f'<section id="financial-summary" data-state="{marker}">')
    out(f'<h2 style="{_H2}">Financial Summary</h2>')
    out(f'<p style="{_NOTE}">{_esc(section.provenance_note)}</p>')
    if section.state is EpistemicState.REGISTRY_VERIFIED:
        for year in section.years:
            out(f'<h3 style="{_H3}">Fiscal year {year.fiscal_year}{_sup(year.ref)}</h3>')
            out(f'<table style="{_TABLE}">')
            out(
                f'<tr><th style="{_TH}">Line item</th>'
                f'<th style="{_TH}">Amount (EUR)</th></tr>'
            )
            for row in year.rows:
                out(
                    f'<tr><td style="{_TD}">{_esc(row.metric)}</td>'
                    f'<td style="{_TD}">{_esc(row.amount_text)}{_sup(row.ref)}</td></tr>'
                )
            out("</table>")
    elif section.state is EpistemicState.THIRD_PARTY_APPROX:
        block = section.third_party
        assert block is not None
        out(f'<h3 style="{_H3}">Approximations reported by {_esc(block.provider)}</h3>')
        out(f'<table style="{_TABLE}">')
        out(
            f'<tr><th style="{_TH}">Field</th><th style="{_TH}">Fiscal year</th>'
            f'<th style="{_TH}">Value</th></tr>'
        )
        for row in block.rows:
            year_cell = (
                f"{row.fiscal_year}{_sup(row.ref)}"
                if row.fiscal_year is not None
                else "—"
            )
            out(
                f'<tr><td style="{_TD}">{_esc(row.name)}</td>'
                f'<td style="{_TD}">{year_cell}</td>'
                f'<td style="{_TD}">{_esc(row.value_text)}{_sup(row.ref)}</td></tr>'
            )
        out("</table>")
    else:
        # identical card skeleton, flag cell instead of figures, no numerals
        out(f'<table style="{_TABLE}">')
        out(
            f'<tr><th style="{_TH}">Line item</th>'
            f'<th style="{_TH}">Amount (EUR)</th></tr>'
        )
        out(
            f'<tr><td style="{_TD}">All line items</td>'
            f'<td style="{_TD}"><strong>{_esc(section.flag_text)}</strong></td></tr>'
        )
        out("</table>")
    out("</section>")


def _render_events(out, report: ReportDocument) -> None:
    section = report.events
    out('<section id="corporate-events">')
    out(f'<h2 style="{_H2}">Corporate Events</h2>')
    if section.gap is not None:
        out(f'<p style="{_GAP}">{_esc(section.gap)}</p>')
    else:
        out("<ul>")
        for event in section.events:
            out(
                f"<li>{_esc(event.date)} — {_esc(event.kind)}: "
                f"{_esc(event.description)}{_sup(event.ref)}</li>"
            )
        out("</ul>")
    out("</section>")


def _render_assessment(out, report: ReportDocument) -> None:
    section = report.assessment
    out('<section id="analyst-assessment">')
    out(f'<h2 style="{_H2}">Analyst Assessment</h2>')
    out(f"<p>{_esc(section.executive_summary)}</p>")
    out(f'<table style="{_TABLE}">')
    out(f'<tr><th style="{_TH}">Score</th><th style="{_TH}">Value (of ten)</th></tr>')
    out(
        f'<tr><td style="{_TD}">Market timing</td>'
        f'<td style="{_TD}">{section.market_timing}</td></tr>'
    )
    out(
        f'<tr><td style="{_TD}">Product differentiation</td>'
        f'<td style="{_TD}">{section.product_differentiation}</td></tr>'
    )
    out("</table>")
    if section.recommendations:
        out("<ul>")
        for rec in section.recommendations:
            out(
                f"<li><strong>{_esc(rec.audience)}</strong> "
                f"(horizon {rec.horizon_days} days): {_esc(rec.action)}</li>"
            )
        out("</ul>")
    out("</section>")


def _render_citation_index(out, report: ReportDocument) -> None:
    out('<section id="citation-index">')
    out(f'<h2 style="{_H2}">Citations</h2>')
    if not report.citation_index:
        out(f'<p style="{_GAP}">no external sources were cited.</p>')
    else:
        out("<ol>")
        for cite in report.citation_index:
            where = _esc(cite.source_ref)
            if cite.page is not None:
                where += f", page {cite.page}"
            line = f'<li id="cite-{cite.number}" style="{_CITE}">{where}'
            if cite.retrieved_at:
                line += f" (retrieved {_esc(cite.retrieved_at)})"
            if cite.snippet:
                line += f" — <em>{_esc(cite.snippet)}</em>"
            line += "</li>"
            out(line)
        out("</ol>")
    out("</section>")
