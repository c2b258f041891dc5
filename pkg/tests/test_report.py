"""Report assembly and HTML rendering: structure, provenance, determinism."""

from __future__ import annotations

import re
from decimal import Decimal

import pytest

from diligence.errors import MissingArtifactError
from diligence.models import (
    Citation,
    CorporateEvent,
    EpistemicState,
    FinancialSection,
    FinancialStatementRecord,
    LineItem,
    ThirdPartyEntry,
    has_digits,
)
from diligence.report import (
    NO_EVENTS_LINE,
    assemble_report,
    render_html,
)

FP = "0" * 64


def agent_output(role, payload, citations=()):
    return {
        "role": role,
        "payload": payload,
        "citations": list(citations),
        "provider_fingerprint": FP,
    }


def web_cite(ref, snippet="snippet text"):
    return {
        "source_ref": ref,
        "page": None,
        "retrieved_at": "2024-06-01T00:00:00Z",
        "snippet": snippet,
    }


def doc_cite(doc_id, page):
    return Citation(
        source_ref=f"doc:{doc_id}",
        page=page,
        retrieved_at="2024-05-10",
        snippet="planted snippet",
    )


def line_item(amount, doc_id, page):
    return LineItem(amount=Decimal(amount), citation=doc_cite(doc_id, page))


def verified_financials():
    records = [
        FinancialStatementRecord(
            fiscal_year=2023,
            line_items={
                "Assets": line_item("1250000.00", "a1-fin-2023", 1),
                "Liabilities": line_item("740000.00", "a1-fin-2023", 1),
                "Revenue": line_item("980000.00", "a1-fin-2023", 2),
                "EBIT": line_item("-45000.00", "a1-fin-2023", 2),
            },
        ),
        FinancialStatementRecord(
            fiscal_year=2022,
            line_items={
                "Assets": line_item("1100000.00", "a1-fin-2022", 1),
                "Liabilities": line_item("690000.00", "a1-fin-2022", 1),
                "Revenue": line_item("820000.00", "a1-fin-2022", 2),
                "EBIT": line_item("-120000.00", "a1-fin-2022", 2),
            },
        ),
    ]
    events = [
        CorporateEvent(
            date="2023-09-15",
            kind="CapitalIncrease",
            description="Share capital increase",
            citation=doc_cite("a1-mod-capital-2023", 1),
        ),
        CorporateEvent(
            date="2024-02-01",
            kind="BoardChange",
            description="Board of directors change",
            citation=doc_cite("a1-mod-board-2024", 1),
        ),
    ]
    return FinancialSection(
        state=EpistemicState.REGISTRY_VERIFIED,
        registry_records=records,
        corporate_events=events,
        provenance_note=(
            "Figures extracted from official registry filings; every line item "
            "cites the filing page it was read from."
        ),
    )


def third_party_financials():
    entry = ThirdPartyEntry(
        provider="crunchbase-fixture",
        fields={
            "revenue_estimate": {"value": "2400000", "fiscal_year": 2023, "citation": 0},
            "headcount": {"value": "38", "citation": 0},
        },
        citations=[
            Citation(
                source_ref="https://crunchbase.example/org/nordwind",
                retrieved_at="2024-06-01T00:00:00Z",
                snippet="Estimated revenue.",
            )
        ],
    )
    return FinancialSection(
        state=EpistemicState.THIRD_PARTY_APPROX,
        third_party=entry,
        provenance_note=(
            "Official registry data unavailable (no usable registry number); "
            "figures below are approximations reported by crunchbase-fixture."
        ),
    )


def not_found_financials():
    return FinancialSection(
        state=EpistemicState.NOT_FOUND,
        provenance_note=(
            "No verified financial data could be retrieved; figures are omitted "
            "rather than estimated."
        ),
    )


def base_artifacts(financials=None):
    company = {
        "company_id": "aegean-robotics",
        "name": "Aegean Robotics",
        "founders": ["Eleni Papadaki", "Markos Vlahos"],
        "sector": "industrial robotics",
        "initial_investment_year": 2021,
        "headquarters": "Athens, GR",
        "registration": "123456789012",
        "alt_identifiers": {},
    }
    profile = agent_output(
        "ContextAgent",
        {
            "summary": "A robotics company focused on industrial automation for ports.",
            "anchor_facts": [
                ["name", "Aegean Robotics"],
                ["sector", "industrial robotics"],
            ],
        },
    )
    sector = agent_output(
        "Sector",
        {
            "market_size": [
                {"label": "Port automation", "value": 4.2, "unit": "billion USD", "citation": 0}
            ],
            "trends": [{"text": "Automation adoption is accelerating.", "citation": 1}],
        },
        [
            web_cite("https://observatory.example/market", "Market size snippet."),
            web_cite("https://observatory.example/trends", "Trend snippet."),
        ],
    )
    competition = agent_output(
        "Competition",
        {
            "competitors": [
                {
                    "name": "Harbor Dynamics",
                    "tier": "Direct",
                    "funding_status": "Series B",
                    "activity_note": "Expanding into European ports.",
                    "citation": 0,
                }
            ]
        },
        [web_cite("https://tracker.example/harbor", "Competitor snippet.")],
    )
    news = agent_output(
        "News",
        {
            "events": [
                {
                    "date": "2024-03-01",
                    "kind": "Partnership",
                    "headline": "Aegean Robotics partners with Piraeus terminal",
                    "citation": 0,
                }
            ]
        },
        [web_cite("https://news.example/piraeus", "News snippet.")],
    )
    analyst = agent_output(
        "Analyst",
        {
            "executive_summary": "Strong vertical focus with verified statutory footing.",
            "scores": {"market_timing": 7, "product_differentiation": 7},
            "recommendations": [
                {"audience": "Fund", "horizon_days": 90, "action": "Deepen the position."},
                {"audience": "Startup", "horizon_days": 120, "action": "Expand the pilot fleet."},
            ],
        },
    )
    overall = agent_output(
        "OverallInfo",
        {"text": "The company combines verified filings with credible market pull."},
    )
    section = financials if financials is not None else verified_financials()
    return {
        "intake": company,
        "context_agent": profile,
        "sector": sector,
        "competition": competition,
        "news": news,
        "fin_resolve": section.model_dump(mode="json"),
        "analyst": analyst,
        "overall_info": overall,
    }


# --- parity/counting oracles used across tests -------------------------------

ANCHOR_RE = re.compile(r'<sup><a href="#cite-\d+"[^>]*>\[\d+\]</a></sup>')
SECTION_RE = re.compile(r'<section id="financial-summary".*?</section>', re.S)


def financial_fragment(html_text: str) -> str:
    match = SECTION_RE.search(html_text)
    assert match, "financial section missing"
    return match.group(0)


def numeric_tokens(fragment: str) -> list[str]:
    without_anchors = ANCHOR_RE.sub("", fragment)
    visible = re.sub(r"<[^>]+>", " ", without_anchors)
    return re.findall(r"\d[\d.,]*", visible)


def anchors(fragment: str) -> list[str]:
    return ANCHOR_RE.findall(fragment)


# --- assembly ----------------------------------------------------------------


def test_assembles_six_sections_with_resolving_citations():
    report = assemble_report(base_artifacts())
    assert report.company_name == "Aegean Robotics"
    assert report.market.market_size[0].label == "Port automation"
    assert report.competition.competitors[0].tier == "Direct"
    assert [y.fiscal_year for y in report.financial.years] == [2023, 2022]
    assert len(report.events.events) == 2
    assert report.assessment.market_timing == 7
    # every inline reference resolves into the citation index
    numbers = {c.number for c in report.citation_index}
    assert numbers == set(range(1, len(numbers) + 1))
    refs = (
        [l.ref for l in report.market.market_size]
        + [t.ref for t in report.market.trends]
        + [n.ref for n in report.market.news_events]
        + [c.ref for c in report.competition.competitors]
        + [r.ref for y in report.financial.years for r in y.rows]
        + [y.ref for y in report.financial.years]
        + [e.ref for e in report.events.events]
    )
    assert set(refs) <= numbers


def test_citations_numbered_in_first_appearance_order_with_dedupe():
    report = assemble_report(base_artifacts())
    # sector is assembled first, so its sources take numbers 1 and 2
    assert report.citation_index[0].source_ref == "https://observatory.example/market"
    assert report.citation_index[1].source_ref == "https://observatory.example/trends"
    # the four metrics of one fiscal year cite two pages of one document:
    # repeats collapse onto the same number
    year_2023 = report.financial.years[0]
    page1 = {r.ref for r in year_2023.rows if r.metric in ("Assets", "Liabilities")}
    page2 = {r.ref for r in year_2023.rows if r.metric in ("Revenue", "EBIT")}
    assert len(page1) == 1 and len(page2) == 1 and page1 != page2
    assert year_2023.ref in page1 | page2  # header borrows a line-item citation


@pytest.mark.parametrize("missing", ["intake", "context_agent", "fin_resolve", "analyst", "overall_info"])
def test_missing_mandatory_artifact_is_an_error(missing):
    artifacts = base_artifacts()
    del artifacts[missing]
    with pytest.raises(MissingArtifactError, match="missing mandatory artifacts"):
        assemble_report(artifacts)


def test_skipped_optional_streams_become_gap_lines():
    artifacts = base_artifacts()
    del artifacts["sector"]
    del artifacts["news"]
    del artifacts["competition"]
    report = assemble_report(artifacts)
    assert report.market.sector_gap is not None
    assert report.market.news_gap is not None
    assert report.competition.gap is not None
    html_text = render_html(report)
    assert "Sector intelligence was not produced" in html_text
    assert "News intelligence was not produced" in html_text
    assert "Competitor intelligence was not produced" in html_text


def test_claim_citing_unattached_citation_is_rejected():
    artifacts = base_artifacts()
    artifacts["sector"]["payload"]["market_size"][0]["citation"] = 9
    with pytest.raises(MissingArtifactError, match="cites citation 9"):
        assemble_report(artifacts)


def test_not_found_keeps_corporate_events_as_gap():
    report = assemble_report(base_artifacts(not_found_financials()))
    assert report.events.gap == NO_EVENTS_LINE
    assert report.events.events == []


# --- rendering ----------------------------------------------------------------


def test_render_is_deterministic():
    html_a = render_html(assemble_report(base_artifacts()))
    html_b = render_html(assemble_report(base_artifacts()))
    assert html_a == html_b


def test_exactly_one_state_marker_matching_state():
    for section, marker in (
        (verified_financials(), "registry-verified"),
        (third_party_financials(), "third-party"),
        (not_found_financials(), "not-found"),
    ):
        html_text = render_html(assemble_report(base_artifacts(section)))
        assert html_text.count('data-state="') == 1
        assert f'data-state="{marker}"' in html_text


def test_anchors_link_into_citation_index():
    html_text = render_html(assemble_report(base_artifacts()))
    hrefs = set(re.findall(r'href="#cite-(\d+)"', html_text))
    ids = set(re.findall(r'id="cite-(\d+)"', html_text))
    assert hrefs == ids
    assert ids == {str(n) for n in range(1, len(ids) + 1)}


def test_financial_parity_registry_verified():
    html_text = render_html(assemble_report(base_artifacts()))
    fragment = financial_fragment(html_text)
    tokens = numeric_tokens(fragment)
    assert len(tokens) == len(anchors(fragment))
    # two year headers + eight amounts
    assert len(tokens) == 10
    assert "1,250,000.00" in tokens and "-45,000.00" not in tokens  # sign sits outside
    assert "45,000.00" in tokens


def test_financial_parity_third_party():
    html_text = render_html(assemble_report(base_artifacts(third_party_financials())))
    fragment = financial_fragment(html_text)
    tokens = numeric_tokens(fragment)
    assert len(tokens) == len(anchors(fragment))
    assert "2,400,000" in tokens
    assert "38" in tokens


def test_not_found_renders_flag_with_zero_numerals():
    html_text = render_html(assemble_report(base_artifacts(not_found_financials())))
    fragment = financial_fragment(html_text)
    assert numeric_tokens(fragment) == []
    assert anchors(fragment) == []
    assert "Not Found" in fragment
    # identical markup skeleton: same table/header structure as populated state
    assert "<table" in fragment
    assert "Line item" in fragment and "Amount (EUR)" in fragment


def test_not_found_and_verified_share_markup_skeleton():
    verified = financial_fragment(render_html(assemble_report(base_artifacts())))
    flagged = financial_fragment(
        render_html(assemble_report(base_artifacts(not_found_financials())))
    )

    def skeleton(fragment):
        return re.findall(r"<(table|tr|th|h2)\b", fragment)

    # same element vocabulary in the same relative order for the first card
    assert skeleton(flagged)[:6] == skeleton(verified)[:6]


def test_empty_events_render_exact_flag_line():
    section = verified_financials()
    section = FinancialSection(
        state=EpistemicState.REGISTRY_VERIFIED,
        registry_records=section.registry_records,
        corporate_events=[],
        provenance_note=section.provenance_note,
    )
    html_text = render_html(assemble_report(base_artifacts(section)))
    assert NO_EVENTS_LINE in html_text


def test_html_escapes_untrusted_text():
    artifacts = base_artifacts()
    artifacts["intake"]["name"] = 'Aegean <script>alert("x")</script>'
    artifacts["context_agent"]["payload"]["anchor_facts"] = [
        ["name", 'Aegean <script>alert("x")</script>']
    ]
    html_text = render_html(assemble_report(artifacts))
    assert "<script>" not in html_text
    assert "&lt;script&gt;" in html_text


def test_no_fiscal_year_cell_renders_dash_not_numeral():
    section = third_party_financials()
    html_text = render_html(assemble_report(base_artifacts(section)))
    fragment = financial_fragment(html_text)
    assert "—" in fragment  # the headcount row has no fiscal year


def test_rendered_document_is_wellformed_enough_to_parse():
    from html.parser import HTMLParser

    class Balance(HTMLParser):
        VOID = {"meta", "br", "hr", "img", "input", "link"}

        def __init__(self):
            super().__init__(convert_charrefs=True)
            self.stack = []
            self.problems = []

        def handle_starttag(self, tag, attrs):
            if tag not in self.VOID:
                self.stack.append(tag)

        def handle_endtag(self, tag):
            if not self.stack or self.stack[-1] != tag:
                self.problems.append(f"unbalanced </{tag}> (stack: {self.stack[-3:]})")
            else:
                self.stack.pop()

    html_text = render_html(assemble_report(base_artifacts()))
    parser = Balance()
    parser.feed(html_text)
    assert parser.problems == []
    assert parser.stack == ["html"] or parser.stack == []


def test_provenance_note_renders_in_financial_section():
    for section in (verified_financials(), third_party_financials(), not_found_financials()):
        html_text = render_html(assemble_report(base_artifacts(section)))
        fragment = financial_fragment(html_text)
        # note text appears (escaped) inside the section
        probe = section.provenance_note[:40]
        assert probe.split("(")[0].strip()[:25] in re.sub(r"<[^>]+>", "", fragment)
        if section.state is EpistemicState.NOT_FOUND:
            assert not has_digits(re.sub(r"<[^>]+>", "", fragment))
