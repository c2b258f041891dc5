"""Acceptance suite: seven timed, end-to-end criteria for the pipeline.

Each criterion prints one PASS/FAIL line with its wall-clock time against a
fixed budget, so the verdicts read straight off the pytest output:

1. The shipped workflow graph passes validation, and the validator agrees
   with an independently coded oracle (Kahn's algorithm + exhaustive
   simple-path enumeration) on 200 randomly mutated variants.
2. Across 100 runs with randomized handler latencies, News/Signals never
   start before both Sector and Competition finish, while Sector and
   Competition themselves demonstrably overlap in at least one run.
3. Every row of the financial-fallback decision table produces its specified
   epistemic state, and a NotFound report renders exactly one not-found
   marker with zero numeric tokens in the financial section.
4. A full run against the fixture registry served over HTTP comes back
   RegistryVerified, with all four metrics for both fiscal years cited to
   the manifest's document ids and page numbers.
5. 500 adversarial outputs with citation-stripped numerals (across agent
   roles and third-party providers) are all rejected or flagged, and
   corrupted runs leak no uncited numeral into rendered HTML.
6. Two consecutive fixture runs produce byte-identical report HTML.
7. Four concurrent runs over distinct companies produce reports
   hash-identical to their serial counterparts.
"""

from __future__ import annotations

import copy
import hashlib
import json
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from functools import partial

import pytest

from diligence.agents import AgentRole, run_agent, validate_output
from diligence.engine import NodeState, execute_run, load_graph, parse_graph, validate_graph
from diligence.errors import (
    CitationError,
    GraphDefinitionError,
    SchemaRejectedError,
    TransportError,
)
from diligence.fallback import RegistryOutcome, query_alt_provider, resolve_financials
from diligence.models import CompanyRecord, EpistemicState, FinancialSection
from diligence.providers.base import AltFinancialsProvider, CompletionProvider
from diligence.providers.fixture import FixtureCompletionProvider
from diligence.registry import HttpEndpointClient
from diligence.registry.fixture_server import FixtureRegistryServer

from stubs import InMemoryRetrieval, SequenceCompletion, StaticAltFinancials
from test_agents import COMPANY
from test_fallback import verified_events, verified_records
from test_pipeline import (
    AEGEAN_REG,
    GRAPH_PATH,
    MANIFEST,
    REGISTRY_DIR,
    financial_state,
    make_config,
    payload,
    run_pipeline,
)

METRICS = ("Assets", "Liabilities", "Revenue", "EBIT")


# ---------------------------------------------------------------------------
# Verdict reporting: one visible PASS/FAIL line per criterion
# ---------------------------------------------------------------------------


def _verdict(capsys, verdict: str, number: int, label: str, elapsed: float, budget: float):
    with capsys.disabled():
        print(f"\n[acceptance] criterion {number}: {verdict} — {label} "
              f"({elapsed:.2f}s / {budget:.0f}s budget)")


@contextmanager
def criterion(capsys, number: int, label: str, budget_s: float):
    """Time the body, then print exactly one PASS or FAIL line for it."""
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        _verdict(capsys, "FAIL", number, label, time.perf_counter() - start, budget_s)
        raise
    elapsed = time.perf_counter() - start
    if elapsed > budget_s:
        _verdict(capsys, "FAIL", number, label, elapsed, budget_s)
        pytest.fail(
            f"criterion {number} assertions held but ran over budget: "
            f"{elapsed:.2f}s > {budget_s:.0f}s"
        )
    _verdict(capsys, "PASS", number, label, elapsed, budget_s)


def _sha256(html: str) -> str:
    return hashlib.sha256(html.encode("utf-8")).hexdigest()


def _report_html(ctx) -> str:
    return ctx.artifacts["render_report"]["html"]


def _financial_section_text(html: str) -> str:
    """Visible text of the financial-summary section, tags stripped."""
    start = html.index('<section id="financial-summary"')
    end = html.index("</section>", start)
    return re.sub(r"<[^>]+>", " ", html[start:end])


# ---------------------------------------------------------------------------
# Criterion 1 — graph validation against an independent oracle
# ---------------------------------------------------------------------------


def _oracle_accepts(doc: dict) -> bool:
    """Re-derive the graph rules with different algorithms than the validator:
    Kahn's algorithm for acyclicity and exhaustive simple-path enumeration
    for reachability, instead of colored DFS and adjacency walks."""
    nodes, edges = doc["nodes"], doc["edges"]
    ids = [n["id"] for n in nodes]
    if not ids or len(ids) != len(set(ids)) or not all(ids):
        return False
    kinds = {n["id"]: n["kind"] for n in nodes}
    triggers = [i for i in ids if kinds[i] == "Trigger"]
    if len(triggers) != 1:
        return False
    idset = set(ids)
    if any(e["from"] not in idset or e["to"] not in idset for e in edges):
        return False

    outs: dict[str, list[dict]] = {i: [] for i in ids}
    for e in edges:
        outs[e["from"]].append(e)
    for e in edges:
        if (kinds[e["from"]] == "Router") != (e.get("branch") is not None):
            return False
    for router in (i for i in ids if kinds[i] == "Router"):
        labels = [e["branch"] for e in outs[router]]
        if len(labels) < 2 or len(labels) != len(set(labels)):
            return False

    # Acyclicity: Kahn's algorithm must settle every node.
    indegree = {i: 0 for i in ids}
    for e in edges:
        indegree[e["to"]] += 1
    frontier = [i for i in ids if indegree[i] == 0]
    settled = 0
    while frontier:
        node = frontier.pop()
        settled += 1
        for e in outs[node]:
            indegree[e["to"]] -= 1
            if indegree[e["to"]] == 0:
                frontier.append(e["to"])
    if settled != len(ids):
        return False

    # Reachability: enumerate simple paths from the trigger; a node is
    # reachable iff some simple path visits it.
    reached: set[str] = set()

    def walk(node: str, on_path: frozenset) -> None:
        reached.add(node)
        for e in outs[node]:
            if e["to"] not in on_path:
                walk(e["to"], on_path | {e["to"]})

    walk(triggers[0], frozenset({triggers[0]}))
    if reached != idset:
        return False

    # Every non-terminal node must reach a Render or Deliver node.
    predecessors: dict[str, list[str]] = {i: [] for i in ids}
    for e in edges:
        predecessors[e["to"]].append(e["from"])
    can_finish: set[str] = set()
    stack = [i for i in ids if kinds[i] in ("Render", "Deliver")]
    while stack:
        node = stack.pop()
        if node in can_finish:
            continue
        can_finish.add(node)
        stack.extend(predecessors[node])
    return idset <= can_finish


def _validator_accepts(doc: dict) -> bool:
    try:
        graph = parse_graph(doc)
    except GraphDefinitionError:
        return False
    return validate_graph(graph).ok


def _mutate(base: dict, rng: random.Random, tag: int) -> dict:
    doc = copy.deepcopy(base)
    kinds = {n["id"]: n["kind"] for n in doc["nodes"]}
    ids = [n["id"] for n in doc["nodes"]]
    if rng.random() < 0.5:
        edge = rng.choice(doc["edges"])
        edge["from"], edge["to"] = edge["to"], edge["from"]
    else:
        source = rng.choice(ids)
        target = rng.choice(ids)
        while target == source:
            target = rng.choice(ids)
        edge = {"from": source, "to": target}
        if kinds[source] == "Router" and rng.random() < 0.5:
            edge["branch"] = rng.choice(["Yes", "No", f"mut-{tag}"])
        elif kinds[source] != "Router" and rng.random() < 0.15:
            edge["branch"] = f"mut-{tag}"
        doc["edges"].append(edge)
    return doc


def test_criterion_1_graph_validation_matches_independent_oracle(capsys):
    with criterion(capsys, 1, "graph validation agrees with the independent "
                   "oracle on the shipped graph and 200 mutations", 5.0):
        base = json.loads(GRAPH_PATH.read_text(encoding="utf-8"))
        assert validate_graph(load_graph(GRAPH_PATH)).ok
        assert _oracle_accepts(base)

        rng = random.Random(1124)
        accepted = rejected = 0
        for tag in range(200):
            mutant = _mutate(base, rng, tag)
            oracle = _oracle_accepts(mutant)
            assert _validator_accepts(mutant) == oracle, (
                f"validator and oracle disagree on mutant {tag}: "
                f"{json.dumps(mutant['edges'][-1])}"
            )
            accepted += oracle
            rejected += not oracle
        # The sample must exercise both verdicts, or agreement means little.
        assert accepted > 0 and rejected > 0, (accepted, rejected)


# ---------------------------------------------------------------------------
# Criterion 2 — ordering invariant under randomized handler latencies
# ---------------------------------------------------------------------------


def _latency_run(graph, seed: int):
    rng = random.Random(seed)
    delays = {n.id: rng.uniform(0.0, 0.05) for n in graph.nodes}
    route = rng.choice(["Yes", "No"])

    def handler(node_id: str, inputs):
        time.sleep(delays[node_id])
        return route if node_id == "registry_router" else {"node": node_id}

    handlers = {n.handler_key: partial(handler, n.id) for n in graph.nodes}
    return execute_run(
        graph, handlers, {"company_id": "latency-probe"},
        run_id=f"latency-{seed}", max_workers=4,
    )


def test_criterion_2_news_and_signals_wait_for_sector_and_competition(capsys):
    with criterion(capsys, 2, "News/Signals start only after Sector and "
                   "Competition finish, across 100 randomized-latency runs", 60.0):
        graph = load_graph(GRAPH_PATH)
        overlapping_runs = 0
        with ThreadPoolExecutor(max_workers=8) as pool:
            futures = [pool.submit(_latency_run, graph, seed) for seed in range(100)]
            for future in futures:
                ctx = future.result()
                assert not ctx.run_failed, ctx.failure_reason
                statuses = ctx.snapshot_statuses()
                gate = max(
                    statuses["sector"].finished_at,
                    statuses["competition"].finished_at,
                )
                for later in ("news", "signals"):
                    assert statuses[later].started_at >= gate, (
                        f"{later} started before the intelligence fan-in finished"
                    )
                sector, competition = statuses["sector"], statuses["competition"]
                if (sector.started_at < competition.finished_at
                        and competition.started_at < sector.finished_at):
                    overlapping_runs += 1
        assert overlapping_runs >= 1, "Sector and Competition never overlapped"


# ---------------------------------------------------------------------------
# Criterion 3 — fallback decision table and the NotFound rendering
# ---------------------------------------------------------------------------


class _CountingAlt(AltFinancialsProvider):
    """Delegates to a provider while counting lookups."""

    def __init__(self, inner: AltFinancialsProvider):
        self.inner = inner
        self.calls = 0

    def identity(self) -> str:
        return self.inner.identity()

    def lookup(self, company):
        self.calls += 1
        return self.inner.lookup(company)


class _DownAlt(AltFinancialsProvider):
    def __init__(self):
        self.calls = 0

    def identity(self) -> str:
        return "stub-altfin/down"

    def lookup(self, company):
        self.calls += 1
        raise TransportError("connection refused")


_ALT_ENTRY = {
    "provider": "approx-db",
    "fields": {
        "revenue_estimate": {"value": "2400000", "fiscal_year": 2023, "citation": 0}
    },
    "citations": [
        {
            "source_ref": "https://approx.example/org/aegean",
            "retrieved_at": "2024-06-01T00:00:00Z",
            "snippet": "Estimated revenue.",
        }
    ],
}


def _decision_company() -> CompanyRecord:
    return CompanyRecord.model_validate(COMPANY)


def _hitting_alt() -> _CountingAlt:
    return _CountingAlt(StaticAltFinancials({COMPANY["name"]: _ALT_ENTRY}, name="hit"))


def test_criterion_3_fallback_decision_table_and_not_found_rendering(capsys):
    with criterion(capsys, 3, "all five fallback decision rows hold and the "
                   "NotFound report carries one marker, no numerals", 5.0):
        company = _decision_company()

        # Row 1: registry success with records => RegistryVerified, alt untouched.
        alt = _hitting_alt()
        section = resolve_financials(
            company,
            RegistryOutcome(status="success", records=verified_records(),
                            events=verified_events()),
            [alt],
        )
        assert section.state is EpistemicState.REGISTRY_VERIFIED
        assert section.registry_records and section.third_party is None
        assert alt.calls == 0

        # Row 2: registry answered but empty => alt queried; a hit approximates.
        alt = _hitting_alt()
        section = resolve_financials(
            company, RegistryOutcome(status="empty"), [alt]
        )
        assert section.state is EpistemicState.THIRD_PARTY_APPROX
        assert alt.calls >= 1
        assert section.third_party is not None
        assert section.registry_records == []

        # Row 3: registry branch failed => alt queried; a hit approximates.
        alt = _hitting_alt()
        section = resolve_financials(
            company,
            RegistryOutcome(status="failed", detail="document endpoint down"),
            [alt],
        )
        assert section.state is EpistemicState.THIRD_PARTY_APPROX
        assert alt.calls >= 1

        # Row 4: no usable registry number => alt queried; a hit approximates.
        alt = _hitting_alt()
        section = resolve_financials(company, RegistryOutcome.unavailable(), [alt])
        assert section.state is EpistemicState.THIRD_PARTY_APPROX
        assert section.third_party.provider == "approx-db"

        # Row 5: alt misses (here: transport failure after one retry) => NotFound.
        notes: list[str] = []
        down = _DownAlt()
        section = resolve_financials(
            company, RegistryOutcome.unavailable(), [down], annotate=notes.append
        )
        assert section.state is EpistemicState.NOT_FOUND
        assert section.third_party is None and section.registry_records == []
        assert down.calls == 2, "one retry, then treated as a miss"
        assert any("unreachable after retry" in note for note in notes)

        # And the NotFound state, rendered end to end: exactly one marker,
        # zero numeric tokens anywhere in the financial section.
        ctx = run_pipeline(make_config(), payload("thessaly-agritech"))
        assert not ctx.run_failed, ctx.failure_reason
        assert financial_state(ctx) is EpistemicState.NOT_FOUND
        html = _report_html(ctx)
        assert html.count('data-state="not-found"') == 1
        assert html.count("data-state=") == 1
        section_text = _financial_section_text(html)
        assert not any(ch.isdigit() for ch in section_text), section_text


# ---------------------------------------------------------------------------
# Criterion 4 — end-to-end verification against the HTTP fixture registry
# ---------------------------------------------------------------------------


def test_criterion_4_registry_verified_run_over_http_with_cited_pages(capsys):
    with criterion(capsys, 4, "HTTP fixture-registry run is RegistryVerified "
                   "with every metric cited to manifest doc ids and pages", 10.0):
        with FixtureRegistryServer(REGISTRY_DIR) as server:
            config = make_config(registry_client=HttpEndpointClient(server.base_url))
            ctx = run_pipeline(config, payload("aegean-robotics"))
        assert not ctx.run_failed, ctx.failure_reason

        section = FinancialSection.model_validate(ctx.artifacts["fin_resolve"])
        assert section.state is EpistemicState.REGISTRY_VERIFIED

        manifest = MANIFEST[AEGEAN_REG]
        indexed_doc_ids = {entry["doc_id"] for entry in manifest["index"]}
        by_year = {record.fiscal_year: record for record in section.registry_records}
        assert sorted(by_year) == sorted(int(y) for y in manifest["financials"])
        assert len(by_year) == 2

        for year, record in by_year.items():
            assert set(record.line_items) == set(METRICS)
            expected_doc = manifest["financial_doc_by_year"][str(year)]
            assert expected_doc in indexed_doc_ids
            for metric, item in record.line_items.items():
                assert item.citation.source_ref == f"doc:{expected_doc}"
                assert item.citation.page == manifest["financial_pages"][str(year)][metric]

        # The rendered table carries both fiscal years and all four metrics.
        html = _report_html(ctx)
        assert 'data-state="registry-verified"' in html
        section_text = _financial_section_text(html)
        for metric in METRICS:
            assert metric in section_text
        for year in manifest["financials"]:
            assert year in section_text


# ---------------------------------------------------------------------------
# Criterion 5 — adversarial citation-stripped numerals are rejected everywhere
# ---------------------------------------------------------------------------

NUMERALS = ("17", "4.2%", "1.250.000,00", "EUR 2M", "Q3 of 2024", "900 sites")

RETRIEVAL_ROLES = {AgentRole.SECTOR, AgentRole.COMPETITION, AgentRole.NEWS, AgentRole.SIGNALS}

BASE_INPUTS = {
    AgentRole.CONTEXT_AGENT: {"company": COMPANY},
    AgentRole.SOURCE_MAPPER: {"company": COMPANY, "profile": {}},
    AgentRole.SECTOR: {"company": COMPANY, "profile": {}, "sources": {"sources": []}},
    AgentRole.COMPETITION: {"company": COMPANY, "profile": {}, "sources": {"sources": []}},
    AgentRole.NEWS: {"company": COMPANY},
    AgentRole.SIGNALS: {"company": COMPANY},
    AgentRole.RESEARCHER: {
        "company": COMPANY, "sector": {}, "competition": {}, "news": {},
        "signals": {}, "financials": {"state": "NotFound"},
    },
    AgentRole.ANALYST: {
        "company": COMPANY, "researcher": {}, "financials": {"state": "NotFound"},
    },
    AgentRole.OVERALL_INFO: {"company": COMPANY, "profile": {}, "analyst": {}},
}

BASE_PAYLOADS = {
    AgentRole.CONTEXT_AGENT: {
        "summary": "An industrial robotics firm based in Athens.",
        "anchor_facts": [],
    },
    AgentRole.SOURCE_MAPPER: {
        "sources": [{
            "name": "Registry portal",
            "url": "https://registry.example/",
            "rationale": "Primary filings for the company.",
        }],
    },
    AgentRole.SECTOR: {"market_size": [], "trends": []},
    AgentRole.COMPETITION: {"competitors": []},
    AgentRole.NEWS: {"events": []},
    AgentRole.SIGNALS: {"signals": []},
    AgentRole.RESEARCHER: {
        "developments": [], "blind_spots": [], "consolidated_citations": [],
    },
    AgentRole.ANALYST: {
        "executive_summary": "Momentum without verified figures.",
        "scores": {"market_timing": 7, "product_differentiation": 6},
        "recommendations": [
            {"audience": "Fund", "horizon_days": 90, "action": "Wait for verified revenue."}
        ],
    },
    AgentRole.OVERALL_INFO: {"text": "A measured overview without figures."},
}


def _without(mapping: dict, key: str) -> dict:
    trimmed = dict(mapping)
    trimmed.pop(key)
    return trimmed


def _competitor(n: str, citation) -> dict:
    entry = {
        "name": "Gridbotics", "tier": "Direct",
        "funding_status": f"Raised {n} to date.",
        "activity_note": "Runs pilots with regional operators.",
        "citation": citation,
    }
    return entry if citation is not None else _without(entry, "citation")


def _news_event(n: str, citation) -> dict:
    entry = {
        "date": "2024-05-01", "kind": "Partnership",
        "headline": f"Pact covering {n} announced.", "citation": citation,
    }
    return entry if citation is not None else _without(entry, "citation")


def _signal(citation) -> dict:
    entry = {"metric": "web traffic", "value": 12.5, "direction": "up",
             "citation": citation}
    return entry if citation is not None else _without(entry, "citation")


# Each site plants a numeral whose citation is stripped, dangling (the
# citation list is empty), or missing outright — the payload's only flaw.
CORRUPTIONS: list[tuple[AgentRole, str]] = []


def _site(role: AgentRole):
    def register(fn):
        CORRUPTIONS.append((role, fn))
        return fn
    return register


@_site(AgentRole.CONTEXT_AGENT)
def _ctx_summary(base: dict, n: str) -> dict:
    return {**base, "summary": f"Founded with {n} on the books."}


@_site(AgentRole.SOURCE_MAPPER)
def _mapper_rationale(base: dict, n: str) -> dict:
    source = dict(base["sources"][0], rationale=f"Covers filings since {n}.")
    return {**base, "sources": [source]}


@_site(AgentRole.SECTOR)
def _sector_trend_dangling(base: dict, n: str) -> dict:
    return {**base, "trends": [{"text": f"Growth near {n} expected.", "citation": 0}]}


@_site(AgentRole.SECTOR)
def _sector_trend_stripped(base: dict, n: str) -> dict:
    return {**base, "trends": [{"text": f"Growth near {n} expected."}]}


@_site(AgentRole.SECTOR)
def _sector_market_size_dangling(base: dict, n: str) -> dict:
    return {**base, "market_size": [
        {"label": "TAM", "value": 4.0, "unit": "EUR billions", "citation": 0}
    ]}


@_site(AgentRole.COMPETITION)
def _competition_dangling(base: dict, n: str) -> dict:
    return {**base, "competitors": [_competitor(n, 0)]}


@_site(AgentRole.COMPETITION)
def _competition_stripped(base: dict, n: str) -> dict:
    return {**base, "competitors": [_competitor(n, None)]}


@_site(AgentRole.NEWS)
def _news_dangling(base: dict, n: str) -> dict:
    return {**base, "events": [_news_event(n, 0)]}


@_site(AgentRole.NEWS)
def _news_stripped(base: dict, n: str) -> dict:
    return {**base, "events": [_news_event(n, None)]}


@_site(AgentRole.SIGNALS)
def _signals_dangling(base: dict, n: str) -> dict:
    return {**base, "signals": [_signal(0)]}


@_site(AgentRole.SIGNALS)
def _signals_stripped(base: dict, n: str) -> dict:
    return {**base, "signals": [_signal(None)]}


@_site(AgentRole.RESEARCHER)
def _researcher_uncited_note(base: dict, n: str) -> dict:
    return {**base, "developments": [{"text": f"Pilots grew to {n}.", "citation": None}]}


@_site(AgentRole.RESEARCHER)
def _researcher_blind_spot(base: dict, n: str) -> dict:
    return {**base, "blind_spots": [f"Churn near {n} is unverified."]}


@_site(AgentRole.ANALYST)
def _analyst_summary(base: dict, n: str) -> dict:
    return {**base, "executive_summary": f"Revenue reached {n} last year."}


@_site(AgentRole.ANALYST)
def _analyst_action(base: dict, n: str) -> dict:
    recommendation = dict(base["recommendations"][0], action=f"Re-check the {n} figure.")
    return {**base, "recommendations": [recommendation]}


@_site(AgentRole.OVERALL_INFO)
def _overall_text(base: dict, n: str) -> dict:
    return {**base, "text": f"The firm reports {n} under the new plan."}


def _adversarial_alt_entries(n: str) -> list[dict]:
    """Provider entries whose figures lack a resolvable citation."""
    field = {"value": "2400000", "fiscal_year": 2023}
    citation = {
        "source_ref": "https://approx.example/org",
        "retrieved_at": "2024-06-01T00:00:00Z",
        "snippet": f"Estimated at {n}.",
    }
    return [
        # Citation key stripped from the figure.
        {"provider": "adv-db", "fields": {"revenue_estimate": field},
         "citations": [citation]},
        # Figure cites an index, but the citation list is empty.
        {"provider": "adv-db", "fields": {"revenue_estimate": {**field, "citation": 0}},
         "citations": []},
        # Figure cites past the end of the citation list.
        {"provider": "adv-db", "fields": {"revenue_estimate": {**field, "citation": 5}},
         "citations": [citation]},
    ]


class _CorruptingCompletion(CompletionProvider):
    """Fixture completions, except one role always returns a planted payload."""

    def __init__(self, role: AgentRole, payload_dict: dict):
        self._role = role
        self._payload = payload_dict
        self._inner = FixtureCompletionProvider()

    def identity(self) -> str:
        return self._inner.identity()

    def complete(self, prompt: str, context_docs) -> str:
        if prompt.splitlines()[0] == f"ROLE: {self._role.value}":
            return json.dumps({"payload": self._payload, "citations": []})
        return self._inner.complete(prompt, context_docs)


MARKER = "6660431"  # planted numeral that must never reach any rendered report


def test_criterion_5_adversarial_uncited_numerals_never_get_through(capsys):
    with criterion(capsys, 5, "500 citation-stripped adversarial outputs all "
                   "rejected or flagged; no uncited numeral reaches HTML", 60.0):
        # The baselines are valid, so each rejection below is attributable
        # to the planted numeral, not to some unrelated schema flaw.
        for role, base in BASE_PAYLOADS.items():
            assert validate_output(role, base).ok, role

        rng = random.Random(2405)
        company = _decision_company()
        rejected = 0

        for case in range(500):
            if case % 10 == 9:
                # Provider-side: an alt entry with an uncited figure is
                # rejected and treated as a miss, never surfaced.
                entry = rng.choice(_adversarial_alt_entries(rng.choice(NUMERALS)))
                notes: list[str] = []
                provider = StaticAltFinancials({COMPANY["name"]: entry}, name="adv")
                got = query_alt_provider(company, provider, annotate=notes.append)
                assert got is None
                assert any("rejected" in note for note in notes), notes
            else:
                role, corrupt = rng.choice(CORRUPTIONS)
                payload_dict = corrupt(BASE_PAYLOADS[role], rng.choice(NUMERALS))
                stub = SequenceCompletion(
                    [{"payload": payload_dict, "citations": []}] * 2
                )
                retrieval = InMemoryRetrieval({}) if role in RETRIEVAL_ROLES else None
                with pytest.raises((CitationError, SchemaRejectedError)):
                    run_agent(role, BASE_INPUTS[role], stub, retrieval)
                assert stub.calls == 2, "rejection must come after one re-ask"
            rejected += 1
        assert rejected == 500

        # End to end, a strict agent that keeps emitting an uncited numeral
        # fails its run: no report is rendered at all.
        bad_sector = _sector_trend_dangling(BASE_PAYLOADS[AgentRole.SECTOR], MARKER)
        ctx = run_pipeline(
            make_config(completion=_CorruptingCompletion(AgentRole.SECTOR, bad_sector)),
            payload("aegean-robotics"),
        )
        assert ctx.run_failed
        assert "render_report" not in ctx.artifacts
        assert ctx.snapshot_statuses()["render_report"].state is NodeState.SKIPPED

        # A degradable summary stage that emits an uncited figure is flagged;
        # the run recovers through the fallback chain and the planted numeral
        # never appears in the rendered report.
        bad_records = {"records": [{
            "fiscal_year": 2023,
            "line_items": {"Assets": {"amount": MARKER, "citation": None}},
        }]}
        ctx = run_pipeline(
            make_config(completion=_CorruptingCompletion(AgentRole.FIN_SUMMARY, bad_records)),
            payload("aegean-robotics"),
        )
        assert not ctx.run_failed, ctx.failure_reason
        assert ctx.snapshot_statuses()["fin_summary"].state is NodeState.FAILED
        assert financial_state(ctx) is not EpistemicState.REGISTRY_VERIFIED
        html = _report_html(ctx)
        assert MARKER not in html

        # A third-party entry with an uncited figure is skipped in favor of
        # the next provider; the planted numeral never appears either.
        corrupted_alt = StaticAltFinancials(
            {"Nordwind Analytics": _adversarial_alt_entries(MARKER)[1]}, name="adv"
        )
        config = make_config(
            alt_providers=(corrupted_alt,) + make_config().alt_providers
        )
        ctx = run_pipeline(config, payload("nordwind-analytics"))
        assert not ctx.run_failed, ctx.failure_reason
        assert financial_state(ctx) is EpistemicState.THIRD_PARTY_APPROX
        html = _report_html(ctx)
        assert MARKER not in html


# ---------------------------------------------------------------------------
# Criteria 6 and 7 — deterministic and concurrency-stable reports
# ---------------------------------------------------------------------------


def test_criterion_6_consecutive_runs_render_byte_identical_reports(capsys):
    with criterion(capsys, 6, "two consecutive fixture runs render "
                   "byte-identical HTML", 20.0):
        digests = []
        for attempt in range(2):
            ctx = run_pipeline(
                make_config(), payload("aegean-robotics"), run_id=f"det-{attempt}"
            )
            assert not ctx.run_failed, ctx.failure_reason
            digests.append(_sha256(_report_html(ctx)))
        assert digests[0] == digests[1]


def test_criterion_7_concurrent_runs_match_serial_reports(capsys):
    with criterion(capsys, 7, "four concurrent runs hash-identical to their "
                   "serial counterparts", 30.0):
        companies = (
            "aegean-robotics", "nordwind-analytics",
            "thessaly-agritech", "helvetic-metrics",
        )
        serial: dict[str, str] = {}
        for company_id in companies:
            ctx = run_pipeline(
                make_config(), payload(company_id), run_id=f"serial-{company_id}"
            )
            assert not ctx.run_failed, ctx.failure_reason
            serial[company_id] = _sha256(_report_html(ctx))
        # Distinct fixtures must produce distinct reports, or the comparison
        # below would be vacuous.
        assert len(set(serial.values())) == len(companies)

        shared_config = make_config()
        with ThreadPoolExecutor(max_workers=4) as pool:
            futures = {
                company_id: pool.submit(
                    partial(run_pipeline, run_id=f"concurrent-{company_id}"),
                    shared_config, payload(company_id),
                )
                for company_id in companies
            }
            for company_id, future in futures.items():
                ctx = future.result()
                assert not ctx.run_failed, ctx.failure_reason
                assert _sha256(_report_html(ctx)) == serial[company_id]
