"""Deterministic fixture providers.

The completion stub is a rule-based simulator: it reads the role name and the
INPUTS block from the prompt, consumes the grounding context documents, and
emits schema-conformant JSON. Identical prompt + context always produce an
identical completion, which is what makes whole-pipeline runs byte-stable.

Retrieval results come from a recorded JSON map keyed by the exact query
string; snippets in that corpus are compact JSON fragments tagged with a
``type`` so role stubs can consume them without fragile prose parsing.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Optional, Sequence

from diligence.errors import DiligenceError
from diligence.providers.base import (
    AltFinancialsProvider,
    CompletionProvider,
    ContextDoc,
    RetrievalProvider,
    RetrievalResult,
)


def parse_prompt(prompt: str) -> tuple[str, dict[str, Any]]:
    """Recover (role name, inputs) from a rendered prompt."""
    first_line, _, _ = prompt.partition("\n")
    if not first_line.startswith("ROLE: "):
        raise DiligenceError("prompt does not start with a ROLE header")
    role = first_line[len("ROLE: "):].strip()
    marker = "INPUTS:\n"
    start = prompt.find(marker)
    if start < 0:
        raise DiligenceError("prompt carries no INPUTS block")
    rest = prompt[start + len(marker):]
    json_line, _, _ = rest.partition("\n")
    try:
        inputs = json.loads(json_line)
    except json.JSONDecodeError as exc:
        raise DiligenceError(f"prompt INPUTS block is not valid JSON: {exc}") from exc
    return role, inputs


def _snippet_records(context_docs: Sequence[ContextDoc]) -> list[tuple[int, dict[str, Any]]]:
    """(doc index, parsed snippet) for every context doc whose text is JSON."""
    out = []
    for i, doc in enumerate(context_docs):
        try:
            decoded = json.loads(doc.text)
        except (json.JSONDecodeError, TypeError):
            continue
        if isinstance(decoded, dict):
            out.append((i, decoded))
    return out


class FixtureRetrievalProvider(RetrievalProvider):
    """Canned search results keyed by the exact query string."""

    def __init__(self, corpus_path: str | Path):
        path = Path(corpus_path)
        if not path.is_file():
            raise DiligenceError(f"retrieval fixture corpus not found: {path}")
        self._corpus: dict[str, list[dict[str, str]]] = json.loads(
            path.read_text(encoding="utf-8")
        )

    def identity(self) -> str:
        return "fixture-retrieval/v1"

    def search(self, query: str) -> list[RetrievalResult]:
        return [
            RetrievalResult(
                source_ref=hit["source_ref"],
                snippet=hit["snippet"],
                retrieved_at=hit["retrieved_at"],
            )
            for hit in self._corpus.get(query, [])
        ]


class FixtureCompletionProvider(CompletionProvider):
    """Role-dispatched deterministic completions."""

    def identity(self) -> str:
        return "fixture-completion/v1"

    def complete(self, prompt: str, context_docs: Sequence[ContextDoc]) -> str:
        role, inputs = parse_prompt(prompt)
        handler = getattr(self, f"_role_{_snake(role)}", None)
        if handler is None:
            raise DiligenceError(f"fixture completion has no rule for role {role!r}")
        return json.dumps(handler(inputs, context_docs))

    # -- intake & mapping --------------------------------------------------

    def _role_context_agent(self, inputs, context_docs):
        company = inputs["company"]
        founders = ", ".join(company.get("founders", []))
        summary = (
            f"{company['name']} is a {company['sector']} company headquartered in "
            f"{company['headquarters']}, founded by {founders}. The fund holds it "
            "in the diligence portfolio; the investment year, registry status and "
            "other baseline facts are pinned verbatim in the anchor facts."
        )
        facts = [
            ["name", company["name"]],
            ["sector", company["sector"]],
            ["headquarters", company["headquarters"]],
            ["initial_investment_year", str(company["initial_investment_year"])],
        ]
        facts += [["founders", f] for f in company.get("founders", [])]
        if company.get("registration"):
            facts.append(["registration", company["registration"]])
        return {"payload": {"summary": summary, "anchor_facts": facts}, "citations": []}

    def _role_source_mapper(self, inputs, context_docs):
        sector = inputs["company"]["sector"]
        slug = re.sub(r"[^a-z]+", "-", sector.lower()).strip("-") or "general"
        title = sector.title()
        sources = [
            {
                "name": f"{title} Market Observatory",
                "url": f"https://observatory.{slug}.example/reports",
                "rationale": "Publishes recurring sector reports with transparent methodology notes.",
            },
            {
                "name": f"{title} Trade Journal",
                "url": f"https://journal.{slug}.example/archive",
                "rationale": "Editorially curated industry coverage with named correspondents.",
            },
            {
                "name": "Pan-European Startup Registry",
                "url": f"https://registry.startups.example/{slug}",
                "rationale": "Aggregates funding disclosures filed with national registries.",
            },
            {
                "name": f"{title} Analyst Briefings",
                "url": f"https://briefings.{slug}.example/notes",
                "rationale": "Analyst notes that separate vendor claims from observed deployments.",
            },
            {
                "name": "Procurement Tender Monitor",
                "url": f"https://tenders.example/{slug}",
                "rationale": "Public tender awards reveal real commercial traction in the sector.",
            },
        ]
        return {"payload": {"sources": sources}, "citations": []}

    # -- retrieval-grounded intelligence ------------------------------------

    def _grounded(self, context_docs, wanted_type):
        hits = []
        for doc_index, record in _snippet_records(context_docs):
            if record.get("type") == wanted_type:
                hits.append((doc_index, record))
        return hits

    def _role_sector(self, inputs, context_docs):
        used: list[int] = []

        def cite(doc_index: int) -> int:
            if doc_index not in used:
                used.append(doc_index)
            return used.index(doc_index)

        market_size = [
            {
                "label": rec["label"],
                "value": rec["value"],
                "unit": rec["unit"],
                "citation": cite(i),
            }
            for i, rec in self._grounded(context_docs, "market_size")
        ]
        trends = [
            {"text": rec["text"], "citation": cite(i)}
            for i, rec in self._grounded(context_docs, "trend")
        ]
        return {
            "payload": {"market_size": market_size, "trends": trends},
            "citations": [{"context_doc": i} for i in used],
        }

    def _role_competition(self, inputs, context_docs):
        competitors = []
        citations = []
        for i, rec in self._grounded(context_docs, "competitor"):
            competitors.append(
                {
                    "name": rec["name"],
                    "tier": rec["tier"],
                    "funding_status": rec["funding_status"],
                    "activity_note": rec["activity_note"],
                    "citation": len(citations),
                }
            )
            citations.append({"context_doc": i})
        return {"payload": {"competitors": competitors}, "citations": citations}

    def _role_news(self, inputs, context_docs):
        events = []
        citations = []
        for i, rec in self._grounded(context_docs, "news_event"):
            events.append(
                {
                    "date": rec["date"],
                    "kind": rec["kind"],
                    "headline": rec["headline"],
                    "citation": len(citations),
                }
            )
            citations.append({"context_doc": i})
        events.sort(key=lambda e: (e["date"], e["headline"]))
        return {"payload": {"events": events}, "citations": citations}

    def _role_signals(self, inputs, context_docs):
        signals = []
        citations = []
        for i, rec in self._grounded(context_docs, "signal"):
            signals.append(
                {
                    "metric": rec["metric"],
                    "value": rec["value"],
                    "direction": rec["direction"],
                    "citation": len(citations),
                }
            )
            citations.append({"context_doc": i})
        return {"payload": {"signals": signals}, "citations": citations}

    # -- synthesis -----------------------------------------------------------

    def _role_researcher(self, inputs, context_docs):
        citations: list[dict[str, Any]] = []
        developments: list[dict[str, Any]] = []

        def adopt(upstream_output: dict[str, Any], index: int) -> Optional[int]:
            upstream_citations = upstream_output.get("citations", [])
            if not (0 <= index < len(upstream_citations)):
                return None
            citations.append(upstream_citations[index])
            return len(citations) - 1

        news = inputs["news"]
        for event in news.get("payload", {}).get("events", []):
            cite = adopt(news, event["citation"])
            developments.append(
                {"text": f"{event['headline']} ({event['date']})", "citation": cite}
            )
        signals = inputs["signals"]
        for entry in signals.get("payload", {}).get("signals", []):
            cite = adopt(signals, entry["citation"])
            developments.append(
                {
                    "text": f"Tracked signal: {entry['metric']} is trending "
                    f"{entry['direction']} at {entry['value']}.",
                    "citation": cite,
                }
            )

        blind_spots = [
            "Customer retention beyond vendor-reported anecdotes is unverified.",
            "No independent view of the founding team's hiring pipeline.",
        ]
        financials = inputs["financials"]
        if financials.get("state") == "NotFound":
            blind_spots.append(
                "Official filings could not be retrieved, so capital structure "
                "remains a blind spot."
            )
        elif financials.get("state") == "ThirdPartyApprox":
            blind_spots.append(
                "Financials rest on a third-party approximation pending registry "
                "verification."
            )
        return {
            "payload": {
                "developments": developments,
                "blind_spots": blind_spots,
                "consolidated_citations": list(range(len(citations))),
            },
            "citations": citations,
        }

    def _role_analyst(self, inputs, context_docs):
        researcher = inputs["researcher"].get("payload", {})
        financials = inputs["financials"]
        state = financials.get("state", "NotFound")
        momentum = len(researcher.get("developments", []))
        caution = len(researcher.get("blind_spots", []))

        timing = max(1, min(10, 4 + momentum - caution // 2))
        differentiation = max(
            1,
            min(10, 5 + (2 if state == "RegistryVerified" else 1 if state == "ThirdPartyApprox" else -2)),
        )
        state_clause = {
            "RegistryVerified": "registry-verified accounts anchor the financial picture",
            "ThirdPartyApprox": "the financial picture rests on third-party figures",
            "NotFound": "the financial picture is an explicit gap",
        }[state]
        summary = (
            f"{inputs['company']['name']} shows "
            f"{'strong' if momentum >= 4 else 'moderate' if momentum >= 2 else 'thin'} "
            f"commercial momentum while {state_clause}. Key risks concentrate in the "
            "blind spots recorded by research synthesis."
        )
        if state == "RegistryVerified":
            recs = [
                {
                    "audience": "Fund",
                    "horizon_days": 90,
                    "action": "Commission independent customer reference checks before the next follow-on decision.",
                },
                {
                    "audience": "Startup",
                    "horizon_days": 120,
                    "action": "Convert pilot deployments into reference-able multi-year contracts.",
                },
            ]
        elif state == "ThirdPartyApprox":
            recs = [
                {
                    "audience": "Fund",
                    "horizon_days": 60,
                    "action": "Request management accounts to corroborate the third-party financial approximation.",
                },
                {
                    "audience": "Startup",
                    "horizon_days": 150,
                    "action": "File audited statements with the home registry to close the verification gap.",
                },
            ]
        else:
            recs = [
                {
                    "audience": "Fund",
                    "horizon_days": 30,
                    "action": "Escalate the missing-filings gap to the portfolio-monitoring committee.",
                },
                {
                    "audience": "Startup",
                    "horizon_days": 90,
                    "action": "Provide management accounts directly while registry publication is pending.",
                },
            ]
        return {
            "payload": {
                "executive_summary": summary,
                "scores": {"market_timing": timing, "product_differentiation": differentiation},
                "recommendations": recs,
            },
            "citations": [],
        }

    def _role_overall_info(self, inputs, context_docs):
        company = inputs["company"]
        scores = inputs["analyst"].get("payload", {}).get("scores", {})
        timing_word = "favorable" if scores.get("market_timing", 0) >= 6 else "developing"
        text = (
            f"{company['name']} is building its position in {company['sector']} from "
            f"{company['headquarters']}. Independent diligence finds {timing_word} market "
            "timing and a differentiated offering, with open questions noted "
            "transparently in the accompanying analyst assessment. Financial "
            "provenance is labeled explicitly, so readers can see exactly which "
            "figures are registry-verified, approximated, or unavailable."
        )
        return {"payload": {"text": text}, "citations": []}

    # -- document distillation ------------------------------------------------

    _METRIC_LINE = re.compile(r"^(Assets|Liabilities|Revenue|EBIT)\s+(-?[0-9][0-9.,]*)$")
    _YEAR_LINE = re.compile(r"FISCAL YEAR (\d{4})")

    def _role_fin_summary(self, inputs, context_docs):
        by_year: dict[int, dict[str, dict[str, Any]]] = {}
        for doc_index, doc in enumerate(context_docs):
            year_match = self._YEAR_LINE.search(doc.text)
            if not year_match:
                continue
            year = int(year_match.group(1))
            for line in doc.text.splitlines():
                metric_match = self._METRIC_LINE.match(line.strip())
                if not metric_match:
                    continue
                metric, amount = metric_match.groups()
                by_year.setdefault(year, {})[metric] = {
                    "amount": amount,
                    "citation": doc_index,
                }
        records = [
            {"fiscal_year": year, "line_items": items}
            for year, items in sorted(by_year.items(), reverse=True)
        ]
        return {"records": records}

    _DATE_LINE = re.compile(r"^DATE:\s*(\d{4}-\d{2}-\d{2})$", re.MULTILINE)
    _SUBJECT_LINE = re.compile(r"^SUBJECT:\s*(.+)$", re.MULTILINE)

    def _role_mod_summary(self, inputs, context_docs):
        events = []
        for doc_index, doc in enumerate(context_docs):
            date_match = self._DATE_LINE.search(doc.text)
            subject_match = self._SUBJECT_LINE.search(doc.text)
            if not (date_match and subject_match):
                continue
            subject = subject_match.group(1).strip()
            lowered = subject.lower()
            if "board" in lowered:
                kind = "BoardChange"
            elif "capital" in lowered:
                kind = "CapitalIncrease"
            elif "articles" in lowered or "statut" in lowered:
                kind = "StatutoryModification"
            else:
                kind = "Other"
            events.append(
                {
                    "date": date_match.group(1),
                    "kind": kind,
                    "description": subject,
                    "citation": doc_index,
                }
            )
        return {"events": events}


def _snake(role_name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", role_name).lower()


def normalize_company_name(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


class FixtureAltFinancialsProvider(AltFinancialsProvider):
    """Third-party database stub backed by a JSON file.

    The file maps companies to entries two ways: ``by_id`` keyed by the
    provider-specific identifier from CompanyRecord.alt_identifiers, and
    ``by_name`` keyed by normalized company name.
    """

    def __init__(self, data_path: str | Path, provider_name: Optional[str] = None):
        path = Path(data_path)
        if not path.is_file():
            raise DiligenceError(f"alt-financials fixture not found: {path}")
        self._data = json.loads(path.read_text(encoding="utf-8"))
        self.provider_name = provider_name or path.stem

    def identity(self) -> str:
        return f"fixture-altfin/{self.provider_name}"

    def lookup(self, company: dict[str, Any]) -> Optional[dict[str, Any]]:
        ident = (company.get("alt_identifiers") or {}).get(self.provider_name)
        if ident is not None:
            hit = self._data.get("by_id", {}).get(ident)
            if hit is not None:
                return hit
        name = normalize_company_name(str(company.get("name", "")))
        return self._data.get("by_name", {}).get(name)
