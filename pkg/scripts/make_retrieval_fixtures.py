"""Generate the recorded-retrieval corpus for the fixture providers.

The corpus maps exact query strings to canned hits. Queries are produced by
the same code the pipeline runs (context agent -> source mapper ->
queries_for), so the recorded keys match at run time by construction.
Hit snippets are typed JSON records in the shape the fixture completion
provider distills.

Usage: python3 scripts/make_retrieval_fixtures.py
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from diligence.agents.queries import queries_for
from diligence.agents.runner import run_agent
from diligence.agents.schema import AgentRole
from diligence.intake import build_profile_output, load_company_db
from diligence.providers.fixture import FixtureCompletionProvider

ROOT = Path(__file__).resolve().parent.parent
DB_PATH = ROOT / "data" / "companies.v1.json"
OUT_PATH = ROOT / "fixtures" / "retrieval" / "corpus.v1.json"

RETRIEVED_AT = "2024-06-01"


def _slug(sector: str) -> str:
    return re.sub(r"[^a-z]+", "-", sector.lower()).strip("-") or "general"


def _hit(source_ref: str, record: dict) -> dict:
    return {
        "source_ref": source_ref,
        "snippet": json.dumps(record, ensure_ascii=False),
        "retrieved_at": RETRIEVED_AT,
    }


def _sector_hits(company: dict, seed: int) -> list[dict]:
    sector = company["sector"]
    slug = _slug(sector)
    observatory = f"https://observatory.{slug}.example/reports/annual-outlook"
    journal = f"https://journal.{slug}.example/archive/structural-shifts"
    return [
        _hit(
            observatory,
            {
                "type": "market_size",
                "label": f"European {sector} market",
                "value": float(180 + 35 * seed),
                "unit": "EUR million",
            },
        ),
        _hit(
            observatory,
            {
                "type": "trend",
                "text": f"Procurement cycles in {sector} are shortening as buyers "
                "standardise on outcome-based contracts.",
            },
        ),
        _hit(
            journal,
            {
                "type": "trend",
                "text": f"Consolidation among {sector} vendors is pushing "
                "independents toward narrower, defensible niches.",
            },
        ),
    ]


def _competition_hits(company: dict, seed: int) -> list[dict]:
    sector = company["sector"]
    slug = _slug(sector)
    briefings = f"https://briefings.{slug}.example/notes/vendor-landscape"
    tenders = f"https://tenders.example/{slug}/awards"
    return [
        _hit(
            briefings,
            {
                "type": "competitor",
                "name": f"{sector.title().replace(' ', '')} Systems GmbH",
                "tier": "Direct",
                "funding_status": f"Series B ({40 + 7 * seed}M raised)",
                "activity_note": "Expanding into the same mid-market accounts with "
                "an aggressive services bundle.",
            },
        ),
        _hit(
            tenders,
            {
                "type": "competitor",
                "name": f"{company['name'].split()[0]} Rival Labs",
                "tier": "NicheInnovator",
                "funding_status": "Seed",
                "activity_note": "Won two public tenders on price; delivery record "
                "still unproven.",
            },
        ),
    ]


def _news_hits(company: dict, seed: int) -> list[dict]:
    slug = _slug(company["sector"])
    wire = f"https://journal.{slug}.example/wire/{company['company_id']}"
    return [
        _hit(
            wire,
            {
                "type": "news_event",
                "date": f"2024-0{1 + seed % 4}-18",
                "kind": "Partnership",
                "headline": f"{company['name']} signs integration partnership with a "
                "regional distributor",
            },
        ),
        _hit(
            wire,
            {
                "type": "news_event",
                "date": f"2024-0{2 + seed % 4}-05",
                "kind": "ProductLaunch",
                "headline": f"{company['name']} ships its second-generation platform",
            },
        ),
    ]


def _signals_hits(company: dict, seed: int) -> list[dict]:
    slug = _slug(company["sector"])
    registry = f"https://registry.startups.example/{slug}/{company['company_id']}"
    return [
        _hit(
            registry,
            {
                "type": "signal",
                "metric": "monthly active deployments",
                "value": float(12 + 9 * seed),
                "direction": "up",
            },
        ),
        _hit(
            registry,
            {
                "type": "signal",
                "metric": "published reference customers",
                "value": float(3 + seed),
                "direction": "flat",
            },
        ),
    ]


def main() -> None:
    completion = FixtureCompletionProvider()
    corpus: dict[str, list[dict]] = {}

    for seed, record in enumerate(load_company_db(DB_PATH)):
        company = record.model_dump(mode="json")
        profile = build_profile_output(record, completion).payload
        mapper = run_agent(
            AgentRole.SOURCE_MAPPER,
            {"company": company, "profile": profile},
            completion,
        )
        grounded = {"company": company, "profile": profile, "sources": mapper.payload}

        sector_queries = queries_for(AgentRole.SECTOR, grounded)
        corpus[sector_queries[0]] = _sector_hits(company, seed)
        competition_queries = queries_for(AgentRole.COMPETITION, grounded)
        corpus[competition_queries[0]] = _competition_hits(company, seed)
        (news_query,) = queries_for(AgentRole.NEWS, {"company": company})
        corpus[news_query] = _news_hits(company, seed)
        (signals_query,) = queries_for(AgentRole.SIGNALS, {"company": company})
        corpus[signals_query] = _signals_hits(company, seed)

    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    OUT_PATH.write_text(
        json.dumps(corpus, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {OUT_PATH} ({len(corpus)} query keys)")


if __name__ == "__main__":
    main()
