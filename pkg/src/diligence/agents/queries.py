"""Deterministic retrieval-query construction per agent role.

Queries are pure functions of the role's inputs, so the recorded retrieval
fixtures can be generated from the same code and will match at run time by
construction. Sector and competition queries interpolate the top-k mapped
sources (k configurable, default 5).
"""

from __future__ import annotations

from typing import Any

from diligence.agents.schema import AgentRole

DEFAULT_TOP_K_SOURCES = 5


def _top_source_urls(inputs: dict[str, Any], k: int) -> list[str]:
    mapped = inputs.get("sources") or {}
    entries = mapped.get("sources") if isinstance(mapped, dict) else None
    if not entries:
        return []
    return [e["url"] for e in entries[:k] if isinstance(e, dict) and e.get("url")]


def _company_name(inputs: dict[str, Any]) -> str:
    company = inputs.get("company") or {}
    return str(company.get("name", "")).strip()


def _sector(inputs: dict[str, Any]) -> str:
    company = inputs.get("company") or {}
    return str(company.get("sector", "")).strip()


def queries_for(
    role: AgentRole, inputs: dict[str, Any], top_k_sources: int = DEFAULT_TOP_K_SOURCES
) -> list[str]:
    name = _company_name(inputs)
    sector = _sector(inputs)
    urls = _top_source_urls(inputs, top_k_sources)

    if role is AgentRole.SECTOR:
        queries = [f"{sector} market size and growth outlook"]
        queries += [f"{sector} market analysis site:{url}" for url in urls]
        return queries
    if role is AgentRole.COMPETITION:
        queries = [f"{name} competitors {sector}"]
        queries += [f"{sector} competitive landscape site:{url}" for url in urls]
        return queries
    if role is AgentRole.NEWS:
        return [f"{name} partnership OR launch OR funding announcement"]
    if role is AgentRole.SIGNALS:
        return [f"{name} {sector} traction metrics investment signals"]
    return []
