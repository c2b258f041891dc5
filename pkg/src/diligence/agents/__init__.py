"""Agent roles: structured-output generation with per-role schemas and citation rules."""

from diligence.agents.schema import (
    ROLE_SCHEMAS,
    AgentOutput,
    AgentRole,
    collect_citation_indices,
    validate_output,
)
from diligence.agents.runner import run_agent, search

__all__ = [
    "ROLE_SCHEMAS",
    "AgentOutput",
    "AgentRole",
    "collect_citation_indices",
    "validate_output",
    "run_agent",
    "search",
]
