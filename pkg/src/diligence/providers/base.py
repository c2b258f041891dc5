"""Provider interfaces.

Adapters must be safe to call from concurrently executing nodes and must
expose a stable ``identity()`` string, which is folded into every agent
output's provider fingerprint for replay audits.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Optional, Sequence


@dataclass(frozen=True)
class ContextDoc:
    """One document handed to a completion call as grounding context."""

    source_ref: str
    text: str
    page: Optional[int] = None
    retrieved_at: str = ""


@dataclass(frozen=True)
class RetrievalResult:
    source_ref: str
    snippet: str
    retrieved_at: str


class CompletionProvider(ABC):
    """Turns a prompt plus context documents into completion text."""

    @abstractmethod
    def identity(self) -> str:
        """Stable adapter identity, e.g. ``fixture-completion/v1``."""

    @abstractmethod
    def complete(self, prompt: str, context_docs: Sequence[ContextDoc]) -> str:
        """Return the completion text; raise TransportError on transport faults."""


class RetrievalProvider(ABC):
    """Searches external sources and returns ordered, timestamped results."""

    @abstractmethod
    def identity(self) -> str: ...

    @abstractmethod
    def search(self, query: str) -> list[RetrievalResult]:
        """Return results for the query; empty list on no match."""


class AltFinancialsProvider(ABC):
    """Looks a company up in a third-party financial database."""

    @abstractmethod
    def identity(self) -> str: ...

    @abstractmethod
    def lookup(self, company: dict[str, Any]) -> Optional[dict[str, Any]]:
        """Return a structured entry for the company, or None on a miss.

        ``company`` is a plain mapping with at least ``name``; it may carry
        ``alt_identifiers`` keyed by provider name.
        """
