"""Pluggable provider interfaces and adapters.

Three provider families feed the pipeline: completion (structured text
generation), retrieval (search over external sources), and alternative
financials (third-party company databases). Deterministic fixture adapters
are the defaults; recorded-replay and live adapters share the same
interfaces.
"""

from diligence.providers.base import (
    AltFinancialsProvider,
    CompletionProvider,
    RetrievalProvider,
    RetrievalResult,
)

__all__ = [
    "AltFinancialsProvider",
    "CompletionProvider",
    "RetrievalProvider",
    "RetrievalResult",
]
