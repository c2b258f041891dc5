"""Splits a registry filing index into the two streams the pipeline consumes.

Registry portals label filings loosely (free-text Greek or English titles, an
optional machine hint), so classification runs off a versioned keyword table
shipped with the package.  Bumping the table means shipping a new
``keywords.v<N>.json`` -- the version is part of the classifier's identity so
reruns against old tables stay reproducible.
"""

from __future__ import annotations

import json
import unicodedata
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

from diligence.models import DocumentIndexEntry

KEYWORD_TABLE_VERSION = 1


class DocumentClass(str, Enum):
    FINANCIAL_STATEMENT = "FinancialStatement"
    CORPORATE_MODIFICATION = "CorporateModification"


def _fold(text: str) -> str:
    """Lowercase and strip combining accents so keyword stems match both
    accented and unaccented spellings (Greek titles appear in either)."""
    lowered = text.lower()
    decomposed = unicodedata.normalize("NFD", lowered)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


@lru_cache(maxsize=4)
def _keyword_table(version: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    name = f"keywords.v{version}.json"
    raw = (
        resources.files("diligence.registry").joinpath(name).read_text(encoding="utf-8")
    )
    table = json.loads(raw)
    financial = tuple(_fold(k) for k in table["financial"])
    modification = tuple(_fold(k) for k in table["modification"])
    return financial, modification


def _match(text: Optional[str], keywords: tuple[str, ...]) -> bool:
    if not text:
        return False
    folded = _fold(text)
    return any(keyword in folded for keyword in keywords)


def classify_entry(
    entry: DocumentIndexEntry, *, table_version: int = KEYWORD_TABLE_VERSION
) -> DocumentClass:
    """Classify one index entry.

    The machine hint wins when it matches either keyword set; otherwise the
    title decides; anything still ambiguous defaults to a corporate
    modification, the safer bucket -- a misfiled financial statement there
    costs coverage, while the reverse would inject non-financial text into
    amount extraction.
    """
    financial, modification = _keyword_table(table_version)
    for text in (entry.kind_hint, entry.title):
        if _match(text, financial):
            return DocumentClass.FINANCIAL_STATEMENT
        if _match(text, modification):
            return DocumentClass.CORPORATE_MODIFICATION
    return DocumentClass.CORPORATE_MODIFICATION


def classify_documents(
    entries: Sequence[DocumentIndexEntry],
    *,
    table_version: int = KEYWORD_TABLE_VERSION,
) -> tuple[list[DocumentIndexEntry], list[DocumentIndexEntry]]:
    """Partition *entries* into ``(financials, modifications)``.

    Total: every entry lands in exactly one stream, in input order.
    """
    financials: list[DocumentIndexEntry] = []
    modifications: list[DocumentIndexEntry] = []
    for entry in entries:
        if classify_entry(entry, table_version=table_version) is (
            DocumentClass.FINANCIAL_STATEMENT
        ):
            financials.append(entry)
        else:
            modifications.append(entry)
    return financials, modifications
