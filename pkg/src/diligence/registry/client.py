"""Client operations for the official company-registry portal.

The portal exposes two read-only endpoints:

* ``GET {base}/index?reg=<number>`` -- JSON document index for a registry
  number.  The payload declares how many documents exist (``total``) next to
  the list it actually returns, so a truncated reply is detectable.
* ``GET {base}/doc/<doc_id>`` -- the raw PDF bytes of one filing.

Transport is abstracted behind :class:`EndpointClient` so the same operations
run against the live portal, a local fixture server, or a plain directory of
fixture files.
"""

from __future__ import annotations

import hashlib
import json
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import httpx

from diligence.errors import (
    MalformedPayloadError,
    NotFoundTransportError,
    TransportError,
)
from diligence.models import CompanyRecord, DocumentIndexEntry

_ARGEMI_PATTERN = re.compile(r"^[0-9]{6,15}$")


def is_valid_argemi(value: Optional[str]) -> bool:
    """True when *value* is a well-formed registry number: 6-15 digits."""
    return bool(value) and _ARGEMI_PATTERN.match(value) is not None


def has_valid_registry_number(record: CompanyRecord) -> str:
    """Routing predicate: ``"Yes"`` when the company carries a usable
    registry number, ``"No"`` otherwise.  Pure; never raises."""
    return "Yes" if is_valid_argemi(record.registration) else "No"


@dataclass(frozen=True)
class PdfBlob:
    """One fetched filing: raw bytes plus a content hash for provenance."""

    doc_id: str
    data: bytes = field(repr=False)
    content_hash: str

    @staticmethod
    def of(doc_id: str, data: bytes) -> "PdfBlob":
        return PdfBlob(
            doc_id=doc_id,
            data=data,
            content_hash=hashlib.sha256(data).hexdigest(),
        )


class EndpointClient(ABC):
    """Minimal transport surface the registry operations are written against."""

    @abstractmethod
    def get_index(self, registry_number: str) -> Any:
        """Return the parsed JSON index payload for *registry_number*.

        Raises :class:`TransportError` when the portal is unreachable and
        :class:`MalformedPayloadError` when the body is not valid JSON.
        """

    @abstractmethod
    def get_document(self, doc_id: str) -> bytes:
        """Return the raw bytes of one filing.

        Raises :class:`NotFoundTransportError` for an unknown document and
        :class:`TransportError` for other transport failures.
        """


class HttpEndpointClient(EndpointClient):
    """Talks to a registry portal (live or fixture server) over HTTP."""

    def __init__(self, base_url: str, *, timeout: float = 10.0) -> None:
        self._base_url = base_url.rstrip("/")
        self._timeout = timeout

    @property
    def base_url(self) -> str:
        return self._base_url

    def _get(self, path: str) -> httpx.Response:
        url = f"{self._base_url}{path}"
        try:
            response = httpx.get(url, timeout=self._timeout)
        except httpx.HTTPError as exc:
            raise TransportError(f"registry request failed: {url}: {exc}") from exc
        if response.status_code == 404:
            raise NotFoundTransportError(f"registry returned 404 for {url}")
        if response.status_code >= 400:
            raise TransportError(
                f"registry returned HTTP {response.status_code} for {url}"
            )
        return response

    def get_index(self, registry_number: str) -> Any:
        response = self._get(f"/index?reg={registry_number}")
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedPayloadError(
                f"registry index response is not valid JSON: {exc}"
            ) from exc

    def get_document(self, doc_id: str) -> bytes:
        return self._get(f"/doc/{doc_id}").content


class DirectCorpusClient(EndpointClient):
    """Serves the same protocol straight from a fixture corpus directory.

    Layout: ``<corpus>/<registry_number>/index.json`` holds the document
    list for one company and ``<corpus>/<registry_number>/docs/<doc_id>.pdf``
    holds each filing.  A registry number without a directory resolves to an
    empty index, mirroring a registered company with no retrievable filings.
    """

    def __init__(self, corpus_dir: str | Path) -> None:
        self._corpus = Path(corpus_dir)

    def get_index(self, registry_number: str) -> Any:
        index_path = self._corpus / registry_number / "index.json"
        if not index_path.is_file():
            return {"registry_number": registry_number, "total": 0, "documents": []}
        try:
            documents = json.loads(index_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise MalformedPayloadError(
                f"fixture index unreadable: {index_path}: {exc}"
            ) from exc
        return {
            "registry_number": registry_number,
            "total": len(documents),
            "documents": documents,
        }

    def get_document(self, doc_id: str) -> bytes:
        matches = sorted(self._corpus.glob(f"*/docs/{doc_id}.pdf"))
        if not matches:
            raise NotFoundTransportError(f"no fixture document: {doc_id}")
        try:
            return matches[0].read_bytes()
        except OSError as exc:
            raise TransportError(f"fixture document unreadable: {doc_id}: {exc}") from exc


def fetch_document_index(
    registry_number: str, client: EndpointClient
) -> list[DocumentIndexEntry]:
    """Fetch and validate the filing index for one registry number.

    Rejects payloads that are structurally unusable: wrong top-level shape,
    an entry that does not parse, a duplicated ``doc_id``, or a reply that
    declares more documents than it returned (truncated single page).
    """
    if not is_valid_argemi(registry_number):
        raise MalformedPayloadError(
            f"not a valid registry number: {registry_number!r}"
        )
    payload = client.get_index(registry_number)
    if not isinstance(payload, dict) or not isinstance(payload.get("documents"), list):
        raise MalformedPayloadError(
            "registry index payload must be an object with a 'documents' list"
        )
    documents = payload["documents"]
    declared = payload.get("total", len(documents))
    if not isinstance(declared, int) or declared < 0:
        raise MalformedPayloadError(f"registry index declares bad total: {declared!r}")
    if declared > len(documents):
        raise MalformedPayloadError(
            f"registry index truncated: declares {declared} documents, returned "
            f"{len(documents)}"
        )

    entries: list[DocumentIndexEntry] = []
    seen: set[str] = set()
    for position, raw in enumerate(documents):
        if not isinstance(raw, dict):
            raise MalformedPayloadError(
                f"registry index documents[{position}] is not an object"
            )
        try:
            entry = DocumentIndexEntry.model_validate(raw)
        except ValueError as exc:
            raise MalformedPayloadError(
                f"registry index documents[{position}] is invalid: {exc}"
            ) from exc
        if entry.doc_id in seen:
            raise MalformedPayloadError(
                f"registry index repeats doc_id {entry.doc_id!r}"
            )
        seen.add(entry.doc_id)
        entries.append(entry)
    return entries


def select_recent(
    entries: Sequence[DocumentIndexEntry], limit: int
) -> list[DocumentIndexEntry]:
    """The *limit* most recent entries: published date descending, ties broken
    by ``doc_id`` ascending.  Input order never affects the result."""
    if limit < 0:
        raise ValueError(f"limit must be non-negative, got {limit}")
    ranked = sorted(entries, key=lambda e: e.doc_id)
    ranked.sort(key=lambda e: e.published_date, reverse=True)
    return ranked[:limit]


def fetch_pdf(doc_id: str, client: EndpointClient) -> PdfBlob:
    """Fetch one filing and verify it is plausibly a PDF before returning it."""
    data = client.get_document(doc_id)
    if not data:
        raise MalformedPayloadError(f"document {doc_id!r} came back empty")
    if not data.startswith(b"%PDF-"):
        raise MalformedPayloadError(
            f"document {doc_id!r} is not a PDF (bad magic bytes)"
        )
    return PdfBlob.of(doc_id, data)
