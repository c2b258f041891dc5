"""Registry-portal client: document index, two-stream classification, PDF fetch."""

from diligence.registry.classify import DocumentClass, classify_documents
from diligence.registry.client import (
    DirectCorpusClient,
    EndpointClient,
    HttpEndpointClient,
    PdfBlob,
    fetch_document_index,
    fetch_pdf,
    has_valid_registry_number,
    is_valid_argemi,
    select_recent,
)

__all__ = [
    "DocumentClass",
    "classify_documents",
    "DirectCorpusClient",
    "EndpointClient",
    "HttpEndpointClient",
    "PdfBlob",
    "fetch_document_index",
    "fetch_pdf",
    "has_valid_registry_number",
    "is_valid_argemi",
    "select_recent",
]
