"""Domain models shared across the pipeline.

Everything here serializes to plain JSON via ``model_dump(mode="json")`` so
node artifacts stay byte-comparable across runs; Decimal amounts serialize as
exact strings, never floats.
"""

from __future__ import annotations

import re
from datetime import date, datetime, timezone
from decimal import Decimal
from enum import Enum
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")
_ISO_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_DIGIT_RE = re.compile(r"\d")

MetricName = Literal["Assets", "Liabilities", "Revenue", "EBIT"]
METRIC_NAMES: tuple[str, ...] = ("Assets", "Liabilities", "Revenue", "EBIT")


def has_digits(text: str) -> bool:
    return bool(_DIGIT_RE.search(text))


def validate_iso_date(value: str, field_name: str) -> str:
    if not _ISO_DATE_RE.match(value):
        raise ValueError(f"{field_name} must be an ISO date (YYYY-MM-DD), got {value!r}")
    try:
        date.fromisoformat(value)
    except ValueError as exc:
        raise ValueError(f"{field_name} is not a real calendar date: {value!r}") from exc
    return value


class CompanyRecord(BaseModel):
    """Baseline attributes from the pre-scraped company database.

    Extra keys in the source file are accepted and ignored.
    """

    model_config = ConfigDict(extra="ignore")

    company_id: str = Field(min_length=1)
    name: str = Field(min_length=1)
    founders: list[str]
    sector: str
    initial_investment_year: int = Field(ge=1900)
    headquarters: str
    registration: Optional[str] = None
    alt_identifiers: dict[str, str] = Field(default_factory=dict)

    @field_validator("initial_investment_year")
    @classmethod
    def _year_not_in_future(cls, v: int) -> int:
        this_year = date.today().year
        if v > this_year:
            raise ValueError(f"initial_investment_year {v} lies in the future")
        return v


class TriggerPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    company_id: str = Field(min_length=1)
    requested_by: str
    requested_at: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    @field_validator("requested_by")
    @classmethod
    def _email_shape(cls, v: str) -> str:
        if not _EMAIL_RE.match(v):
            raise ValueError(f"requested_by is not a plausible email address: {v!r}")
        return v


class CompanyProfile(BaseModel):
    """Compact anchoring profile; every anchor fact is verbatim from the record."""

    model_config = ConfigDict(extra="forbid")

    summary: str = Field(max_length=1200)
    anchor_facts: list[tuple[str, str]]


class Citation(BaseModel):
    """Provenance pointer. Document-derived citations must carry a page."""

    model_config = ConfigDict(extra="forbid")

    source_ref: str = Field(min_length=1)
    page: Optional[int] = Field(default=None, gt=0)
    retrieved_at: str = ""
    snippet: Optional[str] = Field(default=None, max_length=300)

    @model_validator(mode="after")
    def _document_citations_need_pages(self) -> "Citation":
        if self.source_ref.startswith("doc:") and self.page is None:
            raise ValueError(
                f"citation to document {self.source_ref!r} must carry a page number"
            )
        return self


class LineItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    amount: Decimal
    citation: Citation

    @field_validator("amount")
    @classmethod
    def _finite(cls, v: Decimal) -> Decimal:
        if not v.is_finite():
            raise ValueError("amount must be a finite decimal")
        return v

    @model_validator(mode="after")
    def _cited_to_a_page(self) -> "LineItem":
        if self.citation.page is None:
            raise ValueError("financial line items must cite a document page")
        return self


class FinancialStatementRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fiscal_year: int = Field(ge=1990)
    line_items: dict[MetricName, LineItem]

    @field_validator("fiscal_year")
    @classmethod
    def _year_not_in_future(cls, v: int) -> int:
        if v > date.today().year:
            raise ValueError(f"fiscal_year {v} lies in the future")
        return v

    @model_validator(mode="after")
    def _sign_rules(self) -> "FinancialStatementRecord":
        for name in ("Assets", "Liabilities", "Revenue"):
            item = self.line_items.get(name)
            if item is not None and item.amount < 0:
                raise ValueError(f"{name} must be non-negative, got {item.amount}")
        return self


class CorporateEvent(BaseModel):
    model_config = ConfigDict(extra="forbid")

    date: str
    kind: Literal["BoardChange", "CapitalIncrease", "StatutoryModification", "Other"]
    description: str
    citation: Citation

    @field_validator("date")
    @classmethod
    def _date_shape(cls, v: str) -> str:
        return validate_iso_date(v, "date")

    @model_validator(mode="after")
    def _cites_a_document(self) -> "CorporateEvent":
        if not self.citation.source_ref.startswith("doc:"):
            raise ValueError("corporate events must cite a registry document")
        return self


class EpistemicState(str, Enum):
    REGISTRY_VERIFIED = "RegistryVerified"
    THIRD_PARTY_APPROX = "ThirdPartyApprox"
    NOT_FOUND = "NotFound"


class ThirdPartyField(BaseModel):
    model_config = ConfigDict(extra="forbid")

    value: Decimal
    fiscal_year: Optional[int] = Field(default=None, ge=1990)
    citation: int = Field(ge=0)


class ThirdPartyEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    provider: str = Field(min_length=1)
    fields: dict[str, ThirdPartyField]
    citations: list[Citation]

    @model_validator(mode="after")
    def _field_citations_resolve(self) -> "ThirdPartyEntry":
        for name, fld in self.fields.items():
            if fld.citation >= len(self.citations):
                raise ValueError(
                    f"third-party field {name!r} cites entry {fld.citation}, but only "
                    f"{len(self.citations)} citations are attached"
                )
        return self


class FinancialSection(BaseModel):
    """Tagged union over the three provenance states of financial data.

    Exactly the payload matching ``state`` may be populated, and the NotFound
    state must be free of numerals everywhere, including its provenance note.
    """

    model_config = ConfigDict(extra="forbid")

    state: EpistemicState
    registry_records: list[FinancialStatementRecord] = Field(default_factory=list)
    corporate_events: list[CorporateEvent] = Field(default_factory=list)
    third_party: Optional[ThirdPartyEntry] = None
    provenance_note: str = ""

    @model_validator(mode="after")
    def _payload_matches_state(self) -> "FinancialSection":
        if self.state is EpistemicState.REGISTRY_VERIFIED:
            if not self.registry_records:
                raise ValueError("RegistryVerified requires at least one registry record")
            if self.third_party is not None:
                raise ValueError("RegistryVerified must not carry third-party data")
        elif self.state is EpistemicState.THIRD_PARTY_APPROX:
            if self.third_party is None:
                raise ValueError("ThirdPartyApprox requires a third-party entry")
            if self.registry_records or self.corporate_events:
                raise ValueError("ThirdPartyApprox must not carry registry data")
        else:  # NotFound
            if self.registry_records or self.corporate_events or self.third_party:
                raise ValueError("NotFound must carry no financial payload at all")
            if has_digits(self.provenance_note):
                raise ValueError(
                    "NotFound provenance note must not contain numerals: "
                    f"{self.provenance_note!r}"
                )
        return self


class DocumentIndexEntry(BaseModel):
    model_config = ConfigDict(extra="ignore")

    doc_id: str = Field(min_length=1)
    published_date: str
    title: str = ""
    kind_hint: Optional[str] = None

    @field_validator("published_date")
    @classmethod
    def _date_shape(cls, v: str) -> str:
        return validate_iso_date(v, "published_date")


class TextBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    reading_order_index: int = Field(ge=0)
    page_number: int = Field(ge=1)


class ExtractedDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    doc_id: str = Field(min_length=1)
    pages: list[list[TextBlock]]

    @model_validator(mode="after")
    def _block_invariants(self) -> "ExtractedDocument":
        count = len(self.pages)
        for page_no, blocks in enumerate(self.pages, start=1):
            last = -1
            for block in blocks:
                if block.page_number != page_no:
                    raise ValueError(
                        f"block on page {page_no} claims page_number {block.page_number}"
                    )
                if block.page_number > count:
                    raise ValueError(
                        f"page_number {block.page_number} exceeds page count {count}"
                    )
                if block.reading_order_index <= last:
                    raise ValueError(
                        f"reading_order_index not strictly increasing on page {page_no}"
                    )
                last = block.reading_order_index
        return self

    def page_count(self) -> int:
        return len(self.pages)

    def page_text(self, page_number: int) -> str:
        return "\n".join(b.text for b in self.pages[page_number - 1])


def dump_json_ready(model: BaseModel) -> dict[str, Any]:
    """JSON-mode dump: Decimals as exact strings, enums as values."""
    return model.model_dump(mode="json")
