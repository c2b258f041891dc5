"""Explicit degradation ladder for company financial data.

Financial figures enter the report in exactly one of three provenance
states -- registry-verified, third-party approximation, or an honest
"not found" -- and the transitions between them are decided here, in one
place, by a small total function over what actually happened upstream:

====================================  =================================
situation                             resulting state
====================================  =================================
registry records extracted            RegistryVerified
registry reachable but nothing        alt lookup -> hit: ThirdPartyApprox
usable (empty index, all filings            -> miss: NotFound
unreadable, branch failed)
no usable registry number at all      alt lookup -> hit: ThirdPartyApprox
                                            -> miss: NotFound
====================================  =================================

Nothing below this module may invent, average, or carry over a figure:
a NotFound section contains no numbers anywhere, and its provenance note
says *why* in words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

from diligence.errors import TransportError
from diligence.models import (
    CompanyRecord,
    CorporateEvent,
    EpistemicState,
    FinancialSection,
    FinancialStatementRecord,
    ThirdPartyEntry,
)
from diligence.providers.base import AltFinancialsProvider

Annotate = Callable[[str], None]

RegistryStatus = Literal["success", "empty", "failed", "unavailable"]


@dataclass
class RegistryOutcome:
    """What the official-registry branch actually produced.

    ``status`` meanings: ``success`` -- filings were retrieved and at least
    attempted extraction; ``empty`` -- the registry answered but listed no
    usable filings; ``failed`` -- the branch ran and broke (transport,
    corrupt documents, rejected extraction); ``unavailable`` -- the branch
    never ran because the company has no usable registry number.
    """

    status: RegistryStatus
    records: list[FinancialStatementRecord] = field(default_factory=list)
    events: list[CorporateEvent] = field(default_factory=list)
    detail: str = ""

    @staticmethod
    def unavailable(detail: str = "no usable registry number on record") -> "RegistryOutcome":
        return RegistryOutcome(status="unavailable", detail=detail)


def _strip_digits(text: str) -> str:
    """Digit-free paraphrase for provenance notes that must carry none."""
    return re.sub(r"[0-9]+", "some", text)


def query_alt_provider(
    company: CompanyRecord,
    provider: AltFinancialsProvider,
    *,
    annotate: Optional[Annotate] = None,
) -> Optional[ThirdPartyEntry]:
    """Ask one third-party provider for approximate financials.

    A transport failure is retried once; a second failure is a miss, with the
    cause recorded, never an exception -- fallback must not take the run down.
    An entry whose figures are not all citation-backed is rejected and also
    treated as a miss: an unsourced approximation is worse than none.
    """

    def note(message: str) -> None:
        if annotate is not None:
            annotate(message)

    raw = None
    for attempt in (1, 2):
        try:
            raw = provider.lookup(company.model_dump(mode="json"))
            break
        except TransportError as exc:
            if attempt == 1:
                note(f"alt provider {provider.identity()} retry: {exc}")
                continue
            note(f"alt provider {provider.identity()} unreachable after retry: {exc}")
            return None
    if raw is None:
        note(f"alt provider {provider.identity()}: no entry for {company.company_id}")
        return None
    try:
        entry = ThirdPartyEntry.model_validate(raw)
    except ValueError as exc:
        note(
            f"alt provider {provider.identity()} entry rejected "
            f"(uncited or malformed figures): {exc}"
        )
        return None
    return entry


def _alt_chain(
    company: CompanyRecord,
    providers: Sequence[AltFinancialsProvider],
    annotate: Optional[Annotate],
) -> Optional[ThirdPartyEntry]:
    for provider in providers:
        entry = query_alt_provider(company, provider, annotate=annotate)
        if entry is not None:
            return entry
    return None


def resolve_financials(
    company: CompanyRecord,
    registry: RegistryOutcome,
    alt_providers: Sequence[AltFinancialsProvider] = (),
    *,
    annotate: Optional[Annotate] = None,
    alt_entry: Optional[ThirdPartyEntry] = None,
    alt_attempted: bool = False,
) -> FinancialSection:
    """Fold the registry outcome and the fallback chain into one section.

    Total over every combination of registry status and alt availability;
    the result always validates as exactly one of the three states.

    When the caller already ran the third-party chain (``alt_attempted``),
    its result is passed through ``alt_entry`` and the chain is not queried
    a second time here.
    """
    if registry.status == "success" and registry.records:
        return FinancialSection(
            state=EpistemicState.REGISTRY_VERIFIED,
            registry_records=registry.records,
            corporate_events=registry.events,
            provenance_note=(
                "Figures extracted from official registry filings; every line item "
                "cites the filing page it was read from."
            ),
        )

    if registry.status == "success":
        # ran to completion yet produced no records: treat as empty
        reason = "registry filings yielded no extractable financial records"
    elif registry.status == "empty":
        reason = registry.detail or "the registry listed no usable filings"
    elif registry.status == "failed":
        reason = registry.detail or "the registry branch failed"
    else:
        reason = registry.detail or "no usable registry number on record"

    entry = alt_entry if alt_attempted else _alt_chain(company, alt_providers, annotate)
    if entry is not None:
        # the note renders inside the financial section, where every numeral
        # must be a cited figure -- so the note itself stays digit-free
        return FinancialSection(
            state=EpistemicState.THIRD_PARTY_APPROX,
            third_party=entry,
            provenance_note=_strip_digits(
                f"Official registry data unavailable ({reason}); figures below are "
                f"approximations reported by {entry.provider} and are cited to that "
                "source, not to statutory filings."
            ),
        )

    attempted = (
        "the configured third-party sources were tried"
        if (alt_providers or alt_attempted)
        else "no third-party source was available"
    )
    return FinancialSection(
        state=EpistemicState.NOT_FOUND,
        provenance_note=_strip_digits(
            f"No verified financial data could be retrieved: {reason}, and "
            f"{attempted} without a usable result. Figures are omitted rather "
            "than estimated."
        ),
    )
