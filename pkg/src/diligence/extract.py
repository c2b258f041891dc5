"""Turning fetched registry PDFs into structured, citable records.

Three layers live here:

* a pluggable text extractor (:class:`ExtractorBackend`) with a baseline
  implementation that parses the PDF text layer directly -- object table,
  page tree, FlateDecode/ASCII85 content streams, ``BT``/``ET`` text blocks;
  one shown string becomes one :class:`~diligence.models.TextBlock`, ordered
  by reading position rather than stream position: columns left to right,
  top to bottom within a column (the rule a reader applies to a two-column
  balance sheet),
* a locale-aware amount parser (:func:`parse_amount`) that distinguishes the
  Greek convention (``1.250.000,00``) from the anglophone one
  (``1,250,000.00``) and reports which it assumed,
* summarisation operations that hand page text to a completion provider and
  validate every returned figure and event against the source pages before
  anything downstream may use it.  A claim that cannot be tied to a real page
  of a real document is rejected here, not rendered later.

The baseline extractor intentionally supports the profile its inputs use
(uncompressed or Flate/ASCII85 content streams, literal/hex strings, a
single-level or nested page tree) and fails loudly -- ``CorruptPdfError`` --
on anything structurally unsound, rather than guessing.
"""

from __future__ import annotations

import base64
import json
import re
import zlib
from abc import ABC, abstractmethod
from bisect import bisect_right
from decimal import Decimal, InvalidOperation
from typing import Any, Callable, Mapping, NamedTuple, Optional, Sequence

from diligence.errors import (
    CitationError,
    CorruptPdfError,
    SchemaRejectedError,
)
from diligence.models import (
    METRIC_NAMES,
    Citation,
    CorporateEvent,
    ExtractedDocument,
    FinancialStatementRecord,
    LineItem,
    TextBlock,
    validate_iso_date,
)
from diligence.providers.base import CompletionProvider, ContextDoc
from diligence.registry.client import PdfBlob

Annotate = Callable[[str], None]

# --------------------------------------------------------------------------
# PDF text-layer extraction
# --------------------------------------------------------------------------


class ExtractorBackend(ABC):
    """Strategy interface: raw PDF bytes to pages of text-block strings."""

    name: str = "abstract"

    @abstractmethod
    def extract_pages(self, data: bytes) -> list[list[str]]:
        """Return one list of block strings per page, in document order.

        A page without a text layer yields an empty list.  Structurally
        broken input raises :class:`CorruptPdfError`.
        """


_OBJ_RE = re.compile(rb"(\d+)\s+\d+\s+obj\b(.*?)\bendobj", re.S)
_REF_RE = re.compile(rb"(\d+)\s+\d+\s+R\b")
_NAME_FILTER_RE = re.compile(rb"/Filter\s*(\[[^\]]*\]|/\w+)")


class BaselineTextExtractor(ExtractorBackend):
    """Deterministic text-layer reader for well-formed, unencrypted PDFs."""

    name = "baseline-text/v1"

    def extract_pages(self, data: bytes) -> list[list[str]]:
        if not data.startswith(b"%PDF-"):
            raise CorruptPdfError("missing %PDF header")
        objects = self._objects(data)
        if not objects:
            raise CorruptPdfError("no indirect objects found")
        page_ids = self._page_order(objects)
        if not page_ids:
            raise CorruptPdfError("document has no pages")
        pages: list[list[str]] = []
        for obj_id in page_ids:
            body, _ = objects[obj_id]
            content = self._page_content(body, objects)
            pages.append(_reading_order(_blocks_from_content(content)))
        return pages

    # -- structure ---------------------------------------------------------

    def _objects(self, data: bytes) -> dict[int, tuple[bytes, Optional[bytes]]]:
        """Map object number to ``(body-without-stream, stream-bytes|None)``."""
        objects: dict[int, tuple[bytes, Optional[bytes]]] = {}
        for match in _OBJ_RE.finditer(data):
            number = int(match.group(1))
            body = match.group(2)
            stream: Optional[bytes] = None
            stream_at = body.find(b"stream")
            if stream_at != -1 and body.rfind(b"endstream") > stream_at:
                raw = body[stream_at + len(b"stream") : body.rfind(b"endstream")]
                if raw.startswith(b"\r\n"):
                    raw = raw[2:]
                elif raw.startswith(b"\n") or raw.startswith(b"\r"):
                    raw = raw[1:]
                stream = raw
                body = body[:stream_at]
            objects[number] = (body, stream)
        return objects

    def _page_order(
        self, objects: Mapping[int, tuple[bytes, Optional[bytes]]]
    ) -> list[int]:
        """Walk the page tree for document page order."""
        roots = [
            num
            for num, (body, _) in sorted(objects.items())
            if b"/Type" in body and b"/Pages" in body and b"/Kids" in body
        ]
        children: set[int] = set()
        for num in roots:
            for kid in self._kids(objects[num][0]):
                if kid in roots:
                    children.add(kid)
        top = [num for num in roots if num not in children]
        if not top:
            return []

        order: list[int] = []

        def walk(node: int, depth: int) -> None:
            if depth > 32:
                raise CorruptPdfError("page tree too deep (cycle?)")
            body, _ = objects.get(node, (b"", None))
            if b"/Kids" in body:
                for kid in self._kids(body):
                    walk(kid, depth + 1)
            elif b"/Type" in body and b"/Page" in body:
                order.append(node)

        walk(top[0], 0)
        return order

    def _kids(self, body: bytes) -> list[int]:
        kids_at = body.find(b"/Kids")
        if kids_at == -1:
            return []
        open_at = body.find(b"[", kids_at)
        close_at = body.find(b"]", open_at)
        if open_at == -1 or close_at == -1:
            raise CorruptPdfError("malformed /Kids array")
        return [int(m.group(1)) for m in _REF_RE.finditer(body[open_at:close_at])]

    def _page_content(
        self, page_body: bytes, objects: Mapping[int, tuple[bytes, Optional[bytes]]]
    ) -> bytes:
        contents_at = page_body.find(b"/Contents")
        if contents_at == -1:
            return b""  # page without content: no text layer
        tail = page_body[contents_at + len(b"/Contents") :]
        bracket = tail.lstrip()
        refs: list[int]
        if bracket.startswith(b"["):
            close_at = bracket.find(b"]")
            refs = [int(m.group(1)) for m in _REF_RE.finditer(bracket[:close_at])]
        else:
            single = _REF_RE.match(bracket)
            if single is None:
                raise CorruptPdfError("unresolvable /Contents reference")
            refs = [int(single.group(1))]
        parts: list[bytes] = []
        for ref in refs:
            if ref not in objects or objects[ref][1] is None:
                raise CorruptPdfError(f"content stream object {ref} missing")
            body, stream = objects[ref]
            parts.append(_decode_stream(body, stream or b""))
        return b"\n".join(parts)


def _decode_stream(dict_body: bytes, stream: bytes) -> bytes:
    """Apply the declared filter chain (none, Flate, ASCII85 then Flate)."""
    match = _NAME_FILTER_RE.search(dict_body)
    if match is None:
        return stream
    spec = match.group(1)
    filters = [f.decode("ascii") for f in re.findall(rb"/(\w+)", spec)]
    data = stream
    for name in filters:
        if name == "ASCII85Decode":
            framed = data.strip()
            if not framed.startswith(b"<~"):
                framed = b"<~" + framed
            if not framed.endswith(b"~>"):
                framed = framed + b"~>"
            try:
                data = base64.a85decode(framed, adobe=True)
            except ValueError as exc:
                raise CorruptPdfError(f"bad ASCII85 stream: {exc}") from exc
        elif name == "FlateDecode":
            try:
                data = zlib.decompress(data)
            except zlib.error as exc:
                raise CorruptPdfError(f"bad Flate stream: {exc}") from exc
        else:
            raise CorruptPdfError(f"unsupported stream filter: /{name}")
    return data


class PlacedBlock(NamedTuple):
    """One shown string and the line origin (PDF points) it was shown at."""

    text: str
    x: float
    y: float


# A rightward jump of at least this much between line origins starts a new
# column; smaller jumps are indentation within the same column.  Two inches
# cleanly separates the halves of an A4/letter page while leaving normal
# statement indentation alone.
_COLUMN_GAP = 144.0


def _reading_order(placed: Sequence[PlacedBlock]) -> list[str]:
    """Order blocks the way a reader scans the page, not the way the authoring
    tool happened to emit them: columns left to right, each column top to
    bottom, left to right within a line.  Blocks shown at the same position
    keep their content-stream order (the sort is stable)."""
    if not placed:
        return []
    xs = sorted({p.x for p in placed})
    column_starts = [xs[0]]
    for left, right in zip(xs, xs[1:]):
        if right - left >= _COLUMN_GAP:
            column_starts.append(right)

    def key(p: PlacedBlock) -> tuple[int, float, float]:
        return (bisect_right(column_starts, p.x) - 1, -p.y, p.x)

    return [p.text for p in sorted(placed, key=key)]


def _blocks_from_content(content: bytes) -> list[PlacedBlock]:
    """One placed string per show operator, in content-stream order.

    Positions track the text-positioning operators (``Tm``, ``Td``, ``TD``,
    ``TL``, ``T*``) well enough for unrotated, unscaled text -- the profile
    statutory filings use.  Text shown before any positioning lands at (0, 0).
    """
    blocks: list[PlacedBlock] = []
    pos = 0
    in_text = False
    pending: list[bytes] = []
    numbers: list[float] = []
    array_start: Optional[int] = None
    x = y = leading = 0.0
    length = len(content)

    def show(raw: bytes) -> None:
        blocks.append(PlacedBlock(_decode_text(raw), x, y))

    while pos < length:
        ch = content[pos : pos + 1]
        if ch.isspace():
            pos += 1
            continue
        if not in_text:
            if content.startswith(b"BT", pos) and _is_op(content, pos, 2):
                in_text = True
                pending = []
                numbers = []
                array_start = None
                x = y = 0.0  # BT resets the text matrix; leading persists
                pos += 2
            else:
                pos += 1
            continue
        # inside BT ... ET
        if content.startswith(b"ET", pos) and _is_op(content, pos, 2):
            in_text = False
            pos += 2
            continue
        if ch == b"(":
            literal, pos = _parse_literal(content, pos)
            pending.append(literal)
            continue
        if ch == b"<" and not content.startswith(b"<<", pos):
            hex_end = content.find(b">", pos)
            if hex_end == -1:
                raise CorruptPdfError("unterminated hex string")
            hex_digits = re.sub(rb"\s", b"", content[pos + 1 : hex_end])
            if len(hex_digits) % 2:
                hex_digits += b"0"
            pending.append(bytes.fromhex(hex_digits.decode("ascii")))
            pos = hex_end + 1
            continue
        if ch == b"[":
            array_start = len(pending)
            pos += 1
            continue
        if ch == b"]":
            pos += 1
            continue
        token, pos = _next_token(content, pos)
        if _is_number(token):
            numbers.append(float(token))
            continue
        if token.startswith(b"/"):
            continue  # a name is an operand, not an operator
        if token == b"Tj":
            if pending:
                show(pending[-1])
        elif token in (b"'", b'"'):
            y -= leading  # both imply a move to the next line before showing
            if pending:
                show(pending[-1])
        elif token == b"TJ":
            joined = b"".join(pending[array_start if array_start is not None else 0 :])
            if joined:
                show(joined)
        elif token == b"Tm":
            if len(numbers) >= 2:
                x, y = numbers[-2], numbers[-1]
        elif token in (b"Td", b"TD"):
            if len(numbers) >= 2:
                x += numbers[-2]
                y += numbers[-1]
                if token == b"TD":
                    leading = -numbers[-1]
        elif token == b"TL":
            if numbers:
                leading = numbers[-1]
        elif token == b"T*":
            y -= leading
        # every operator, shows included, consumes its operands
        pending = []
        numbers = []
        array_start = None
    return blocks


def _is_op(content: bytes, pos: int, width: int) -> bool:
    after = content[pos + width : pos + width + 1]
    return after == b"" or not after.isalnum()


_DELIMITERS = b"()[]<>{}%"


def _next_token(content: bytes, pos: int) -> tuple[bytes, int]:
    """Consume one token (operator, number, or /Name) starting at *pos*."""
    end = pos + 1  # the first byte always belongs to the token
    while end < len(content):
        byte = content[end]
        if bytes((byte,)).isspace() or byte in _DELIMITERS or byte == ord("/"):
            break
        end += 1
    return content[pos:end], end


def _is_number(token: bytes) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


_ESCAPES = {
    b"n": b"\n",
    b"r": b"\r",
    b"t": b"\t",
    b"b": b"\b",
    b"f": b"\f",
    b"(": b"(",
    b")": b")",
    b"\\": b"\\",
}


def _parse_literal(content: bytes, pos: int) -> tuple[bytes, int]:
    """Parse a ``(...)`` string literal starting at *pos*; returns raw bytes."""
    assert content[pos : pos + 1] == b"("
    out = bytearray()
    depth = 1
    i = pos + 1
    while i < len(content):
        ch = content[i : i + 1]
        if ch == b"\\":
            nxt = content[i + 1 : i + 2]
            if nxt in _ESCAPES:
                out += _ESCAPES[nxt]
                i += 2
            elif nxt.isdigit():
                digits = content[i + 1 : i + 4]
                octal = re.match(rb"[0-7]{1,3}", digits)
                out.append(int(octal.group(0), 8) & 0xFF)
                i += 1 + len(octal.group(0))
            elif nxt in (b"\n", b"\r"):
                i += 2  # line continuation
            else:
                out += nxt
                i += 2
            continue
        if ch == b"(":
            depth += 1
        elif ch == b")":
            depth -= 1
            if depth == 0:
                return bytes(out), i + 1
        out += ch
        i += 1
    raise CorruptPdfError("unterminated string literal")


def _decode_text(raw: bytes) -> str:
    return raw.decode("cp1252", errors="replace")


def extract_text(
    blob: PdfBlob, backend: Optional[ExtractorBackend] = None
) -> ExtractedDocument:
    """Extract the full text layer of one fetched filing.

    Raises :class:`CorruptPdfError` for unparseable input.  A scanned
    (image-only) document extracts successfully with zero text blocks --
    callers decide whether that is a degradation.
    """
    chosen = backend or BaselineTextExtractor()
    try:
        raw_pages = chosen.extract_pages(blob.data)
    except CorruptPdfError:
        raise
    except Exception as exc:  # defensive: a parser bug must not masquerade as data
        raise CorruptPdfError(f"extractor crashed on {blob.doc_id!r}: {exc}") from exc
    pages = [
        [
            TextBlock(text=text, reading_order_index=i, page_number=page_no)
            for i, text in enumerate(texts)
        ]
        for page_no, texts in enumerate(raw_pages, start=1)
    ]
    return ExtractedDocument(doc_id=blob.doc_id, pages=pages)


def has_text_layer(document: ExtractedDocument) -> bool:
    return any(block.text.strip() for page in document.pages for block in page)


# --------------------------------------------------------------------------
# Amount parsing
# --------------------------------------------------------------------------

GREEK_CONVENTION = "greek"
ANGLOPHONE_CONVENTION = "anglophone"
PLAIN_CONVENTION = "plain"

_AMOUNT_SHAPE = re.compile(r"^[0-9][0-9.,]*$")


def parse_amount(text: str) -> tuple[Decimal, str]:
    """Parse a currency amount that may use Greek or anglophone separators.

    Returns ``(value, convention)`` where convention records the assumption
    made: ``greek`` (``.`` thousands, ``,`` decimal), ``anglophone``
    (``,`` thousands, ``.`` decimal) or ``plain`` (no separators).

    Disambiguation rules, applied to the separator-bearing digits:

    * both separators present: the one appearing **last** is the decimal mark;
    * a separator appearing more than once is a thousands mark;
    * a single separator followed by exactly three digits groups thousands
      (``1.250`` is one thousand two hundred fifty, not a fraction -- filings
      list whole-euro or two-decimal figures, never three decimals);
    * otherwise the single separator is the decimal mark.
    """
    cleaned = text.strip().replace("€", "").replace("EUR", "").strip()
    negative = False
    if cleaned.startswith("(") and cleaned.endswith(")"):
        negative = True
        cleaned = cleaned[1:-1].strip()
    if cleaned.startswith("-"):
        negative = not negative
        cleaned = cleaned[1:].strip()
    if cleaned.startswith("+"):
        cleaned = cleaned[1:].strip()
    cleaned = cleaned.replace(" ", "")
    if not cleaned or not _AMOUNT_SHAPE.match(cleaned):
        raise ValueError(f"not a recognisable amount: {text!r}")

    dots = cleaned.count(".")
    commas = cleaned.count(",")

    def finish(normalised: str, convention: str) -> tuple[Decimal, str]:
        try:
            value = Decimal(normalised)
        except InvalidOperation as exc:
            raise ValueError(f"not a recognisable amount: {text!r}") from exc
        return (-value if negative else value), convention

    if dots and commas:
        decimal_sep = "." if cleaned.rfind(".") > cleaned.rfind(",") else ","
        if cleaned.count(decimal_sep) > 1:
            raise ValueError(f"ambiguous separators in amount: {text!r}")
        if decimal_sep == ",":
            return finish(cleaned.replace(".", "").replace(",", "."), GREEK_CONVENTION)
        return finish(cleaned.replace(",", ""), ANGLOPHONE_CONVENTION)
    if dots:
        head, _, tail = cleaned.rpartition(".")
        if dots > 1 or len(tail) == 3:
            _require_grouping(cleaned, ".", text)
            return finish(cleaned.replace(".", ""), GREEK_CONVENTION)
        return finish(cleaned, ANGLOPHONE_CONVENTION)
    if commas:
        head, _, tail = cleaned.rpartition(",")
        if commas > 1 or len(tail) == 3:
            _require_grouping(cleaned, ",", text)
            return finish(cleaned.replace(",", ""), ANGLOPHONE_CONVENTION)
        return finish(cleaned.replace(",", "."), GREEK_CONVENTION)
    return finish(cleaned, PLAIN_CONVENTION)


def _require_grouping(cleaned: str, sep: str, original: str) -> None:
    groups = cleaned.split(sep)
    if len(groups[0]) not in range(1, 4) or any(len(g) != 3 for g in groups[1:]):
        raise ValueError(f"malformed thousands grouping: {original!r}")


# --------------------------------------------------------------------------
# Summarisation over extracted documents
# --------------------------------------------------------------------------


def context_docs_for(
    documents: Sequence[ExtractedDocument],
    dates: Optional[Mapping[str, str]] = None,
) -> list[ContextDoc]:
    """One context document per page, so citations are page-precise."""
    docs: list[ContextDoc] = []
    for document in documents:
        for page_no in range(1, document.page_count() + 1):
            docs.append(
                ContextDoc(
                    source_ref=f"doc:{document.doc_id}",
                    page=page_no,
                    text=document.page_text(page_no),
                    retrieved_at=(dates or {}).get(document.doc_id, ""),
                )
            )
    return docs


def _complete_json(
    role: str,
    completion: CompletionProvider,
    context_docs: Sequence[ContextDoc],
    expect_key: str,
) -> list[Any]:
    from diligence.agents.runner import render_prompt  # local: avoids import cycle
    from diligence.agents.schema import AgentRole

    prompt = render_prompt(AgentRole(role), {})
    raw = completion.complete(prompt, list(context_docs))
    try:
        parsed = json.loads(raw)
    except ValueError as exc:
        raise SchemaRejectedError(f"{role} completion is not JSON: {exc}") from exc
    if not isinstance(parsed, dict) or not isinstance(parsed.get(expect_key), list):
        raise SchemaRejectedError(
            f"{role} completion must be an object with a {expect_key!r} list"
        )
    return parsed[expect_key]


def _cited_page(
    raw_citation: Any,
    context_docs: Sequence[ContextDoc],
    page_counts: Mapping[str, int],
    subject: str,
) -> Citation:
    """Resolve a claimed citation to a verified page-level one.

    Two forms are accepted: an integer index into the supplied context
    documents, or an explicit ``{"source_ref": "doc:<id>", "page": n}``
    object.  Either way the referenced document must be one that was actually
    supplied and the page must exist in it -- the degenerate outputs of an
    unfaithful summariser (out-of-range indices, fabricated page numbers,
    documents never fetched) are all rejected here.
    """
    if isinstance(raw_citation, bool):
        raise CitationError(f"{subject}: citation must be an index or an object")
    if isinstance(raw_citation, int):
        if not 0 <= raw_citation < len(context_docs):
            raise CitationError(
                f"{subject}: citation index {raw_citation} out of range "
                f"(have {len(context_docs)} context documents)"
            )
        doc = context_docs[raw_citation]
        source_ref, page = doc.source_ref, doc.page
        retrieved_at, snippet = doc.retrieved_at, doc.text[:300]
    elif isinstance(raw_citation, dict):
        source_ref = raw_citation.get("source_ref")
        page = raw_citation.get("page")
        if not isinstance(source_ref, str) or not isinstance(page, int):
            raise CitationError(
                f"{subject}: citation object needs a source_ref and a page"
            )
        match = next(
            (
                d
                for d in context_docs
                if d.source_ref == source_ref and d.page == page
            ),
            None,
        )
        retrieved_at = match.retrieved_at if match else ""
        snippet = match.text[:300] if match else ""
    else:
        raise CitationError(f"{subject}: citation must be an index or an object")

    doc_id = (source_ref or "").removeprefix("doc:")
    if doc_id not in page_counts:
        raise CitationError(
            f"{subject}: cites {source_ref!r}, which was never retrieved"
        )
    if page is None or not 1 <= page <= page_counts[doc_id]:
        raise CitationError(
            f"{subject}: cites page {page} of {doc_id!r}, which has "
            f"{page_counts[doc_id]} page(s)"
        )
    return Citation(
        source_ref=source_ref,
        page=page,
        retrieved_at=retrieved_at,
        snippet=snippet,
    )


def summarize_financials(
    documents: Sequence[ExtractedDocument],
    completion: CompletionProvider,
    *,
    dates: Optional[Mapping[str, str]] = None,
    annotate: Optional[Annotate] = None,
    recent_years: int = 2,
) -> list[FinancialStatementRecord]:
    """Produce at most one validated statement record per fiscal year,
    keeping the ``recent_years`` most recent (newest first).

    Every line item must carry an in-range page citation and a parseable
    amount; a well-formed record whose figures cannot be grounded is an
    error, never a silently dropped or unsourced number.  Older records
    beyond the cut are validated all the same before being set aside.
    """
    if recent_years < 1:
        raise ValueError("recent_years must be at least 1")
    context_docs = context_docs_for(documents, dates)
    page_counts = {d.doc_id: d.page_count() for d in documents}
    raw_records = _complete_json("FinSummary", completion, context_docs, "records")

    conventions: set[str] = set()
    records: list[FinancialStatementRecord] = []
    seen_years: set[int] = set()
    for position, raw in enumerate(raw_records):
        subject = f"records[{position}]"
        if not isinstance(raw, dict):
            raise SchemaRejectedError(f"{subject} is not an object")
        year = raw.get("fiscal_year")
        if not isinstance(year, int):
            raise SchemaRejectedError(f"{subject}: fiscal_year must be an integer")
        if year in seen_years:
            raise SchemaRejectedError(f"{subject}: fiscal year {year} repeated")
        seen_years.add(year)
        raw_items = raw.get("line_items")
        if not isinstance(raw_items, dict) or not raw_items:
            raise SchemaRejectedError(f"{subject}: line_items must be a non-empty map")
        line_items: dict[str, LineItem] = {}
        for metric, item in raw_items.items():
            item_subject = f"{subject}.line_items.{metric}"
            if metric not in METRIC_NAMES:
                raise SchemaRejectedError(f"{item_subject}: unknown metric")
            if not isinstance(item, dict):
                raise SchemaRejectedError(f"{item_subject}: must be an object")
            if "citation" not in item:
                raise CitationError(f"{item_subject}: amount has no citation")
            citation = _cited_page(
                item["citation"], context_docs, page_counts, item_subject
            )
            raw_amount = item.get("amount")
            if not isinstance(raw_amount, str):
                raise SchemaRejectedError(
                    f"{item_subject}: amount must be the verbatim source string"
                )
            try:
                value, convention = parse_amount(raw_amount)
            except ValueError as exc:
                raise SchemaRejectedError(f"{item_subject}: {exc}") from exc
            conventions.add(convention)
            line_items[metric] = LineItem(amount=value, citation=citation)
        try:
            record = FinancialStatementRecord(fiscal_year=year, line_items=line_items)
        except ValueError as exc:
            raise SchemaRejectedError(f"{subject}: {exc}") from exc
        records.append(record)

    if annotate is not None and conventions:
        annotate(
            "amount conventions assumed: " + ", ".join(sorted(conventions))
        )
    records.sort(key=lambda r: r.fiscal_year, reverse=True)
    if len(records) > recent_years:
        dropped = ", ".join(str(r.fiscal_year) for r in records[recent_years:])
        if annotate is not None:
            annotate(
                f"keeping the {recent_years} most recent fiscal years; "
                f"set aside: {dropped}"
            )
        records = records[:recent_years]
    return records


def summarize_modifications(
    documents: Sequence[ExtractedDocument],
    completion: CompletionProvider,
    *,
    dates: Optional[Mapping[str, str]] = None,
) -> list[CorporateEvent]:
    """Produce dated, categorised, document-cited corporate events,
    chronologically ascending (ties broken by cited document)."""
    context_docs = context_docs_for(documents, dates)
    page_counts = {d.doc_id: d.page_count() for d in documents}
    raw_events = _complete_json("ModSummary", completion, context_docs, "events")

    events: list[CorporateEvent] = []
    for position, raw in enumerate(raw_events):
        subject = f"events[{position}]"
        if not isinstance(raw, dict):
            raise SchemaRejectedError(f"{subject} is not an object")
        if "citation" not in raw:
            raise CitationError(f"{subject}: event has no citation")
        citation = _cited_page(raw["citation"], context_docs, page_counts, subject)
        try:
            validate_iso_date(str(raw.get("date", "")), "date")
            event = CorporateEvent(
                date=raw["date"],
                kind=raw.get("kind", "Other"),
                description=str(raw.get("description", "")),
                citation=citation,
            )
        except ValueError as exc:
            raise SchemaRejectedError(f"{subject}: {exc}") from exc
        events.append(event)

    events.sort(key=lambda e: (e.date, e.citation.source_ref))
    return events
