#!/usr/bin/env python3
"""Author the golden files the test suite compares against.

Two families land under ``fixtures/goldens/``:

* ``two-column-balance.pdf`` and its extraction — a balance sheet laid out
  in two columns whose draw order interleaves them row by row, so the
  checked-in extraction proves the reader-order rule (left column top to
  bottom, then right), not the authoring order.  The expected block list is
  written out below and checked against the extractor before anything is
  saved; that review step is what makes the golden trustworthy.
* ``reports/<company_id>.html`` — one fully rendered report per fixture
  company, covering every provenance state the financial section can take.

Regenerate only after an intentional rendering or extraction change, review
the diff, and commit the result.  Run from the repository root:

    python3 scripts/make_goldens.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from reportlab.lib.pagesizes import A4
from reportlab.pdfgen.canvas import Canvas

from diligence.extract import extract_text
from diligence.intake import load_company_db
from diligence.pipeline import PipelineConfig, run_pipeline
from diligence.providers.fixture import (
    FixtureAltFinancialsProvider,
    FixtureCompletionProvider,
    FixtureRetrievalProvider,
)
from diligence.registry import DirectCorpusClient
from diligence.registry.client import PdfBlob

ROOT = Path(__file__).resolve().parent.parent
GOLDENS = ROOT / "fixtures" / "goldens"
REPORTS = GOLDENS / "reports"

TWO_COLUMN_DOC_ID = "two-column-balance"

# The two columns of the statement, top to bottom.  The PDF is drawn row by
# row (left cell, then right cell), so the content stream interleaves these
# lists; a reader — and the extractor — must not.
LEFT_COLUMN = [
    "BALANCE SHEET 2023",
    "ASSETS",
    "Fixed assets 900.000,00",
    "Current assets 350.000,00",
    "Total assets 1.250.000,00",
]
RIGHT_COLUMN = [
    "Amounts in EUR",
    "LIABILITIES",
    "Equity 510.000,00",
    "Provisions 230.000,00",
    "Total liabilities 740.000,00",
]
EXPECTED_PAGE = LEFT_COLUMN + RIGHT_COLUMN

LEFT_X, RIGHT_X, TOP_Y, LEADING = 72, 320, 760, 20

# One report per fixture company; together they exercise the verified,
# third-party, and (twice) not-found financial sections.
COMPANY_IDS = [
    "aegean-robotics",
    "nordwind-analytics",
    "thessaly-agritech",
    "helvetic-metrics",
]

TRIGGER = {
    "requested_by": "analyst@fund.example",
    "requested_at": "2024-06-02T09:00:00+00:00",
}


def write_two_column_pdf(path: Path) -> None:
    canvas = Canvas(str(path), pagesize=A4, invariant=1, pageCompression=1)
    canvas.setFont("Helvetica", 12)
    y = TOP_Y
    for left_text, right_text in zip(LEFT_COLUMN, RIGHT_COLUMN):
        canvas.drawString(LEFT_X, y, left_text)
        canvas.drawString(RIGHT_X, y, right_text)
        y -= LEADING
    canvas.showPage()
    canvas.save()


def write_extraction_golden() -> None:
    pdf_path = GOLDENS / f"{TWO_COLUMN_DOC_ID}.pdf"
    write_two_column_pdf(pdf_path)
    document = extract_text(PdfBlob.of(TWO_COLUMN_DOC_ID, pdf_path.read_bytes()))
    extracted = [block.text for block in document.pages[0]]
    if extracted != EXPECTED_PAGE:
        sys.exit(
            "extraction review failed; refusing to write a wrong golden.\n"
            f"expected: {EXPECTED_PAGE}\n"
            f"got:      {extracted}"
        )
    out = GOLDENS / f"{TWO_COLUMN_DOC_ID}.extraction.json"
    out.write_text(
        json.dumps(document.model_dump(mode="json"), indent=2) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {pdf_path.relative_to(ROOT)} and {out.relative_to(ROOT)}")


def pipeline_config() -> PipelineConfig:
    alt_dir = ROOT / "fixtures" / "altfin"
    return PipelineConfig(
        company_db=load_company_db(ROOT / "data" / "companies.v1.json"),
        completion=FixtureCompletionProvider(),
        retrieval=FixtureRetrievalProvider(
            ROOT / "fixtures" / "retrieval" / "corpus.v1.json"
        ),
        registry_client=DirectCorpusClient(ROOT / "fixtures" / "registry"),
        alt_providers=(
            FixtureAltFinancialsProvider(alt_dir / "crunchbase-fixture.json"),
            FixtureAltFinancialsProvider(alt_dir / "dealflow-fixture.json"),
        ),
    )


def write_report_goldens() -> None:
    config = pipeline_config()
    for company_id in COMPANY_IDS:
        ctx = run_pipeline(
            config,
            {"company_id": company_id, **TRIGGER},
            run_id=f"golden-{company_id}",
        )
        if ctx.run_failed:
            sys.exit(f"fixture run for {company_id} failed: {ctx.failure_reason}")
        html = ctx.artifacts["render_report"]["html"]
        out = REPORTS / f"{company_id}.html"
        out.write_text(html + "\n", encoding="utf-8")
        print(f"wrote {out.relative_to(ROOT)}")


def main() -> None:
    REPORTS.mkdir(parents=True, exist_ok=True)
    write_extraction_golden()
    write_report_goldens()


if __name__ == "__main__":
    main()
