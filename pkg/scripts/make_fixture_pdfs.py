#!/usr/bin/env python3
"""Author the registry fixture corpus: filing PDFs, per-company indexes, and
a MANIFEST freezing every planted value so tests can verify extraction
against an independent record of what was put in.

Deterministic: reportlab's invariant mode pins timestamps and document IDs,
so reruns produce byte-identical PDFs.  Run from the repository root:

    python3 scripts/make_fixture_pdfs.py
"""

from __future__ import annotations

import json
from pathlib import Path

from reportlab.lib.pagesizes import A4
from reportlab.pdfgen.canvas import Canvas

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "fixtures" / "registry"

LEFT = 72
TOP = 770
LEADING = 20

# Every planted value lives in this one structure; the PDFs, the index files
# and the MANIFEST are all rendered from it.
AEGEAN_REG = "123456789012"
THESSALY_REG = "987654321000"

FINANCIAL_DOCS = [
    {
        "doc_id": "a1-fin-2023",
        "published_date": "2024-05-10",
        "title": "Οικονομικές καταστάσεις χρήσης 2023",
        "fiscal_year": 2023,
        "pages": [
            {
                "heading": "BALANCE SHEET",
                "lines": [("Assets", "1.250.000,00"), ("Liabilities", "740.000,00")],
            },
            {
                "heading": "INCOME STATEMENT",
                "lines": [("Revenue", "980.000,00"), ("EBIT", "-45.000,00")],
            },
        ],
    },
    {
        "doc_id": "a1-fin-2022",
        "published_date": "2023-05-12",
        "title": "Ισολογισμός και αποτελέσματα χρήσης 2022",
        "fiscal_year": 2022,
        "pages": [
            {
                "heading": "BALANCE SHEET",
                "lines": [("Assets", "1.100.000,00"), ("Liabilities", "690.000,00")],
            },
            {
                "heading": "INCOME STATEMENT",
                "lines": [("Revenue", "820.000,00"), ("EBIT", "-120.000,00")],
            },
        ],
    },
]

MODIFICATION_DOCS = [
    {
        "doc_id": "a1-mod-board-2024",
        "published_date": "2024-02-01",
        "title": "Αλλαγή σύνθεσης διοικητικού συμβουλίου",
        "date": "2024-02-01",
        "subject": "Board of directors change",
        "kind": "BoardChange",
        "body": "The company announces a change in the composition of its board.",
    },
    {
        "doc_id": "a1-mod-capital-2023",
        "published_date": "2023-09-15",
        "title": "Αύξηση μετοχικού κεφαλαίου",
        "date": "2023-09-15",
        "subject": "Share capital increase",
        "kind": "CapitalIncrease",
        "body": "The general assembly approved an increase of the share capital.",
    },
    {
        "doc_id": "a1-mod-articles-2022",
        "published_date": "2022-06-30",
        "title": "Τροποποίηση καταστατικού",
        "date": "2022-06-30",
        "subject": "Amendment of articles of association",
        "kind": "StatutoryModification",
        "body": "The articles of association were amended and restated.",
    },
]


def _canvas(path: Path) -> Canvas:
    canvas = Canvas(str(path), pagesize=A4, invariant=1, pageCompression=1)
    canvas.setFont("Helvetica", 12)
    return canvas


def write_financial_pdf(path: Path, doc: dict) -> None:
    canvas = _canvas(path)
    for page in doc["pages"]:
        y = TOP
        for line in (
            [page["heading"], f"FISCAL YEAR {doc['fiscal_year']}", "Amounts in EUR"]
            + [f"{metric} {amount}" for metric, amount in page["lines"]]
        ):
            canvas.setFont("Helvetica", 12)
            canvas.drawString(LEFT, y, line)
            y -= LEADING
        canvas.showPage()
    canvas.save()


def write_modification_pdf(path: Path, doc: dict) -> None:
    canvas = _canvas(path)
    y = TOP
    for line in (
        "ANNOUNCEMENT",
        f"DATE: {doc['date']}",
        f"SUBJECT: {doc['subject']}",
        doc["body"],
    ):
        canvas.setFont("Helvetica", 12)
        canvas.drawString(LEFT, y, line)
        y -= LEADING
    canvas.showPage()
    canvas.save()


def write_scanned_pdf(path: Path) -> None:
    """A page with drawings but no text layer, like a scanned filing."""
    canvas = _canvas(path)
    canvas.rect(100, 500, 380, 260, stroke=1, fill=0)
    canvas.line(100, 620, 480, 620)
    canvas.showPage()
    canvas.save()


def main() -> None:
    aegean = CORPUS / AEGEAN_REG
    docs_dir = aegean / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)

    index = []
    for doc in FINANCIAL_DOCS:
        write_financial_pdf(docs_dir / f"{doc['doc_id']}.pdf", doc)
        index.append(
            {
                "doc_id": doc["doc_id"],
                "published_date": doc["published_date"],
                "title": doc["title"],
            }
        )
    for doc in MODIFICATION_DOCS:
        write_modification_pdf(docs_dir / f"{doc['doc_id']}.pdf", doc)
        index.append(
            {
                "doc_id": doc["doc_id"],
                "published_date": doc["published_date"],
                "title": doc["title"],
            }
        )
    # fetchable but unindexed: exercises the no-text-layer path in isolation
    write_scanned_pdf(docs_dir / "a1-scan-2021.pdf")

    index.sort(key=lambda e: e["published_date"], reverse=True)
    (aegean / "index.json").write_text(
        json.dumps(index, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    # registered company with no retrievable filings
    thessaly = CORPUS / THESSALY_REG
    thessaly.mkdir(parents=True, exist_ok=True)
    (thessaly / "index.json").write_text("[]\n", encoding="utf-8")

    manifest = {
        AEGEAN_REG: {
            "index": index,
            "financials": {
                str(doc["fiscal_year"]): {
                    metric: amount
                    for page in doc["pages"]
                    for metric, amount in page["lines"]
                }
                for doc in FINANCIAL_DOCS
            },
            "financial_pages": {
                str(doc["fiscal_year"]): {
                    metric: page_no
                    for page_no, page in enumerate(doc["pages"], start=1)
                    for metric, _ in page["lines"]
                }
                for doc in FINANCIAL_DOCS
            },
            "financial_doc_by_year": {
                str(doc["fiscal_year"]): doc["doc_id"] for doc in FINANCIAL_DOCS
            },
            "events": [
                {
                    "date": doc["date"],
                    "kind": doc["kind"],
                    "description": doc["subject"],
                    "doc_id": doc["doc_id"],
                }
                for doc in sorted(MODIFICATION_DOCS, key=lambda d: d["date"])
            ],
        },
        THESSALY_REG: {"index": [], "financials": {}, "events": []},
    }
    (CORPUS / "MANIFEST.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote corpus under {CORPUS}")


if __name__ == "__main__":
    main()
