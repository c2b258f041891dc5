"""A tiny local HTTP server that speaks the registry-portal protocol.

Serves a fixture corpus directory (the same layout
:class:`~diligence.registry.client.DirectCorpusClient` reads) so the full
pipeline -- including real HTTP transport, retries, and 404 handling -- can run
hermetically.  Start it with the CLI (``diligence fixtures serve``) or embed it
in tests via the context manager.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse


class _Handler(BaseHTTPRequestHandler):
    corpus: Path  # assigned on the per-server subclass

    def log_message(self, format: str, *args: object) -> None:  # noqa: A002
        pass  # keep test output quiet

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: object) -> None:
        self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        parsed = urlparse(self.path)
        if parsed.path == "/index":
            reg_values = parse_qs(parsed.query).get("reg", [])
            if len(reg_values) != 1:
                self._send_json(400, {"error": "exactly one 'reg' parameter required"})
                return
            self._serve_index(reg_values[0])
        elif parsed.path.startswith("/doc/"):
            self._serve_document(parsed.path[len("/doc/") :])
        else:
            self._send_json(404, {"error": f"unknown path: {parsed.path}"})

    def _serve_index(self, registry_number: str) -> None:
        index_path = self.corpus / registry_number / "index.json"
        documents = []
        if index_path.is_file():
            documents = json.loads(index_path.read_text(encoding="utf-8"))
        self._send_json(
            200,
            {
                "registry_number": registry_number,
                "total": len(documents),
                "documents": documents,
            },
        )

    def _serve_document(self, doc_id: str) -> None:
        if not doc_id or "/" in doc_id or ".." in doc_id:
            self._send_json(400, {"error": "bad document id"})
            return
        matches = sorted(self.corpus.glob(f"*/docs/{doc_id}.pdf"))
        if not matches:
            self._send_json(404, {"error": f"no such document: {doc_id}"})
            return
        self._send(200, matches[0].read_bytes(), "application/pdf")


class FixtureRegistryServer:
    """Threaded HTTP server over a fixture corpus.  ``port=0`` picks a free one."""

    def __init__(
        self, corpus_dir: str | Path, host: str = "127.0.0.1", port: int = 0
    ) -> None:
        corpus = Path(corpus_dir)
        handler = type("BoundHandler", (_Handler,), {"corpus": corpus})
        self._server = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "FixtureRegistryServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="fixture-registry", daemon=True
        )
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "FixtureRegistryServer":
        return self.start()

    def __exit__(self, *exc_info: object) -> None:
        self.stop()
