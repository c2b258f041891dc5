"""Recorded-replay provider adapters.

A recording wrapper captures every (request, response) pair a live or fixture
provider produces; the replay providers serve those recordings back, keyed by
a content hash of the full request, so a captured session re-executes
byte-identically with no provider behind it.

Record files are plain JSON: ``{"identities": {...}, "completions":
{key: text}, "retrievals": {key: [result, ...]}}`` — one file can hold both
kinds. Replay providers report the *recorded* provider identities, so agent
output fingerprints — which hash the provider identity — reproduce exactly.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Optional, Sequence

from diligence.canonical import fingerprint
from diligence.errors import DiligenceError
from diligence.providers.base import (
    CompletionProvider,
    ContextDoc,
    RetrievalProvider,
    RetrievalResult,
)


def completion_key(prompt: str, context_docs: Sequence[ContextDoc]) -> str:
    return fingerprint(
        {
            "prompt": prompt,
            "context": [
                {
                    "source_ref": d.source_ref,
                    "text": d.text,
                    "page": d.page,
                    "retrieved_at": d.retrieved_at,
                }
                for d in context_docs
            ],
        }
    )


def retrieval_key(query: str) -> str:
    return fingerprint({"query": query})


def _load_record(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise DiligenceError(f"replay record not found: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise DiligenceError(f"{path}: replay record must be a JSON object")
    return data


class ReplayCompletionProvider(CompletionProvider):
    """Serves recorded completions; an unrecorded request is an error."""

    def __init__(self, record_path: str | Path):
        self._path = Path(record_path)
        record = _load_record(self._path)
        self._completions: dict[str, str] = record.get("completions", {})
        self._identity: str = record.get("identities", {}).get(
            "completion", "replay-completion/v1"
        )

    def identity(self) -> str:
        return self._identity

    def complete(self, prompt: str, context_docs: Sequence[ContextDoc]) -> str:
        key = completion_key(prompt, context_docs)
        try:
            return self._completions[key]
        except KeyError:
            raise DiligenceError(
                f"no recorded completion for request {key[:12]}… in {self._path}; "
                "re-record the session or check the inputs for drift"
            ) from None


class ReplayRetrievalProvider(RetrievalProvider):
    """Serves recorded search results; an unrecorded query is an empty miss."""

    def __init__(self, record_path: str | Path):
        self._path = Path(record_path)
        record = _load_record(self._path)
        self._retrievals: dict[str, list[dict[str, Any]]] = record.get(
            "retrievals", {}
        )
        self._identity: str = record.get("identities", {}).get(
            "retrieval", "replay-retrieval/v1"
        )

    def identity(self) -> str:
        return self._identity

    def search(self, query: str) -> list[RetrievalResult]:
        hits = self._retrievals.get(retrieval_key(query), [])
        return [
            RetrievalResult(
                source_ref=h["source_ref"],
                snippet=h["snippet"],
                retrieved_at=h["retrieved_at"],
            )
            for h in hits
        ]


class SessionRecorder:
    """Wraps live providers and captures their traffic into one record file.

    Thread-safe, so a concurrent pipeline run can be recorded directly.
    """

    def __init__(
        self,
        completion: Optional[CompletionProvider] = None,
        retrieval: Optional[RetrievalProvider] = None,
    ):
        self._completions: dict[str, str] = {}
        self._retrievals: dict[str, list[dict[str, Any]]] = {}
        self._lock = threading.Lock()
        self.completion = (
            _RecordingCompletion(completion, self) if completion is not None else None
        )
        self.retrieval = (
            _RecordingRetrieval(retrieval, self) if retrieval is not None else None
        )

    def _note_completion(self, key: str, text: str) -> None:
        with self._lock:
            self._completions[key] = text

    def _note_retrieval(self, key: str, results: list[RetrievalResult]) -> None:
        with self._lock:
            self._retrievals[key] = [
                {
                    "source_ref": r.source_ref,
                    "snippet": r.snippet,
                    "retrieved_at": r.retrieved_at,
                }
                for r in results
            ]

    def save(self, record_path: str | Path) -> Path:
        path = Path(record_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        identities: dict[str, str] = {}
        if self.completion is not None:
            identities["completion"] = self.completion.identity()
        if self.retrieval is not None:
            identities["retrieval"] = self.retrieval.identity()
        with self._lock:
            record = {
                "identities": identities,
                "completions": dict(sorted(self._completions.items())),
                "retrievals": dict(sorted(self._retrievals.items())),
            }
        path.write_text(
            json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return path


class _RecordingCompletion(CompletionProvider):
    def __init__(self, inner: CompletionProvider, recorder: SessionRecorder):
        self._inner = inner
        self._recorder = recorder

    def identity(self) -> str:
        return self._inner.identity()

    def complete(self, prompt: str, context_docs: Sequence[ContextDoc]) -> str:
        text = self._inner.complete(prompt, context_docs)
        self._recorder._note_completion(completion_key(prompt, context_docs), text)
        return text


class _RecordingRetrieval(RetrievalProvider):
    def __init__(self, inner: RetrievalProvider, recorder: SessionRecorder):
        self._inner = inner
        self._recorder = recorder

    def identity(self) -> str:
        return self._inner.identity()

    def search(self, query: str) -> list[RetrievalResult]:
        results = self._inner.search(query)
        self._recorder._note_retrieval(retrieval_key(query), results)
        return results
