"""Service configuration from environment variables.

Every knob has a sensible default for a repository checkout (fixture
providers, bundled corpora, file-drop delivery), so ``diligence serve``
works out of the box; deployments override via ``DILIGENCE_*`` variables.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from diligence.delivery import DeliverySink, FileDropSink, SmtpSink
from diligence.engine import WorkflowGraph, load_graph
from diligence.errors import DiligenceError
from diligence.intake import load_company_db
from diligence.pipeline import PipelineConfig, load_default_graph
from diligence.providers.fixture import (
    FixtureAltFinancialsProvider,
    FixtureCompletionProvider,
    FixtureRetrievalProvider,
)
from diligence.providers.replay import (
    ReplayCompletionProvider,
    ReplayRetrievalProvider,
)
from diligence.registry import DirectCorpusClient, EndpointClient, HttpEndpointClient

ENV_PREFIX = "DILIGENCE_"

_DEFAULT_ALTFIN = (
    "fixtures/altfin/crunchbase-fixture.json",
    "fixtures/altfin/dealflow-fixture.json",
)


@dataclass(frozen=True)
class ServiceSettings:
    """Parsed, validated service configuration."""

    host: str = "127.0.0.1"
    port: int = 8000
    company_db: Path = Path("data/companies.v1.json")
    providers: str = "fixture"  # fixture | replay
    replay_record: Optional[Path] = None
    retrieval_corpus: Path = Path("fixtures/retrieval/corpus.v1.json")
    registry_url: Optional[str] = None
    registry_corpus: Path = Path("fixtures/registry")
    altfin_paths: tuple[Path, ...] = tuple(Path(p) for p in _DEFAULT_ALTFIN)
    sink: str = "file"  # file | smtp:<host>[:<port>] | none
    out_dir: Path = Path("out")
    delivered_dir: Path = Path("delivered")
    graph_path: Optional[Path] = None
    recent_docs: int = 5
    recent_years: int = 2
    journal_path: Optional[Path] = None


def _env(environ: Mapping[str, str], name: str) -> Optional[str]:
    value = environ.get(ENV_PREFIX + name)
    return value.strip() if value and value.strip() else None


def settings_from_env(environ: Optional[Mapping[str, str]] = None) -> ServiceSettings:
    env = environ if environ is not None else os.environ
    defaults = ServiceSettings()

    port_raw = _env(env, "PORT")
    recent_raw = _env(env, "RECENT_DOCS")
    years_raw = _env(env, "RECENT_YEARS")
    altfin_raw = _env(env, "ALTFIN")
    try:
        port = int(port_raw) if port_raw else defaults.port
        recent = int(recent_raw) if recent_raw else defaults.recent_docs
        years = int(years_raw) if years_raw else defaults.recent_years
    except ValueError as exc:
        raise DiligenceError(f"non-integer value in service configuration: {exc}")
    if years < 1:
        raise DiligenceError("DILIGENCE_RECENT_YEARS must be at least 1")

    providers = (_env(env, "PROVIDERS") or defaults.providers).lower()
    if providers == "live":
        raise DiligenceError(
            "live providers are not bundled with this build; the interfaces "
            "accept drop-in adapters, but configuration supports 'fixture' "
            "and 'replay'"
        )
    if providers not in ("fixture", "replay"):
        raise DiligenceError(
            f"unknown provider selection {providers!r}; expected 'fixture' or 'replay'"
        )
    replay_record = _env(env, "REPLAY_RECORD")
    if providers == "replay" and not replay_record:
        raise DiligenceError(
            "provider selection 'replay' requires DILIGENCE_REPLAY_RECORD "
            "to point at a recorded session file"
        )

    sink = _env(env, "SINK") or defaults.sink
    if sink not in ("file", "none") and not sink.startswith("smtp:"):
        raise DiligenceError(
            f"unknown delivery sink {sink!r}; expected 'file', 'none', or 'smtp:<host>[:<port>]'"
        )

    if altfin_raw is None:
        altfin_paths = defaults.altfin_paths
    elif altfin_raw.lower() == "none":
        altfin_paths = ()
    else:
        altfin_paths = tuple(
            Path(part) for part in altfin_raw.split(os.pathsep) if part
        )

    graph_raw = _env(env, "GRAPH")
    journal_raw = _env(env, "JOURNAL")
    return ServiceSettings(
        host=_env(env, "HOST") or defaults.host,
        port=port,
        company_db=Path(_env(env, "COMPANY_DB") or defaults.company_db),
        providers=providers,
        replay_record=Path(replay_record) if replay_record else None,
        retrieval_corpus=Path(
            _env(env, "RETRIEVAL_CORPUS") or defaults.retrieval_corpus
        ),
        registry_url=_env(env, "REGISTRY_URL"),
        registry_corpus=Path(_env(env, "REGISTRY_CORPUS") or defaults.registry_corpus),
        altfin_paths=altfin_paths,
        sink=sink,
        out_dir=Path(_env(env, "OUT_DIR") or defaults.out_dir),
        delivered_dir=Path(_env(env, "DELIVERED_DIR") or defaults.delivered_dir),
        graph_path=Path(graph_raw) if graph_raw else None,
        recent_docs=recent,
        recent_years=years,
        journal_path=Path(journal_raw) if journal_raw else None,
    )


def build_sink(settings: ServiceSettings) -> Optional[DeliverySink]:
    if settings.sink == "none":
        return None
    if settings.sink == "file":
        return FileDropSink(settings.delivered_dir)
    spec = settings.sink[len("smtp:") :]
    host, _, port = spec.partition(":")
    if not host:
        raise DiligenceError(f"smtp sink needs a host: {settings.sink!r}")
    return SmtpSink(host, int(port) if port else 25)


def build_registry_client(settings: ServiceSettings) -> Optional[EndpointClient]:
    if settings.registry_url:
        return HttpEndpointClient(settings.registry_url)
    if settings.registry_corpus.is_dir():
        return DirectCorpusClient(settings.registry_corpus)
    return None


def build_pipeline_config(settings: ServiceSettings) -> PipelineConfig:
    """Materialize providers and clients from the settings."""
    if settings.providers == "replay":
        assert settings.replay_record is not None  # enforced at parse time
        completion = ReplayCompletionProvider(settings.replay_record)
        retrieval = ReplayRetrievalProvider(settings.replay_record)
    else:
        completion = FixtureCompletionProvider()
        retrieval = FixtureRetrievalProvider(settings.retrieval_corpus)
    return PipelineConfig(
        company_db=load_company_db(settings.company_db),
        completion=completion,
        retrieval=retrieval,
        registry_client=build_registry_client(settings),
        alt_providers=tuple(
            FixtureAltFinancialsProvider(path) for path in settings.altfin_paths
        ),
        sink=build_sink(settings),
        out_dir=settings.out_dir,
        recent_docs=settings.recent_docs,
        recent_years=settings.recent_years,
    )


def load_service_graph(settings: ServiceSettings) -> WorkflowGraph:
    if settings.graph_path is not None:
        return load_graph(settings.graph_path)
    return load_default_graph()
