"""HTTP service, run management, and CLI over the pipeline."""

from diligence.service.app import create_app
from diligence.service.config import (
    ServiceSettings,
    build_pipeline_config,
    settings_from_env,
)
from diligence.service.runs import RunManager, RunRecord

__all__ = [
    "create_app",
    "ServiceSettings",
    "build_pipeline_config",
    "settings_from_env",
    "RunManager",
    "RunRecord",
]
