"""Settings and run-configuration documents for the lab."""

from target_actor_critic.config.documents import RunDocument, load_run_document, parse_run_document
from target_actor_critic.config.loader import ConfigLoader, LabConfig, load_settings

__all__ = [
    "ConfigLoader",
    "LabConfig",
    "load_settings",
    "RunDocument",
    "load_run_document",
    "parse_run_document",
]
