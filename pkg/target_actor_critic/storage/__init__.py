"""Input documents and output files."""

from target_actor_critic.storage.local import (
    ResultStore,
    content_hash,
    dataframe_to_csv_bytes,
    document_hash,
    load_document,
)

__all__ = [
    "ResultStore",
    "content_hash",
    "dataframe_to_csv_bytes",
    "document_hash",
    "load_document",
]
