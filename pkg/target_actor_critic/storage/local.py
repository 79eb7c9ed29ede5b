"""Local result storage: reading input documents and writing outputs into one directory."""

import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd
import yaml

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def content_hash(source: Union[str, Path, bytes]) -> str:
    """
    Compute the sha256 hex digest of a file or a byte string.

    Args:
        source: Path to a file, or raw bytes

    Returns:
        str: 64-character hex digest
    """
    if isinstance(source, bytes):
        return hashlib.sha256(source).hexdigest()
    return hashlib.sha256(Path(source).read_bytes()).hexdigest()


def document_hash(document: Any) -> str:
    """sha256 of a JSON-serialisable document with sorted keys."""
    payload = json.dumps(document, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def load_document(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a YAML or JSON document holding a mapping.

    Args:
        path: Path to the document; '.json' files are parsed as JSON, anything else as YAML

    Returns:
        Dict with the document contents

    Raises:
        ValueError: If the document is not a mapping
        Exception: If reading or parsing fails
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        data = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    except Exception as e:
        logger.error(f"Error reading document {path}: {str(e)}")
        raise
    if not isinstance(data, dict):
        raise ValueError(f"Document {path} must hold a mapping, got {type(data).__name__}")
    return data


def dataframe_to_csv_bytes(df: pd.DataFrame, float_format: str = CSV_FLOAT_FORMAT) -> bytes:
    """Render a DataFrame as locale-free CSV with bit-stable floats."""
    buffer = io.StringIO()
    df.to_csv(buffer, index=False, float_format=float_format, lineterminator="\n")
    return buffer.getvalue().encode("utf-8")


class ResultStore:
    """Writes outputs of one subcommand, refusing any path outside its directory."""

    def __init__(self, out_dir: Union[str, Path], float_format: str = CSV_FLOAT_FORMAT):
        """
        Initialize ResultStore.

        Args:
            out_dir: Declared output directory (created on first write)
            float_format: printf-style float format for CSV output
        """
        self.out_dir = Path(out_dir).resolve()
        self.float_format = float_format

    def resolve(self, name: str) -> Path:
        """
        Resolve an output name inside the output directory.

        Raises:
            ValueError: If the resolved path escapes the output directory
        """
        target = (self.out_dir / name).resolve()
        if target != self.out_dir and self.out_dir not in target.parents:
            raise ValueError(f"Refusing to write outside {self.out_dir}: {name}")
        return target

    def save_data(
        self,
        data: Union[pd.DataFrame, dict, list, str, bytes],
        name: str,
        file_type: Optional[str] = None,
    ) -> Path:
        """
        Save data in one of the supported formats.

        Args:
            data: DataFrame (csv), mapping/list (json, yaml), or text/bytes (svg, txt)
            name: File name relative to the output directory
            file_type: 'csv', 'json', 'yaml', 'svg' or 'txt'; inferred from the
                extension when None

        Returns:
            Path: The written file

        Raises:
            ValueError: If the file type is not supported or the path escapes out_dir
        """
        if file_type is None:
            file_type = Path(name).suffix.lower().replace(".", "")
        file_type = file_type.lower()

        writers = {
            "csv": lambda d: dataframe_to_csv_bytes(
                d if isinstance(d, pd.DataFrame) else pd.DataFrame(d), self.float_format
            ),
            "json": lambda d: (json.dumps(d, indent=2, sort_keys=True, default=str) + "\n").encode(
                "utf-8"
            ),
            "yaml": lambda d: yaml.safe_dump(d, sort_keys=False).encode("utf-8"),
            "yml": lambda d: yaml.safe_dump(d, sort_keys=False).encode("utf-8"),
            "svg": lambda d: d if isinstance(d, bytes) else str(d).encode("utf-8"),
            "txt": lambda d: d if isinstance(d, bytes) else str(d).encode("utf-8"),
        }
        if file_type not in writers:
            raise ValueError(
                f"Unsupported file type: {file_type}. "
                f"Supported types: {', '.join(writers.keys())}"
            )

        target = self.resolve(name)
        try:
            payload = writers[file_type](data)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(payload)
        except Exception as e:
            logger.error(f"Error saving {name}: {str(e)}")
            raise
        logger.info(f"Saved {file_type} output to {target}")
        return target
