"""Artifact persistence: atomic writes, commented CSV tables and the result store.

Every artifact opens with a ``# config_hash=... version=...`` comment line.
Files are written to a temporary sibling and renamed into place, so a
reader never observes a half-written artifact.
"""

import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import TypeVar

import pandas as pd
from pydantic import BaseModel, ValidationError

from lade_lab import __version__
from lade_lab.errors import ArtifactError
from lade_lab.schemas import ResultRecord

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def write_text_atomic(path: Path, text: str) -> None:
    """Write text via temp file + rename.

    Raises:
        ArtifactError: If the directory cannot be created or written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e.strerror or e}") from e
    logger.debug("Wrote %s", path)


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ArtifactError(f"missing artifact {path}") from e
    except OSError as e:
        raise ArtifactError(f"cannot read {path}: {e.strerror or e}") from e


def write_table(path: Path, frame: pd.DataFrame, header: str) -> None:
    """CSV with a leading comment line; floats are written shortest-round-trip."""
    buffer = io.StringIO()
    buffer.write(header + "\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    write_text_atomic(path, buffer.getvalue())


def read_table(path: Path) -> pd.DataFrame:
    """Load a table written by write_table, floats reproduced bit for bit.

    Raises:
        ArtifactError: If the file is missing, empty or not parseable CSV
    """
    text = _read_text(path)
    try:
        return pd.read_csv(io.StringIO(text), comment="#", float_precision="round_trip")
    except pd.errors.EmptyDataError as e:
        raise ArtifactError(f"{path} holds no table") from e
    except pd.errors.ParserError as e:
        raise ArtifactError(f"{path} is not a valid table: {e}") from e


def read_header(path: Path) -> dict[str, str]:
    """Parse the ``key=value`` pairs of an artifact's comment line."""
    first = _read_text(path).split("\n", 1)[0]
    if not first.startswith("#"):
        raise ArtifactError(f"{path} does not start with a header comment")
    pairs = (token.partition("=") for token in first[1:].split())
    return {key: value for key, sep, value in pairs if sep}


def write_model(path: Path, model: BaseModel, header: str) -> None:
    """Comment line followed by the model's JSON.

    Floats go through repr (json.dumps), so read_model restores them bit for bit.
    """
    body = json.dumps(model.model_dump(mode="json", by_alias=True), indent=1)
    write_text_atomic(path, header + "\n" + body + "\n")


def read_model(path: Path, model_type: type[ModelT]) -> ModelT:
    """Inverse of write_model.

    Raises:
        ArtifactError: If the file is missing or does not hold a valid model
    """
    _, _, body = _read_text(path).partition("\n")
    try:
        return model_type.model_validate(json.loads(body))
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{path} does not hold JSON: {e.msg}") from e
    except ValidationError as e:
        raise ArtifactError(f"{path} is not a valid {model_type.__name__}: {e.error_count()} errors") from e


class ResultStore:
    """Append-only JSONL store of ResultRecords keyed by config hash.

    Storage location: {base_path}/results.jsonl

    The file opens with the header comment of the experiment that created it,
    followed by one JSON record per line. Every append rewrites the file
    atomically. Records are never modified or deleted; when a hash appears
    more than once the latest record wins.

    Example:
        >>> store = ResultStore(Path("runs/demo"), header=header_line(digest))
        >>> store.append(record)
        >>> store.has_record(record.config_hash)
        True
    """

    def __init__(self, base_path: Path, header: str | None = None) -> None:
        """Initialize result store.

        Args:
            base_path: Experiment directory holding results.jsonl
            header: Comment line written when the store is created
        """
        self.base_path = base_path
        self.results_file = base_path / "results.jsonl"
        self.header = header if header is not None else f"# version={__version__}"

    def append(self, record: ResultRecord) -> None:
        """Add one record as a single JSON line.

        Raises:
            ArtifactError: If the store cannot be read or written
        """
        existing = _read_text(self.results_file) if self.results_file.exists() else ""
        if not existing.startswith("#"):
            existing = self.header + "\n" + existing
        line = json.dumps(record.model_dump(mode="json"), separators=(",", ":"))
        write_text_atomic(self.results_file, existing + line + "\n")
        logger.info("Recorded result %s in %s", record.config_hash, self.results_file)

    def load(self) -> list[ResultRecord]:
        """All records in append order (empty if the store does not exist).

        Raises:
            ArtifactError: If a line is not a valid record
        """
        if not self.results_file.exists():
            return []

        records = []
        for number, line in enumerate(_read_text(self.results_file).splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                records.append(ResultRecord.model_validate(json.loads(line)))
            except json.JSONDecodeError as e:
                raise ArtifactError(f"{self.results_file}:{number} is not JSON: {e.msg}") from e
            except ValidationError as e:
                raise ArtifactError(f"{self.results_file}:{number} is not a valid record") from e
        return records

    def get(self, digest: str) -> ResultRecord | None:
        """Latest record for a config hash, or None."""
        found = None
        for record in self.load():
            if record.config_hash == digest:
                found = record
        return found

    def has_record(self, digest: str) -> bool:
        return self.get(digest) is not None

    def __len__(self) -> int:
        return len(self.load())

    def __repr__(self) -> str:
        """String representation."""
        return f"ResultStore(base_path={self.base_path})"
