# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Provides shared utility functions used across the pipeloc commands.

This module contains the console instances, TOML reading and writing, the
JSON-lines reader/writer used for every run artifact, atomic file writes and
the hashing used to fingerprint a run configuration.
"""

import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import tomli_w
from rich.console import Console

from .errors import LogParseError

# Conditional import of TOML library for Python version compatibility.
if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

console = Console()
error_console = Console(stderr=True)

# Decimal places of every float written to a run artifact.
FLOAT_DECIMALS = 9


def round_float(value: float) -> float:
    return round(float(value), FLOAT_DECIMALS)


def atomic_write_text(path: Path, text: str):
    """
    Writes ``text`` to ``path`` through a temporary file and a rename.

    Readers never observe a half-written file; on failure the temporary file
    is removed and the previous content of ``path`` is untouched.

    :param Path path: Destination file.
    :param str text: Full file content.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def write_jsonl(path: Path, records: Iterable[dict]):
    lines = [json.dumps(record) for record in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_jsonl(
    path: Path,
    fields: Sequence[str],
    text_fields: Sequence[str] = (),
    allow_empty: bool = False,
) -> list[dict]:
    """
    Reads a JSON-lines file whose records must all carry ``fields``.

    :param Path path: The file to read.
    :param fields: Numeric field names every record must contain.
    :param text_fields: String field names every record must contain.
    :param bool allow_empty: Accept a file without records.
    :return: The parsed records, in file order.
    :rtype: list[dict]
    :raises LogParseError: If the file is missing, a line is not JSON, a
                           record lacks a field or has a non-numeric value,
                           or the file is empty and ``allow_empty`` is off.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise LogParseError(f"cannot read '{path}': {e.strerror or e}") from e

    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise LogParseError(f"{path.name}:{line_no}: not valid JSON ({e.msg})") from e
        if not isinstance(record, dict):
            raise LogParseError(f"{path.name}:{line_no}: expected a JSON object")
        missing = [name for name in (*fields, *text_fields) if name not in record]
        if missing:
            raise LogParseError(f"{path.name}:{line_no}: missing field(s) {', '.join(missing)}")
        for name in fields:
            value = record[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise LogParseError(f"{path.name}:{line_no}: field '{name}' is not a number")
        for name in text_fields:
            if not isinstance(record[name], str):
                raise LogParseError(f"{path.name}:{line_no}: field '{name}' is not a string")
        records.append(record)
    if not records and not allow_empty:
        raise LogParseError(f"'{path}' contains no records")
    return records


def write_json(path: Path, data: dict):
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_toml(path: Path, data: dict):
    atomic_write_text(path, tomli_w.dumps(data))


def read_toml(path: Path) -> dict:
    with open(path, "rb") as f:
        return tomllib.load(f)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of a resolved configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
