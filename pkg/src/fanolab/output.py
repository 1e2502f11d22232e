"""Deterministic table writers: CSV with ``#`` metadata or JSON, plus a JSON sidecar."""

from __future__ import annotations

import json
import os
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def fmt(value) -> str:
    """17 significant digits; round-trips exactly."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # JSON floats from repr are the shortest round-trip form
        return float(value)
    if hasattr(value, "value"):  # enums
        return value.value
    return value


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def ensure_dir(path: Path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def write_table(
    stem: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    meta: dict,
    output_format: str = "csv",
) -> list[Path]:
    """Write ``stem.csv`` (or ``stem.json``) and ``stem.meta.json``; return both paths."""
    stem = Path(stem)
    meta = {"tool": "fanolab", "version": tool_version(), **meta, "columns": list(columns)}
    rows = [list(r) for r in rows]
    if output_format == "csv":
        path = stem.with_name(stem.name + ".csv")
        lines = [f"# {line}" for line in dumps(meta).rstrip("\n").splitlines()]
        lines.append(",".join(columns))
        lines.extend(",".join(fmt(v) for v in row) for row in rows)
        _write_text(path, "\n".join(lines) + "\n")
    elif output_format == "json":
        path = stem.with_name(stem.name + ".json")
        _write_text(path, dumps({"meta": meta, "columns": list(columns), "rows": rows}))
    else:
        raise ConfigError(f"unknown output format {output_format!r}")
    sidecar = stem.with_name(stem.name + ".meta.json")
    _write_text(sidecar, dumps(meta))
    return [path, sidecar]


def write_report(path: Path, report: dict) -> Path:
    _write_text(Path(path), dumps(report))
    return Path(path)


def read_csv_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Column names and data of a table written by :func:`write_table`."""
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    columns = lines[0].strip().split(",")
    if len(lines) == 1:
        return columns, np.empty((0, len(columns)))
    data = np.array([[float(x) for x in line.strip().split(",")] for line in lines[1:]])
    return columns, data
