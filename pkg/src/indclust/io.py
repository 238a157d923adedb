"""CSV ingestion/export and the versioned result JSON."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import Partition, SeriesSet, ValidationError

SCHEMA_VERSION = 1


class DataError(ValidationError):
    """Malformed input file."""


def read_csv(path) -> SeriesSet:
    """One column per series, one row per time step, header row of names."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        if not names or any(not h for h in names):
            raise DataError(f"{path}:1: blank column name in header")
        rows = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in values):
                raise DataError(f"{path}:{lineno}: non-finite value")
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    try:
        return SeriesSet(np.array(rows).T, tuple(names))
    except ValidationError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_csv(s: SeriesSet, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(s.names)
        for row in s.data.T:
            w.writerow([repr(float(v)) if not float(v).is_integer() else str(int(v)) for v in row])


def partition_json(p: Partition, names) -> dict:
    return {
        "partition": p.as_lists(one_based=True),
        "clusters": [[names[i] for i in b] for b in p.as_lists()],
        "k": p.k,
    }


def partition_from_json(obj) -> Partition:
    """Inverse of the ``partition`` field (1-based index lists)."""
    blocks = [[int(i) - 1 for i in b] for b in obj]
    return Partition.from_blocks(blocks)


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


RESULT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "mode", "partition", "clusters", "k", "score",
                 "oracle_calls", "estimator_calls", "call_bound", "candidates_examined", "config", "seed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"const": "cluster"},
        "mode": {"enum": ["oracle", "iid", "stationary"]},
        "partition": {"type": "array", "minItems": 1,
                      "items": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}}},
        "clusters": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
        "k": {"type": "integer", "minimum": 1},
        "score": {"type": ["number", "null"]},
        "oracle_calls": {"type": "integer", "minimum": 0},
        "estimator_calls": {"type": "integer", "minimum": 0},
        "call_bound": {"type": "integer", "minimum": 0},
        "candidates_examined": {"type": "integer", "minimum": 0},
        "compression_rate_bits": {"type": ["number", "null"]},
        "config": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
    },
}
