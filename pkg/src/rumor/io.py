"""Artifact I/O: CSV with an embedded JSON header, flat float files, grids.

Every CSV starts with a ``#``-prefixed JSON line carrying the metadata needed
to reproduce the file (command, parameters, seed, version), then a plain
header row and the data.  Large sample sets can be persisted as flat
little-endian float64 files with the same metadata in a ``.meta.json``
sidecar.  Timing and other non-reproducible context never go into the CSV
header (it must stay byte-stable for identical inputs); they belong in the
sidecar.
"""

import json
import math
import os
from typing import Dict, Sequence, Tuple

import numpy as np


class FormatError(ValueError):
    """Raised when an input artifact exists but cannot be parsed."""


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def metadata_line(meta: dict) -> str:
    return "# " + json.dumps(_jsonable(meta), sort_keys=True, separators=(",", ":"))


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        # repr is the shortest round-trip form
        return repr(float(value))
    return str(value)


def write_csv(path: str, columns: Sequence[Tuple[str, Sequence]], meta: dict) -> None:
    """Write named columns with a metadata header; byte-stable per input."""
    names = [name for name, _ in columns]
    vectors = [list(values) for _, values in columns]
    lengths = {len(v) for v in vectors}
    if len(lengths) > 1:
        raise ValueError("columns must have equal length")
    rows = len(vectors[0]) if vectors else 0
    lines = [metadata_line(meta), ",".join(names)]
    for r in range(rows):
        lines.append(",".join(_format_cell(v[r]) for v in vectors))
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_csv(path: str) -> Tuple[dict, Dict[str, np.ndarray]]:
    """Read a metadata-headed CSV; every column is parsed as float64."""
    with open(path, "r", encoding="ascii") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines:
        raise FormatError(f"{path}: empty file")
    meta = {}
    if lines[0].startswith("#"):
        try:
            meta = json.loads(lines[0].lstrip("#").strip())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: bad metadata line: {exc}") from exc
        lines = lines[1:]
    if not lines:
        raise FormatError(f"{path}: missing header row")
    names = lines[0].split(",")
    data = [[] for _ in names]
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(names):
            raise FormatError(f"{path}: ragged row {line!r}")
        for col, cell in enumerate(cells):
            try:
                data[col].append(float(cell))
            except ValueError as exc:
                raise FormatError(f"{path}: non-numeric cell {cell!r}") from exc
    return meta, {name: np.asarray(values, dtype=np.float64)
                  for name, values in zip(names, data)}


def write_f64(path: str, values: np.ndarray, meta: dict) -> None:
    """Write a flat little-endian float64 file plus a metadata sidecar."""
    array = np.asarray(values, dtype="<f8")
    with open(path, "wb") as handle:
        handle.write(array.tobytes())
    write_sidecar(path, meta)


def read_f64(path: str) -> Tuple[dict, np.ndarray]:
    with open(path, "rb") as handle:
        raw = handle.read()
    if len(raw) % 8 != 0:
        raise FormatError(f"{path}: length is not a multiple of 8 bytes")
    meta = {}
    sidecar = path + ".meta.json"
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="ascii") as handle:
            meta = json.load(handle)
    return meta, np.frombuffer(raw, dtype="<f8").copy()


def write_sidecar(path: str, meta: dict) -> None:
    with open(path + ".meta.json", "w", encoding="ascii", newline="\n") as handle:
        json.dump(_jsonable(meta), handle, sort_keys=True, indent=2)
        handle.write("\n")


def load_samples(path: str) -> Tuple[dict, np.ndarray]:
    """Load a sample vector from a flat float file or a value-column CSV."""
    if path.endswith(".csv"):
        meta, columns = read_csv(path)
        if "value" not in columns:
            raise FormatError(f"{path}: sample CSV needs a 'value' column")
        return meta, columns["value"]
    return read_f64(path)


def parse_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:step`` (inclusive of stop, to rounding) or a scalar."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start:stop:step' or a scalar, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop must not precede start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)
