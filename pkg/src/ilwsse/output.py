"""Deterministic CSV/JSON emission with a metadata header.

Every file starts with the same metadata block: tool name and version,
the versions of the numerical dependencies, the command and a SHA-256 hash
of the canonicalized configuration.  Nothing time-dependent is written, so
identical configurations give byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
from importlib import metadata
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["canonical_json", "config_hash", "file_metadata", "write_csv", "write_json",
           "read_csv", "to_jsonable"]

_DEPENDENCIES = ("numpy", "scipy", "python-flint", "mpmath")


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers into JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _float(obj.real), "im": _float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    return obj


def _float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def _versions():
    out = {}
    for name in _DEPENDENCIES:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = "absent"
    return out


def file_metadata(command: str, config) -> dict:
    return {
        "tool": "ilwsse",
        "version": __version__,
        "command": command,
        "config_hash": config_hash(config),
        "dependencies": _versions(),
    }


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows, meta: dict) -> Path:
    """CSV with one ``# meta {json}`` line, a header row and ``repr`` floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# meta " + canonical_json(meta), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(meta, columns, float rows)``."""
    meta, columns, rows = None, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# meta "):
            meta = json.loads(line[len("# meta "):])
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    return meta, columns, np.array(rows)


def write_json(path, payload, meta: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"meta": meta, "result": to_jsonable(payload)}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path
