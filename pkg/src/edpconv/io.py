"""Deterministic, atomic output writers.

Floats are written with ``repr``, the shortest decimal string that parses
back to the same double; this is locale independent.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["format_number", "csv_bytes", "json_bytes", "write_atomic", "write_all"]


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_bytes(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    lines = [",".join(header)]
    lines.extend(",".join(format_number(x) for x in row) for row in rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _plain(obj):
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def json_bytes(obj) -> bytes:
    return (json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n").encode("utf-8")


def write_atomic(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_all(out_dir: Path, files: Mapping[str, bytes]) -> list[Path]:
    """Write every file atomically, in sorted name order."""
    written = []
    for name in sorted(files):
        p = Path(out_dir) / name
        write_atomic(p, files[name])
        written.append(p)
    return written
