"""Deterministic report writing and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

import numpy as np


def plain(obj: Any) -> Any:
    """JSON-ready copy: numpy scalars and arrays become Python values,
    non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dumps(obj: Any) -> str:
    # repr of a double is its shortest round-trip form, so output is stable
    return json.dumps(plain(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def sha256(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class ArtifactWriter:
    """Single writer for one output directory; remembers what it wrote."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.files: List[str] = []

    def path(self, name: str) -> Path:
        return self.root / name

    def _record(self, name: str) -> Path:
        if name not in self.files:
            self.files.append(name)
        return self.path(name)

    def text(self, name: str, content: str) -> Path:
        p = self._record(name)
        p.write_text(content, encoding="utf-8", newline="\n")
        return p

    def json(self, name: str, obj: Any) -> Path:
        return self.text(name, dumps(obj))

    def register(self, name: str) -> Path:
        """Record a file written by someone else (e.g. a snapshot)."""
        return self._record(name)

    def listing(self) -> List[dict]:
        return [{"path": n, "sha256": sha256(self.path(n)), "bytes": self.path(n).stat().st_size} for n in self.files]
