"""File formats: one-value-per-line series, CSV reports, JSON configs.

Series files are UTF-8 text with one value per line and an optional single
header line. Report CSVs start with a ``#`` line carrying the schema version
and the full effective configuration, so every report can be traced back to
(and regenerated from) the run that produced it.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

__all__ = [
    "SCHEMA_VERSION",
    "ParseError",
    "read_series",
    "read_scores",
    "read_labels",
    "format_series",
    "format_csv",
    "dumps_json",
    "sha256_text",
    "AtomicOutput",
]

SCHEMA_VERSION = 1


class ParseError(ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def read_series(path, kind="scores") -> np.ndarray:
    """Parse a one-column file. ``kind`` is ``"scores"`` or ``"labels"``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read file: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise ParseError(path, 0, "file is not valid UTF-8") from None

    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," in line:
            raise ParseError(path, lineno, f"expected one value per line, got {line!r}")
        try:
            value = float(line)
        except ValueError:
            if not values and lineno == _first_content_line(text):
                continue  # single header line
            raise ParseError(path, lineno, f"not a number: {line!r}") from None
        if not np.isfinite(value):
            raise ParseError(path, lineno, f"non-finite value {line!r}")
        if kind == "labels" and value not in (0.0, 1.0):
            raise ParseError(path, lineno, f"label must be 0 or 1, got {line!r}")
        values.append(value)
    if not values:
        raise ParseError(path, 0, "no values found")
    arr = np.asarray(values, dtype=np.float64)
    return arr.astype(np.int8) if kind == "labels" else arr


def _first_content_line(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            return lineno
    return 0


def read_scores(path) -> np.ndarray:
    return read_series(path, "scores")


def read_labels(path) -> np.ndarray:
    return read_series(path, "labels")


def format_series(values, header, fmt="{:.17g}") -> str:
    lines = [header]
    lines.extend(fmt.format(v) for v in values)
    return "\n".join(lines) + "\n"


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def format_csv(rows, fieldnames, command, config) -> str:
    """CSV text whose first line is a ``#`` comment embedding ``config``."""
    buf = io.StringIO()
    meta = json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)
    buf.write(f"# cceval {command} schema={SCHEMA_VERSION} config={meta}\n")
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in fieldnames})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(v).lower()
    return v


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class AtomicOutput:
    """Stage files in a scratch directory and move them into place on success.

    If the ``with`` block raises, nothing is written to ``out_dir``.
    """

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self._files: dict[str, str] = {}

    def write(self, relpath: str, text: str):
        self._files[relpath] = text

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self._files.clear()
            return False
        self.out_dir.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".cceval-", dir=self.out_dir))
        try:
            for rel, text in self._files.items():
                target = staging / rel
                target.parent.mkdir(parents=True, exist_ok=True)
                with open(target, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
            for rel in self._files:
                final = self.out_dir / rel
                final.parent.mkdir(parents=True, exist_ok=True)
                os.replace(staging / rel, final)
        finally:
            shutil.rmtree(staging, ignore_errors=True)
        return False
