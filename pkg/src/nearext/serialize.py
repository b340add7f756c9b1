"""Atomic artifact writing and number formatting.

Every output file is written to a temporary sibling and renamed into place,
so interrupted runs never leave torn CSV/JSON behind.  CSV numbers carry 17
significant digits; JSON floats use Python's shortest round-trip repr (both
parse back to the exact double).  No wall-clock data is embedded, so reruns
are byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

__all__ = ["fmt", "atomic_write_text", "write_csv", "write_json", "read_json"]


def fmt(x) -> str:
    """Format one numeric value for CSV output."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-",
                               suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(path, header: Sequence[str], columns: Iterable) -> None:
    """Write equal-length columns as CSV with 17-significant-digit floats."""
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    if cols:
        n = len(cols[0])
        for c in cols:
            if len(c) != n:
                raise ValueError("all CSV columns must share one length")
        for i in range(n):
            lines.append(",".join(fmt(c[i]) for c in cols))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
