"""Deterministic CSV / JSON writers.

CSV uses '.' decimals, no thousands separators, newline-terminated rows;
floats are written with shortest round-trip repr.  JSON uses UTF-8 with
sorted keys.  Files are written to a temporary sibling and atomically
renamed so outputs appear only once complete.
"""

import json
import os
import tempfile

import numpy as np


def _format_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(cell) for cell in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def to_builtin(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization.

    Non-finite floats become None so the emitted JSON stays standard.
    """
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    if isinstance(obj, np.ndarray):
        return [to_builtin(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(x) for x in obj]
    return obj


def write_json(path, obj):
    _atomic_write(path, json.dumps(to_builtin(obj), sort_keys=True, indent=2) + "\n")
