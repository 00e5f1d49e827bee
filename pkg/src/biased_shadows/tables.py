"""Self-describing CSV output: one '#' JSON config line, then the data.

Floats are printed with 17 significant digits so files round-trip losslessly
and two runs with the same resolved config are byte identical.  Writes are
atomic (temp file + rename), so failed runs leave no partial output.
"""

import json
import os
import tempfile

import numpy as np


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def header_line(config: dict) -> str:
    return "# " + json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))


def write_table(path: str, config: dict, columns, rows) -> None:
    """Write header + CSV atomically; any error leaves the target untouched."""
    lines = [header_line(config), ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    payload = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_table(path: str):
    """(config, columns, rows-of-strings) from a file written by write_table."""
    with open(path, "r", newline="") as handle:
        first = handle.readline().rstrip("\n")
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing '# ' JSON config header")
        config = json.loads(first[2:])
        columns = handle.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in handle if line.strip()]
    return config, columns, rows
