"""CSV and manifest writing shared by the harness and the CLI.

Floats are written with ``repr`` so output files round-trip exactly and a
rerun with the same seed is byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path


def format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def write_manifest(path, entries: dict) -> Path:
    """Write a key=value manifest with deterministically sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={format_cell(entries[key])}" for key in sorted(entries)]
    path.write_text("\n".join(lines) + "\n")
    return path
