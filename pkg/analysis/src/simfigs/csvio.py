"""Versioned-CSV reading for the simulation outputs.

Every input file starts with ``# schema=<name>`` followed by a header row.
Readers refuse files whose schema does not match the figure kind and error
on missing columns; they never recompute any physics, only reshape.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["SchemaError", "Table", "read_table"]


class SchemaError(ValueError):
    """Schema line missing, mismatched, or required columns absent."""


class Table:
    def __init__(self, schema: str, columns: list[str], cells: list[list[str]], path: Path):
        self.schema = schema
        self.columns = columns
        self.cells = cells
        self.path = path

    def __len__(self) -> int:
        return len(self.cells)

    def column(self, name: str) -> list[str]:
        if name not in self.columns:
            raise SchemaError(f"{self.path}: missing column {name!r} (has {self.columns})")
        idx = self.columns.index(name)
        return [row[idx] for row in self.cells]

    def floats(self, name: str) -> np.ndarray:
        return np.array([float(v) if v != "" else np.nan for v in self.column(name)])


def read_table(path: str | Path, expected_schema: str) -> Table:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise SchemaError(f"{path}: missing '# schema=' header line")
    schema = lines[0][len("# schema=") :].strip()
    if schema != expected_schema:
        raise SchemaError(f"{path}: schema {schema!r}, expected {expected_schema!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path}: missing column header row")
    columns = lines[1].split(",")
    cells = [line.split(",") for line in lines[2:] if line]
    return Table(schema, columns, cells, path)
