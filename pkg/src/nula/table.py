"""Result tables with deterministic CSV and JSON rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np


def _cell_csv(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return "" if value is None else str(value)


def _cell_json(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class ResultTable:
    """Named columns, rows in emission order and a metadata mapping.

    Rendering never includes timing information, so the same inputs give
    byte-identical output.
    """

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(tuple(row))

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        """Header plus rows; floats with 12 significant digits, ``\\n`` line ends."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell_csv(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        """Full-precision JSON; non-finite floats become ``null``."""
        doc = {
            "metadata": {k: _cell_json(v) for k, v in sorted(self.metadata.items())},
            "columns": list(self.columns),
            "rows": [[_cell_json(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")
