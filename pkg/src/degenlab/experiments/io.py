"""Result tables and their CSV form.

One convention everywhere: header row mandatory, '.' decimal point,
floats in scientific notation with 17 significant digits so a reread
reproduces the double exactly.  Integers and names stay literal.
Nothing time- or machine-dependent may enter a table; byte-identical
reruns are a contract, and the summary file carries the runtime
instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

__all__ = ["Table", "format_cell", "write_table", "read_table"]


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.16e}"
    return str(v)


@dataclass
class Table:
    """Ordered columns with rows of per-column values."""

    columns: list
    rows: list = field(default_factory=list)

    def append(self, row: dict):
        missing = [c for c in self.columns if c not in row]
        extra = [c for c in row if c not in self.columns]
        if missing or extra:
            raise ValueError(
                f"row keys {sorted(row)} do not match columns {self.columns}")
        self.rows.append({c: row[c] for c in self.columns})

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def with_lead(self, name, value) -> "Table":
        """Copy with one constant column prepended; sweeps use this to
        stamp rows with the sweep variable."""
        out = Table(columns=[name] + list(self.columns))
        for r in self.rows:
            out.rows.append({name: value, **r})
        return out


def write_table(table: Table, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(table.columns)
        for row in table.rows:
            out.writerow([format_cell(row[c]) for c in table.columns])


def read_table(path) -> Table:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty table, the header row is mandatory")
    table = Table(columns=rows[0])
    for raw in rows[1:]:
        row = {}
        for name, cell in zip(table.columns, raw):
            try:
                row[name] = int(cell)
            except ValueError:
                try:
                    row[name] = float(cell)
                except ValueError:
                    row[name] = cell
        table.rows.append(row)
    return table
