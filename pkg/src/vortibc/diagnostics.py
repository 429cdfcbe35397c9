"""Per-step diagnostics container shared by the time-dependent solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .io import write_csv


@dataclass
class DiagnosticsRecord:
    """Fixed-column table of per-step norms, balances, and residuals."""

    columns: tuple
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(float(v) for v in values))

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def write_csv(self, path):
        write_csv(path, self.columns, self.rows)
