"""Sampled-observable records shared by the quantum, mean-field and
phase-resolved engines, with CSV export."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class TimeSeries:
    """Time grid plus named observable columns of equal length.

    ``meta`` carries run diagnostics (integrator statistics, truncation
    monitors, termination flags); it is not written to CSV.
    """

    t: np.ndarray
    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        for name, col in self.columns.items():
            col = np.asarray(col)
            if col.shape != self.t.shape:
                raise ValueError(f"column {name!r} has shape {col.shape}, "
                                 f"expected {self.t.shape}")
            self.columns[name] = col

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def header(self) -> str:
        return ",".join(["t"] + self.names)

    def write_csv(self, path: str | os.PathLike) -> None:
        """Write atomically: a finished file is never clobbered by a
        partial one."""
        write_csv_atomic(path, self.header(),
                         [self.t] + [self.columns[k] for k in self.names])


def write_csv_atomic(path, header: str, cols: list[np.ndarray]) -> None:
    path = os.fspath(path)
    tmp = path + ".partial"
    data = np.column_stack([np.asarray(c, dtype=float) for c in cols])
    with open(tmp, "w") as fh:
        fh.write(header + "\n")
        for row in data:
            # repr: shortest digit string that round-trips the float
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    os.replace(tmp, path)
