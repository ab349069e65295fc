"""Per-iteration run traces and their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

HEADER = ["iter", "elapsed_ms", "energy", "accepted", "beta"]


class TraceRow(NamedTuple):
    iteration: int
    elapsed_ms: float
    energy: float
    accepted: bool
    beta: float


@dataclass
class RunTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def append(self, iteration, elapsed_ms, energy, accepted, beta):
        if self.rows and iteration <= self.rows[-1].iteration:
            raise ValueError("trace iterations must be strictly increasing")
        self.rows.append(TraceRow(int(iteration), float(elapsed_ms), float(energy),
                                  bool(accepted), float(beta)))

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def energies(self):
        return [r.energy for r in self.rows]


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for r in trace:
            w.writerow([r.iteration, f"{r.elapsed_ms:.3f}", repr(r.energy),
                        int(r.accepted), repr(r.beta)])


def read_trace(path):
    trace = RunTrace()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if next(reader) != HEADER:
            raise ValueError(f"{path}: not a trace file")
        for it, ms, energy, acc, beta in reader:
            trace.append(int(it), float(ms), float(energy), acc == "1", float(beta))
    return trace
