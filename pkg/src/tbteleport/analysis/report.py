"""Run reports: deterministic JSON plus a flat CSV summary."""

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


def plain(obj):
    """Convert numpy/enums/tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(plain(k)) if not isinstance(k, str) else k: plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else (str(x) if math.isinf(x) else x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class RunReport:
    """Everything one CLI invocation measured.

    ``results`` holds the experiment-specific sections; ``summary_rows``
    is the table written to ``summary.csv``.
    """

    name: str
    experiment: str
    seed: int
    duration_h: float
    config: dict
    results: dict = field(default_factory=dict)
    summary_rows: list = field(default_factory=list)

    def __post_init__(self):
        self._check()

    def _check(self):
        for row in self.summary_rows:
            f = row.get("fidelity")
            if f is not None and not 0.0 <= f <= 1.0:
                raise ValueError(f"fidelity out of range: {f}")
            r = row.get("rate_per_hour")
            if r is not None and r < 0:
                raise ValueError(f"negative rate: {r}")

    def to_dict(self):
        return plain({"name": self.name, "experiment": self.experiment, "seed": self.seed,
                      "duration_h": self.duration_h, "config": self.config,
                      "results": self.results, "summary": self.summary_rows})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, out_dir):
        self._check()
        out = Path(out_dir)
        (out / "report.json").write_text(self.to_json())
        keys = sorted({k for row in self.summary_rows for k in row})
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for row in self.summary_rows:
                w.writerow({k: _fmt(row.get(k)) for k in keys})


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return plain(v)
