"""Event-rate estimates with Poisson uncertainty."""

from dataclasses import dataclass

import numpy as np

from ..validation import check_scalar


@dataclass(frozen=True)
class Rate:
    per_hour: float
    stderr: float
    count: float
    hours: float

    def as_dict(self):
        return {"per_hour": self.per_hour, "stderr": self.stderr, "count": self.count,
                "hours": self.hours}


def event_rate(events, duration_h):
    """Events per hour; ``events`` is a sequence or a plain count."""
    check_scalar(duration_h, "duration_h", min_val=0.0, include_min=False)
    n = float(events) if np.isscalar(events) else float(len(events))
    return Rate(n / duration_h, float(np.sqrt(n)) / duration_h, n, float(duration_h))


def fringe_max_rate(fits, duration_h):
    """Rate defined by the fitted fringe maxima of both Bell outcomes.

    Each fringe point integrates ``duration_h``; the sum of the fitted
    maxima over that time is the headline teleportation rate.
    """
    total = sum(f.maximum for f in fits)
    var = sum(f.amplitude_stderr ** 2 + f.offset_stderr ** 2 for f in fits)
    return Rate(total / duration_h, float(np.sqrt(var)) / duration_h, float(total),
                float(duration_h))
