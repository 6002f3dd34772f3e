"""Delay-line stabilization of the user/relay arrival-time difference."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .photonics.sources import PULSE_PERIOD_PS
from .validation import check_scalar

CONTROL_PERIOD_S = 25.0


@dataclass(frozen=True)
class DelayLineSpec:
    range_ps: float = 1500.0
    resolution_ps: float = 0.1
    actuation_latency_s: float = 0.0

    def __post_init__(self):
        check_scalar(self.range_ps, "range_ps", min_val=0.0, include_min=False)
        check_scalar(self.resolution_ps, "resolution_ps", min_val=0.0, include_min=False)
        check_scalar(self.actuation_latency_s, "actuation_latency_s", min_val=0.0)

    def quantize(self, command):
        return round(command / self.resolution_ps) * self.resolution_ps


@dataclass
class FeedbackState:
    """Controller memory.  ``history`` rows: ``(epoch_s, measured_ps, command_ps, saturated)``."""

    setpoint: float = 0.0
    current_command: float = 750.0
    history: list = field(default_factory=list)

    def record(self, epoch, measured, command, saturated):
        if self.history and epoch <= self.history[-1][0]:
            raise ValueError("feedback history epochs must increase")
        self.history.append((float(epoch), measured, float(command), bool(saturated)))


def fold_to_frame(dt, period=PULSE_PERIOD_PS):
    """Fold time differences into ``(-period/2, period/2]``."""
    dt = np.asarray(dt, dtype=float)
    return dt - period * np.ceil(dt / period - 0.5)


def estimate_delta(herald_tags, local_tags, window=None, *, reference_offset=0.0,
                   min_tags=100, period=PULSE_PERIOD_PS):
    """Median arrival-time difference between herald and local references.

    Each herald tag is paired with its nearest local tag; the difference is
    folded into one pulse frame so pairs from different clock cycles still
    agree.  ``window`` is an optional ``(start_ps, stop_ps)`` restriction.
    Returns ``None`` when fewer than ``min_tags`` pairs are available.
    """
    h = np.asarray(getattr(herald_tags, "times", herald_tags), dtype=np.int64)
    loc = np.asarray(getattr(local_tags, "times", local_tags), dtype=np.int64)
    if window is not None:
        lo, hi = window
        h = h[(h >= lo) & (h < hi)]
        loc = loc[(loc >= lo) & (loc < hi)]
    if h.size < min_tags or loc.size == 0:
        return None
    pos = np.clip(np.searchsorted(loc, h), 1, max(loc.size - 1, 1))
    left = loc[pos - 1]
    right = loc[np.minimum(pos, loc.size - 1)]
    nearest = np.where(np.abs(h - left) <= np.abs(right - h), left, right)
    d = fold_to_frame(h - nearest - reference_offset, period)
    return float(np.median(d))


def control_step(state, measured, line, gain=1.0):
    """Integral update of the delay-line command.

    A missing measurement (``None``) holds the last command.  Returns
    ``(new_command, saturated)``; the state is updated in place.
    """
    if measured is None:
        return state.current_command, False
    raw = state.current_command - gain * (measured - state.setpoint)
    clamped = min(max(raw, 0.0), line.range_ps)
    saturated = clamped != raw
    state.current_command = line.quantize(clamped)
    return state.current_command, saturated


def write_feedback_log(state, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch_s", "delta_ps", "command_ps", "saturated"])
        for epoch, delta, cmd, sat in state.history:
            w.writerow([f"{epoch:.3f}", "" if delta is None else f"{delta:.4f}",
                        f"{cmd:.4f}", int(sat)])
