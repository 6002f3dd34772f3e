"""Single-photon detector clicks and time-tag coincidence search.

Tag times are integer picoseconds since run start.  Streams are kept as a
pair of numpy arrays (channel ids, times) sorted by time, ties by channel.
"""

import csv
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .photonics.bsm import classify_clicks
from .validation import check_probability, check_scalar

CHANNELS = {
    "A1": 1, "C1": 2, "C2": 3, "C3": 4, "C4": 5, "C7": 6,
    "HERALD": 7, "B1": 8, "B2": 9, "SYNC": 10,
}
CHANNEL_NAMES = {v: k for k, v in CHANNELS.items()}
RELAY_PORTS = ("C1", "C2", "C3", "C4")
CENTRAL_PORTS = ("B1", "B2")

TAG_DTYPE = np.dtype([("channel", "<u2"), ("time_ps", "<i8")])


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float = 0.9
    dark_rate_hz: float = 100.0
    jitter_ps: float = 30.0
    dead_time_ns: float = 40.0

    def __post_init__(self):
        check_probability(self.efficiency, "efficiency")
        check_scalar(self.dark_rate_hz, "dark_rate_hz", min_val=0.0)
        check_scalar(self.jitter_ps, "jitter_ps", min_val=0.0)
        check_scalar(self.dead_time_ns, "dead_time_ns", min_val=0.0)

    @property
    def dead_time_ps(self):
        return int(round(self.dead_time_ns * 1e3))

    def dark_probability(self, gate_ps):
        """Chance of a dark count inside one gate of ``gate_ps``."""
        return float(-np.expm1(-self.dark_rate_hz * gate_ps * 1e-12))


class TimeTag(NamedTuple):
    channel: int
    time: int


class TagStream:
    """Immutable, time-sorted set of tags."""

    def __init__(self, channels=(), times=(), *, check=True):
        ch = np.asarray(channels, dtype=np.uint16)
        t = np.asarray(times, dtype=np.int64)
        if ch.shape != t.shape or ch.ndim != 1:
            raise ValueError("channels and times must be equal-length 1-D arrays")
        if check and t.size > 1:
            d = np.diff(t)
            if np.any(d < 0) or np.any((d == 0) & (np.diff(ch.astype(np.int64)) < 0)):
                raise ValueError("tag stream is not sorted by (time, channel)")
        self.channels = ch
        self.times = t

    @classmethod
    def from_unsorted(cls, channels, times):
        ch = np.asarray(channels, dtype=np.uint16)
        t = np.asarray(times, dtype=np.int64)
        order = np.lexsort((ch, t))
        return cls(ch[order], t[order], check=False)

    @classmethod
    def from_tags(cls, tags):
        tags = list(tags)
        return cls.from_unsorted([g.channel for g in tags], [g.time for g in tags])

    def __len__(self):
        return int(self.times.size)

    def __iter__(self):
        for c, t in zip(self.channels.tolist(), self.times.tolist()):
            yield TimeTag(c, t)

    def __eq__(self, other):
        return (isinstance(other, TagStream) and np.array_equal(self.channels, other.channels)
                and np.array_equal(self.times, other.times))

    def select(self, *channels):
        ids = [CHANNELS[c] if isinstance(c, str) else c for c in channels]
        mask = np.isin(self.channels, ids)
        return TagStream(self.channels[mask], self.times[mask], check=False)

    def shifted(self, dt_ps):
        return TagStream(self.channels, self.times + np.int64(dt_ps), check=False)


def merge_channels(a, b):
    """Time-ordered union of two sorted streams, ties ordered by channel id."""
    for s, name in ((a, "first"), (b, "second")):
        if s.times.size > 1 and np.any(np.diff(s.times) < 0):
            raise ValueError(f"{name} stream is not sorted")
    ch = np.concatenate([a.channels, b.channels])
    t = np.concatenate([a.times, b.times])
    order = np.lexsort((ch, t))
    return TagStream(ch[order], t[order], check=False)


def relabel(stream, channel):
    """Same tags reported on a single merged channel."""
    return TagStream(np.full(len(stream), channel, dtype=np.uint16), stream.times, check=False)


def enforce_dead_time(stream, dead_time_ps):
    """Drop tags that fall inside the dead time of an accepted tag on the same channel."""
    if dead_time_ps <= 0 or len(stream) == 0:
        return stream
    keep = np.ones(len(stream), dtype=bool)
    for ch in np.unique(stream.channels):
        idx = np.nonzero(stream.channels == ch)[0]
        t = stream.times[idx]
        last = None
        for k, ti in zip(idx.tolist(), t.tolist()):
            if last is not None and ti - last < dead_time_ps:
                keep[k] = False
            else:
                last = ti
    return TagStream(stream.channels[keep], stream.times[keep], check=False)


def dark_count_stream(spec, duration_ps, channel, rng, start_ps=0):
    """Homogeneous Poisson stream of dark counts on one channel."""
    n = rng.poisson(spec.dark_rate_hz * duration_ps * 1e-12)
    t = np.sort(rng.integers(start_ps, start_ps + int(duration_ps), size=n))
    return TagStream(np.full(n, channel, dtype=np.uint16), t, check=False)


def detect(photon, spec, rng, *, channel=0, arrival_ps=None, last_click_ps=None):
    """Single-photon click on one detector.

    Returns a :class:`TimeTag` or ``None``.  ``last_click_ps`` is the time of
    the previous click on the same channel, used for dead-time blocking.
    """
    if not photon.alive:
        return None
    if rng.random() >= spec.efficiency:
        return None
    t = photon.wavepacket.t_center if arrival_ps is None else arrival_ps
    if spec.jitter_ps > 0:
        t = t + rng.normal(0.0, spec.jitter_ps)
    t = int(round(t))
    if last_click_ps is not None and t - last_click_ps < spec.dead_time_ps:
        return None
    return TimeTag(channel, t)


class Detector:
    """Stateful SNSPD channel that remembers its last click for dead time."""

    def __init__(self, spec, channel):
        self.spec = spec
        self.channel = channel
        self.last_click_ps = None

    def detect(self, photon, rng, arrival_ps=None):
        tag = detect(photon, self.spec, rng, channel=self.channel, arrival_ps=arrival_ps,
                     last_click_ps=self.last_click_ps)
        if tag is not None:
            self.last_click_ps = tag.time
        return tag


def classify_bin(tag_time, frame_reference, bin_separation=400, gate_width=200, n_bins=3,
                 stats=None):
    """Time-bin index of a tag relative to its frame, or ``None`` if outside every gate."""
    offset = tag_time - frame_reference
    k = offset / bin_separation
    nearest = int(np.floor(k + 0.5))
    dist = abs(offset - nearest * bin_separation)
    if 2 * dist == bin_separation:
        if stats is not None:
            stats["ambiguous"] += 1
        return None
    if nearest < 0 or nearest >= n_bins or 2 * dist > gate_width:
        if stats is not None:
            stats["rejected"] += 1
        return None
    return nearest


@dataclass(frozen=True)
class CoincidenceEvent:
    tags: tuple
    kind: str
    bin_labels: tuple = ()

    def channels(self):
        return [t.channel for t in self.tags]

    def relay_tags(self):
        return [(t, b) for t, b in zip(self.tags, self.bin_labels or (None,) * len(self.tags))
                if CHANNEL_NAMES.get(t.channel) in RELAY_PORTS]


_KINDS = {2: "twofold", 3: "threefold", 4: "fourfold"}


def _normalize_pattern(pattern):
    """Pattern -> list of ``(frozenset(channel ids), count)`` requirements."""
    def ids(c):
        return CHANNELS[c] if isinstance(c, str) else int(c)

    if isinstance(pattern, dict):
        reqs = []
        for group, count in pattern.items():
            group = (group,) if isinstance(group, (str, int)) else group
            reqs.append((frozenset(ids(c) for c in group), int(count)))
        return reqs
    return [(frozenset([ids(c)]), 1) for c in pattern]


def find_coincidences(streams, window, required_pattern, delays=None):
    """Greedy earliest-first n-fold coincidence search.

    ``required_pattern`` is either a set of channels (each exactly once) or a
    mapping ``{channel-group: count}``.  ``delays`` maps channel to a static
    offset subtracted before matching.  Every tag joins at most one event;
    surplus in-window tags from pattern channels are attached to the event
    so downstream classification can flag it as ambiguous.
    """
    reqs = _normalize_pattern(required_pattern)
    wanted = frozenset().union(*(g for g, _ in reqs))
    ch = np.concatenate([s.channels for s in streams]) if streams else np.zeros(0, np.uint16)
    t = np.concatenate([s.times for s in streams]) if streams else np.zeros(0, np.int64)
    mask = np.isin(ch, list(wanted))
    ch, t = ch[mask], t[mask]
    adj = t.copy()
    if delays:
        for c, d in delays.items():
            cid = CHANNELS[c] if isinstance(c, str) else c
            adj[ch == cid] -= np.int64(d)
    order = np.lexsort((ch, adj))
    ch, t, adj = ch[order], t[order], adj[order]
    ends = np.searchsorted(adj, adj + np.int64(window), side="right")
    need = sum(n for _, n in reqs)
    used = np.zeros(adj.size, dtype=bool)
    events = []
    for i in np.nonzero(ends - np.arange(adj.size) >= need)[0].tolist():
        if used[i]:
            continue
        cand = [j for j in range(i, int(ends[i])) if not used[j]]
        if len(cand) < need:
            continue
        counts = Counter()
        for j in cand:
            for k, (group, _) in enumerate(reqs):
                if ch[j] in group:
                    counts[k] += 1
        if any(counts[k] < n for k, (_, n) in enumerate(reqs)):
            continue
        used[cand] = True
        tags = tuple(TimeTag(int(ch[j]), int(t[j])) for j in cand)
        events.append(CoincidenceEvent(tags, _KINDS.get(need, f"{need}fold")))
    return events


def classify_bsm(event, resolve_same_port_bins=False):
    """Bell-state outcome announced by the relay tags of a coincidence."""
    relay = event.relay_tags()
    if len(relay) != 2:
        return None
    clicks = tuple(sorted((CHANNEL_NAMES[t.channel], b) for t, b in relay))
    if any(b is None for _, b in clicks):
        return None
    if clicks[0] == clicks[1]:
        return None
    return classify_clicks(clicks, resolve_same_port_bins)


def write_tags_csv(stream, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "time_ps"])
        w.writerows(zip(stream.channels.tolist(), stream.times.tolist()))


def read_tags_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["channel", "time_ps"]:
            raise ValueError(f"{path}: expected header 'channel,time_ps'")
        rows = [(int(c), int(t)) for c, t in reader]
    if not rows:
        return TagStream()
    ch, t = zip(*rows)
    return TagStream(ch, t)


def write_tags_bin(stream, path):
    """Fixed 10-byte little-endian records: u16 channel, i64 time_ps."""
    rec = np.empty(len(stream), dtype=TAG_DTYPE)
    rec["channel"] = stream.channels
    rec["time_ps"] = stream.times
    with open(path, "wb") as fh:
        fh.write(rec.tobytes())


def read_tags_bin(path):
    rec = np.fromfile(path, dtype=TAG_DTYPE)
    return TagStream(rec["channel"].astype(np.uint16), rec["time_ps"].astype(np.int64))
