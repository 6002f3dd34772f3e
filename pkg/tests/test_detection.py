import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tbteleport.detection import (CHANNELS, CoincidenceEvent, Detector, DetectorSpec, TagStream,
                                  TimeTag, classify_bin, classify_bsm, dark_count_stream,
                                  detect, enforce_dead_time, find_coincidences, merge_channels,
                                  read_tags_bin, read_tags_csv, write_tags_bin, write_tags_csv)
from tbteleport.photonics import PhotonRecord, Wavepacket
from tbteleport.qstate import BellState

C = CHANNELS


def photon(t=1234.0):
    return PhotonRecord("idler", np.array([1, 0]), Wavepacket(t, 8.5), "user")


def stream(ch, times):
    return TagStream.from_unsorted(np.full(len(times), C[ch] if isinstance(ch, str) else ch),
                                   times)


class TestDetect:
    def test_ideal_exact_time(self, rng):
        spec = DetectorSpec(1.0, 0.0, 0.0, 0.0)
        assert detect(photon(), spec, rng, channel=3) == TimeTag(3, 1234)

    def test_efficiency(self, rng):
        spec = DetectorSpec(0.9, 0.0, 0.0, 0.0)
        frac = np.mean([detect(photon(), spec, rng) is not None for _ in range(10 ** 5)])
        assert abs(frac - 0.9) < 0.01

    def test_dead_time(self, rng):
        d = Detector(DetectorSpec(1.0, 0.0, 0.0, 40.0), 1)
        assert d.detect(photon(0.0), rng) is not None
        assert d.detect(photon(39_000.0), rng) is None
        assert d.detect(photon(41_000.0), rng) is not None

    def test_dark_counts(self, rng):
        s = dark_count_stream(DetectorSpec(dark_rate_hz=100.0), 1000 * 10 ** 12, 5, rng)
        assert abs(len(s) - 10 ** 5) < 3 * np.sqrt(10 ** 5)

    def test_enforce_dead_time(self):
        s = TagStream([1, 1, 2, 1], [0, 10, 15, 100])
        out = enforce_dead_time(s, 50)
        assert list(out.times) == [0, 15, 100]


class TestStreams:
    def test_merge_empty(self):
        s = stream("A1", [5, 9])
        assert merge_channels(TagStream(), s) == s

    def test_merge_sorted(self):
        m = merge_channels(stream("A1", [1, 5, 9]), stream("C1", [2, 6]))
        assert list(m.times) == [1, 2, 5, 6, 9]

    def test_ties_by_channel(self):
        m = merge_channels(stream(7, [10]), stream(3, [10]))
        assert list(m.channels) == [3, 7]

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            TagStream([1, 1], [5, 3])

    @given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 10 ** 6)), max_size=40),
           st.lists(st.tuples(st.integers(0, 15), st.integers(0, 10 ** 6)), max_size=40))
    def test_merge_is_sorted_union(self, a, b):
        sa, sb = TagStream.from_tags([TimeTag(*x) for x in a]), TagStream.from_tags(
            [TimeTag(*x) for x in b])
        m = merge_channels(sa, sb)
        assert sorted(zip(m.times.tolist(), m.channels.tolist())) == list(
            zip(m.times.tolist(), m.channels.tolist()))
        assert sorted(map(tuple, a + b)) == sorted(zip(m.channels.tolist(), m.times.tolist()))

    def test_binary_round_trip(self, tmp_path):
        s = TagStream([1, 4, 2], [-5, 10, 2 ** 40])
        write_tags_bin(s, tmp_path / "t.bin")
        assert (tmp_path / "t.bin").stat().st_size == 30
        assert read_tags_bin(tmp_path / "t.bin") == s

    def test_csv_round_trip(self, tmp_path):
        s = TagStream([1, 4], [3, 10])
        write_tags_csv(s, tmp_path / "t.csv")
        assert read_tags_csv(tmp_path / "t.csv") == s


class TestClassifyBin:
    def test_bins(self):
        assert classify_bin(1000, 1000) == 0
        assert classify_bin(1400, 1000) == 1
        assert classify_bin(1800, 1000) == 2

    def test_outside_gate(self):
        assert classify_bin(1205, 1000) is None

    def test_midpoint_ambiguous(self):
        from collections import Counter
        stats = Counter()
        assert classify_bin(1200, 1000, gate_width=400, stats=stats) is None
        assert stats["ambiguous"] == 1

    @given(st.integers(-10 ** 6, 10 ** 6), st.integers(0, 2), st.integers(-99, 99))
    def test_inside_gate(self, ref, b, off):
        assert classify_bin(ref + 400 * b + off, ref) == b


class TestCoincidences:
    def test_single_stream(self):
        assert find_coincidences([stream("A1", [0, 100])], 100, {"A1", "C1"}) == []

    def test_offset_pair(self):
        ev = find_coincidences([stream("A1", [1000]), stream("C1", [1050])], 100, {"A1", "C1"})
        assert len(ev) == 1 and ev[0].kind == "twofold"

    def test_static_delay(self):
        ev = find_coincidences([stream("A1", [1000]), stream("C1", [3050])], 100, {"A1", "C1"},
                               delays={"C1": 2000})
        assert len(ev) == 1

    def test_accidentals(self, rng):
        # r1 r2 2w T with two independent 1 MHz streams, 1 ns window, 1 s.
        T = 10 ** 12
        a = np.sort(rng.integers(0, T, rng.poisson(10 ** 6)))
        b = np.sort(rng.integers(0, T, rng.poisson(10 ** 6)))
        ev = find_coincidences([stream("A1", a), stream("C1", b)], 1000, {"A1", "C1"})
        assert abs(len(ev) - 2000) < 4 * np.sqrt(2000)


class TestClassifyBsm:
    def ev(self, *clicks):
        tags = tuple(TimeTag(C[p], 0) for p, _ in clicks)
        return CoincidenceEvent(tags, "twofold", tuple(b for _, b in clicks))

    def test_rules(self):
        assert classify_bsm(self.ev(("C1", 0), ("C3", 1))) is BellState.PSI_MINUS
        assert classify_bsm(self.ev(("C1", 0), ("C2", 1))) is BellState.PSI_PLUS
        assert classify_bsm(self.ev(("C1", 0), ("C3", 0))) is None

    def test_same_port(self):
        e = self.ev(("C2", 0), ("C2", 1))
        assert classify_bsm(e) is None
        assert classify_bsm(e, resolve_same_port_bins=True) is BellState.PSI_PLUS

    def test_wrong_multiplicity(self):
        assert classify_bsm(self.ev(("C1", 0))) is None
