import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tbteleport.channel import FiberSpec, TemperatureTrace, drift_offset_at, propagate
from tbteleport.photonics import PhotonRecord, Wavepacket
from tbteleport.validation import ConfigError


def photon():
    return PhotonRecord("idler", np.array([1, 0], dtype=complex), Wavepacket(0, 8.5), "user")


def test_zero_length_is_identity(rng):
    p = photon()
    assert propagate(p, FiberSpec(0.0), 0.0, rng) is p


def test_spool_transmittance(rng):
    fiber = FiberSpec(6.15)
    assert np.isclose(fiber.transmittance, 10 ** (-1.5375 / 10))
    alive = np.mean([propagate(photon(), fiber, 0.0, rng).alive for _ in range(10 ** 5)])
    assert abs(alive - 0.702) < 0.005


def test_propagation_delays_and_broadens(rng):
    fiber = FiberSpec(6.15, attenuation_db_km=0.0)
    out = propagate(photon(), fiber, 12.0, rng)
    assert np.isclose(out.wavepacket.t_center, fiber.nominal_delay_ps + 12.0)
    assert out.wavepacket.sigma > 8.5


def test_negative_length_rejected():
    with pytest.raises(ConfigError):
        FiberSpec(-1.0)


class TestDrift:
    def test_flat(self):
        tr = TemperatureTrace.flat(3600)
        assert np.all(drift_offset_at(tr, FiberSpec(6.15), np.linspace(0, 3600, 7)) == 0)

    def test_two_kelvin(self):
        tr = TemperatureTrace([0, 100], [20.0, 22.0])
        fiber = FiberSpec(6.15, thermal_delay_ps_km_k=32.5)
        assert np.isclose(drift_offset_at(tr, fiber, 100), 32.5 * 6.15 * 2)
        assert abs(drift_offset_at(tr, FiberSpec(6.15), 100) - 400) < 1e-9

    @given(st.floats(0.1, 3.0), st.floats(0.5, 20))
    def test_linear_in_temperature(self, amp, length):
        t = np.linspace(0, 86400, 1441)
        tr = TemperatureTrace(t, 22 + amp * np.sin(2 * np.pi * t / 86400))
        fiber = FiberSpec(length)
        off = drift_offset_at(tr, fiber, t)
        assert np.isclose(off.max(), fiber.thermal_delay_ps_km_k * length * amp, rtol=1e-3)

    def test_out_of_span(self):
        with pytest.raises(ValueError):
            TemperatureTrace.flat(10).temp_at(11)

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            TemperatureTrace([0, 2, 1], [1, 2, 3])

    def test_csv_round_trip(self, tmp_path, rng):
        tr = TemperatureTrace.diurnal(7200, rng)
        tr.to_csv(tmp_path / "t.csv")
        back = TemperatureTrace.from_csv(tmp_path / "t.csv")
        assert np.array_equal(back.epochs, tr.epochs) and np.array_equal(back.temps, tr.temps)

    def test_csv_header_checked(self, tmp_path):
        (tmp_path / "t.csv").write_text("time,temp\n0,1\n")
        with pytest.raises(ValueError):
            TemperatureTrace.from_csv(tmp_path / "t.csv")
