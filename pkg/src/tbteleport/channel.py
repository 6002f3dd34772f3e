"""Fiber propagation and temperature-driven delay drift."""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .photonics.wavepacket import beta2_from_dispersion, disperse
from .validation import check_scalar

# Default thermal coefficient reproduces a 400 ps swing per 2 K on 6.15 km.
DEFAULT_THERMAL_COEFF_PS_KM_K = 400.0 / (2.0 * 6.15)
GROUP_INDEX = 1.4682
PS_PER_KM = GROUP_INDEX * 1e3 / 2.99792458e8 * 1e12


@dataclass(frozen=True)
class FiberSpec:
    length_km: float = 0.0
    attenuation_db_km: float = 0.25
    dispersion_ps_nm_km: float = 4.0
    thermal_delay_ps_km_k: float = DEFAULT_THERMAL_COEFF_PS_KM_K
    filter_bandwidth_nm: float = 0.18
    wavelength_nm: float = 1545.32

    def __post_init__(self):
        check_scalar(self.length_km, "length_km", min_val=0.0)
        check_scalar(self.attenuation_db_km, "attenuation_db_km", min_val=0.0)
        check_scalar(self.filter_bandwidth_nm, "filter_bandwidth_nm", min_val=0.0,
                     include_min=False)

    @property
    def transmittance(self):
        return 10.0 ** (-self.attenuation_db_km * self.length_km / 10.0)

    @property
    def beta2_l(self):
        """Accumulated GVD in ps^2."""
        return beta2_from_dispersion(self.dispersion_ps_nm_km, self.wavelength_nm) * self.length_km

    @property
    def nominal_delay_ps(self):
        return self.length_km * PS_PER_KM


def propagate(photon, fiber, drift_offset, rng):
    """Carry a photon through ``fiber``; loss is sampled, timing is shifted."""
    if not photon.alive:
        return photon
    if fiber.length_km == 0 and drift_offset == 0:
        return photon
    alive = bool(rng.random() < fiber.transmittance) if fiber.transmittance < 1 else True
    wp = disperse(photon.wavepacket, fiber.beta2_l)
    wp = wp.shifted(fiber.nominal_delay_ps + drift_offset)
    return replace(photon, wavepacket=wp, alive=alive)


class TemperatureTrace:
    """Ambient temperature samples ``(epoch_s, temp_c)``, linearly interpolated."""

    def __init__(self, epochs, temps):
        epochs = np.asarray(epochs, dtype=float)
        temps = np.asarray(temps, dtype=float)
        if epochs.ndim != 1 or epochs.shape != temps.shape or epochs.size < 1:
            raise ValueError("epochs and temps must be equal-length 1-D series")
        if np.any(np.diff(epochs) <= 0):
            raise ValueError("trace epochs must be strictly increasing")
        self.epochs = epochs
        self.temps = temps

    @classmethod
    def flat(cls, duration_s, temp_c=22.0):
        return cls([0.0, max(float(duration_s), 1.0)], [temp_c, temp_c])

    @classmethod
    def diurnal(cls, duration_s, rng, *, amplitude_c=1.0, period_s=86400.0,
                walk_c_per_sqrt_h=0.05, step_s=60.0, base_c=22.0, phase=0.0):
        """Sinusoid plus a slow random walk, sampled every ``step_s``."""
        n = int(np.ceil(duration_s / step_s)) + 1
        t = np.arange(n) * step_s
        walk = np.cumsum(rng.normal(0.0, walk_c_per_sqrt_h * np.sqrt(step_s / 3600.0), n))
        walk -= walk[0]
        temps = base_c + amplitude_c * np.sin(2 * np.pi * t / period_s + phase) + walk
        return cls(t, temps)

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["epoch_s", "temp_c"]:
                raise ValueError(f"{path}: expected header 'epoch_s,temp_c'")
            rows = [(float(r["epoch_s"]), float(r["temp_c"])) for r in reader]
        e, t = zip(*rows) if rows else ((), ())
        return cls(e, t)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch_s", "temp_c"])
            for e, t in zip(self.epochs, self.temps):
                w.writerow([repr(float(e)), repr(float(t))])

    @property
    def span(self):
        return float(self.epochs[0]), float(self.epochs[-1])

    def temp_at(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.span
        if np.any(t < lo) or np.any(t > hi):
            raise ValueError(f"time outside trace span [{lo}, {hi}] s")
        return np.interp(t, self.epochs, self.temps)


def drift_offset_at(trace, fiber, t):
    """Group-delay change (ps) since the start of the trace."""
    dtemp = trace.temp_at(t) - trace.temps[0]
    return fiber.thermal_delay_ps_km_k * fiber.length_km * dtemp
