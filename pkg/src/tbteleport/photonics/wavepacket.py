"""Gaussian single-photon wavepackets with quadratic temporal phase.

A wavepacket is ``psi(t) = N exp(-(t - t_c)^2 / (4 sigma^2) + i chirp (t - t_c)^2)``
so ``|psi|^2`` is a normal density with standard deviation ``sigma``.  All
times are in picoseconds.
"""

from dataclasses import dataclass, replace

import numpy as np

C_NM_PER_PS = 2.99792458e5
FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))
# Gaussian intensity time-bandwidth product (FWHM x FWHM).
TBP_GAUSSIAN = 2.0 * np.log(2.0) / np.pi

CHANNEL_WAVELENGTH_NM = {"C40": 1545.32, "C44": 1542.14, "C48": 1538.98}


@dataclass(frozen=True)
class Wavepacket:
    t_center: float
    sigma: float
    chirp: float = 0.0
    channel: str = "C40"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def a(self):
        """Complex Gaussian exponent: ``psi ~ exp(-a (t - t_c)^2)``."""
        return 1.0 / (4.0 * self.sigma ** 2) - 1j * self.chirp

    @classmethod
    def from_exponent(cls, a, t_center, channel):
        return cls(t_center=t_center, sigma=float(1.0 / (2.0 * np.sqrt(a.real))),
                   chirp=float(-a.imag), channel=channel)

    def shifted(self, dt):
        return replace(self, t_center=self.t_center + dt)

    def amplitude(self, t):
        """Field amplitude sampled at ``t`` (used by numerical oracles)."""
        a = self.a
        norm = (2.0 * a.real / np.pi) ** 0.25
        return norm * np.exp(-a * (np.asarray(t) - self.t_center) ** 2)

    @property
    def fwhm(self):
        return self.sigma * FWHM_PER_SIGMA


def transform_limited_sigma(bandwidth_nm, wavelength_nm=1545.32):
    """Intensity std (ps) of a transform-limited Gaussian behind a filter."""
    bw_thz = C_NM_PER_PS * bandwidth_nm / wavelength_nm ** 2
    return TBP_GAUSSIAN / bw_thz / FWHM_PER_SIGMA


def beta2_from_dispersion(d_ps_nm_km, wavelength_nm=1545.32):
    """GVD coefficient (ps^2/km) from the dispersion parameter D."""
    return -d_ps_nm_km * wavelength_nm ** 2 / (2.0 * np.pi * C_NM_PER_PS)


def disperse(w, beta2_l):
    """Propagate through accumulated GVD ``beta2 * L`` (ps^2).

    Closed-form chirped-Gaussian transform; the spectrum picks up the phase
    ``exp(i beta2 L omega^2 / 2)``.
    """
    if beta2_l == 0:
        return w
    a = w.a
    a_out = a / (1.0 - 2j * beta2_l * a)
    return Wavepacket.from_exponent(a_out, w.t_center, w.channel)


def mode_overlap(w1, w2):
    """Complex overlap ``<w1|w2>`` of two wavepackets.

    Photons in different frequency channels never overlap.
    """
    if w1.channel != w2.channel:
        return 0j
    a1c = np.conj(w1.a)
    a2 = w2.a
    big_a = a1c + a2
    n1 = (2.0 * w1.a.real / np.pi) ** 0.25
    n2 = (2.0 * a2.real / np.pi) ** 0.25
    dt = w1.t_center - w2.t_center
    return complex(n1 * n2 * np.sqrt(np.pi / big_a) * np.exp(-a1c * a2 * dt ** 2 / big_a))
