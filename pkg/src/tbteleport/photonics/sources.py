"""Photon-pair sources and per-pulse photon records."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..qstate import TimeBinQubit
from ..validation import check_scalar
from .wavepacket import Wavepacket

PULSE_PERIOD_PS = 10_000
BIN_SEPARATION_PS = 400


@dataclass(frozen=True)
class SourceSpec:
    """SFWM source: ``mu`` mean pairs per pulse per time-bin mode."""

    mu: float
    max_pairs: int = 2

    def __post_init__(self):
        check_scalar(self.mu, "mu", min_val=0.0, max_val=0.5, include_max=False)
        check_scalar(self.max_pairs, "max_pairs", min_val=2, kind=int)


def thermal_pmf(mu, max_pairs):
    """Single-mode thermal distribution truncated at ``max_pairs``."""
    n = np.arange(max_pairs + 1)
    p = mu ** n / (1.0 + mu) ** (n + 1)
    return p / p.sum()


def two_mode_thermal_pmf(mu, max_pairs):
    """Total pair number of two independent thermal modes, truncated.

    Both time-bin arms of the relay source share ``mu``, giving
    ``P(N) = (N + 1) mu^N / (1 + mu)^(N + 2)``.
    """
    n = np.arange(max_pairs + 1)
    p = (n + 1) * mu ** n / (1.0 + mu) ** (n + 2)
    return p / p.sum()


def sample_pair_count(spec, rng, size=None):
    if spec.mu == 0:
        return 0 if size is None else np.zeros(size, dtype=int)
    return rng.choice(spec.max_pairs + 1, size=size, p=thermal_pmf(spec.mu, spec.max_pairs))


@dataclass(frozen=True, eq=False)
class PhotonRecord:
    """One photon travelling through the link.

    ``bin_amplitudes`` is ``None`` for photons entangled with a partner; the
    joint amplitudes then live on the owning :class:`PulseEvent`.
    """

    role: str
    bin_amplitudes: np.ndarray | None
    wavepacket: Wavepacket
    origin: str
    alive: bool = True

    def __post_init__(self):
        if self.role not in ("signal", "idler"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.alive and self.bin_amplitudes is not None:
            amps = np.asarray(self.bin_amplitudes, dtype=complex)
            if abs(np.sum(np.abs(amps) ** 2) - 1.0) > 1e-9:
                raise ValueError("bin amplitudes of a live photon must be normalized")
            object.__setattr__(self, "bin_amplitudes", amps)

    @property
    def bin_times(self):
        return (self.wavepacket.t_center, self.wavepacket.t_center + BIN_SEPARATION_PS)


@dataclass(frozen=True)
class PulseEvent:
    """Everything one source emitted in one clock cycle.

    For the relay source ``pairs`` photon pairs share the joint state
    ``(A_early + e^{i theta} A_late)^pairs |vac>`` (normalized), where
    ``A_k`` creates a signal/idler pair in bin ``k``.
    """

    pulse_index: int
    photons: list = field(default_factory=list)
    pairs: int = 0
    theta: float = 0.0

    @property
    def time_ps(self):
        return self.pulse_index * PULSE_PERIOD_PS

    @property
    def joint_amplitudes(self):
        """Single-pair amplitudes over ``(|0_s 0_i>, |1_s 1_i>)``."""
        if self.pairs != 1:
            raise ValueError("joint amplitudes are defined for single-pair events")
        return np.array([1.0, np.exp(1j * self.theta)]) / np.sqrt(2.0)


def generate_bell_pair(theta, rng, spec, *, pulse_index=0, wavepacket=None, origin="relay"):
    """Emit the relay source output for one pulse.

    The total pair number is drawn from the two-arm thermal distribution;
    the arm split is left coherent so a single pair carries the Bell state
    ``(|0_s 0_i> + e^{i theta}|1_s 1_i>)/sqrt(2)``.
    """
    theta = float(np.mod(theta, 2.0 * np.pi))
    if spec.mu == 0:
        return PulseEvent(pulse_index, [], 0, theta)
    n = int(rng.choice(spec.max_pairs + 1, p=two_mode_thermal_pmf(spec.mu, spec.max_pairs)))
    if wavepacket is None:
        wavepacket = Wavepacket(0.0, 8.5, 0.0, "C40")
    sig_wp = replace(wavepacket, channel="C48")
    photons = []
    for _ in range(n):
        photons.append(PhotonRecord("signal", None, sig_wp, origin))
        photons.append(PhotonRecord("idler", None, wavepacket, origin))
    return PulseEvent(pulse_index, photons, n, theta)


def generate_heralded_pairs(spec, rng, *, pulse_index=0, wavepacket=None, origin="user"):
    """Single-mode pair emission at the user node (all in the early bin)."""
    n = int(sample_pair_count(spec, rng))
    if wavepacket is None:
        wavepacket = Wavepacket(0.0, 8.5, 0.0, "C40")
    photons = []
    for _ in range(n):
        photons.append(PhotonRecord("signal", np.array([1, 0]), replace(wavepacket, channel="C48"), origin))
        photons.append(PhotonRecord("idler", np.array([1, 0]), wavepacket, origin))
    return PulseEvent(pulse_index, photons, n, 0.0)


def vbs_settings(target):
    """VBS split ratio and phase that encode ``target``."""
    r = abs(target.a1) ** 2
    if abs(target.a0) < 1e-15 or abs(target.a1) < 1e-15:
        return float(r), 0.0
    phase = float(np.angle(target.a1) - np.angle(target.a0))
    return float(r), float(np.mod(phase, 2.0 * np.pi))


def encode_user_qubit(idler, target=None, vbs_ratio=None, phase=None):
    """Send an early-bin idler through the VBS-UMZI.

    Either pass ``target`` or explicit ``vbs_ratio`` and ``phase``.
    """
    if not idler.alive:
        raise ValueError("cannot encode a lost photon")
    if target is not None:
        vbs_ratio, phase = vbs_settings(target)
    if vbs_ratio is None or phase is None:
        raise TypeError("need target or both vbs_ratio and phase")
    check_scalar(vbs_ratio, "vbs_ratio", min_val=0.0, max_val=1.0)
    amps = np.array([np.sqrt(1.0 - vbs_ratio), np.sqrt(vbs_ratio) * np.exp(1j * phase)])
    return replace(idler, bin_amplitudes=amps)


def qubit_of(photon):
    return TimeBinQubit.from_vector(photon.bin_amplitudes)


def apply_loss(p, transmittance, rng):
    check_scalar(transmittance, "transmittance", min_val=0.0, max_val=1.0)
    if not p.alive:
        return p
    if transmittance >= 1.0:
        return p
    return replace(p, alive=bool(rng.random() < transmittance))
