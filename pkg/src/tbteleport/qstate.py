"""Single-qubit algebra for time-bin states.

Time-bin basis: ``|0>`` is the early bin, ``|1>`` the late bin.  The four
Stokes operators are the Pauli matrices ``SIGMA[0..3]``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .validation import NoDataError, NotPhysicalError, check_density_matrix

SIGMA = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

_EIG_FLOOR = 1e-10


class BellState(Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"

    def vector(self):
        """Two-photon amplitudes over ``|00>, |01>, |10>, |11>``."""
        s = 1 / np.sqrt(2)
        return {
            BellState.PHI_PLUS: np.array([s, 0, 0, s]),
            BellState.PHI_MINUS: np.array([s, 0, 0, -s]),
            BellState.PSI_PLUS: np.array([0, s, s, 0]),
            BellState.PSI_MINUS: np.array([0, s, -s, 0]),
        }[self].astype(complex)


@dataclass(frozen=True)
class TimeBinQubit:
    a0: complex
    a1: complex

    def __post_init__(self):
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"qubit amplitudes not normalized (|a|^2 = {norm!r})")

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector is not a state")
        v = v / n
        return cls(complex(v[0]), complex(v[1]))

    @property
    def vector(self):
        return np.array([self.a0, self.a1], dtype=complex)

    def density(self):
        v = self.vector
        return DensityMatrix(np.outer(v, v.conj()))

    def overlap(self, other):
        """``|<self|other>|^2``; insensitive to global phase."""
        return float(abs(np.vdot(self.vector, other.vector)) ** 2)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", check_density_matrix(self.m))

    @classmethod
    def from_stokes(cls, s):
        return cls(0.5 * np.einsum("i,ijk->jk", np.asarray(s, dtype=float), SIGMA))

    def stokes(self):
        return np.array([np.trace(self.m @ SIGMA[i]).real for i in range(4)])

    def purity(self):
        return float(np.trace(self.m @ self.m).real)


@dataclass(frozen=True)
class StokesVector:
    s0: float
    s1: float
    s2: float
    s3: float

    def as_array(self):
        return np.array([self.s0, self.s1, self.s2, self.s3])

    @property
    def length(self):
        return float(np.sqrt(self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2))


@dataclass(frozen=True)
class ProjectionCounts:
    """Counts in the six tomography bases.

    Counts may be non-integral when bases measured over different exposure
    times are rescaled onto a common normalization.
    """

    n0: float
    n1: float
    n_plus: float
    n_minus: float
    n_plus_i: float
    n_minus_i: float

    def __post_init__(self):
        for name, value in vars(self).items():
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")

    @classmethod
    def from_probabilities(cls, rho, n_total):
        """Counts ``round(N * P_b)`` for each basis projector of ``rho``."""
        m = rho.m if isinstance(rho, DensityMatrix) else np.asarray(rho)
        probs = [np.vdot(v, m @ v).real for v in _BASIS_VECTORS]
        return cls(*(int(round(n_total * p)) for p in probs))


_BASIS_VECTORS = [
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / np.sqrt(2),
    np.array([1, -1], dtype=complex) / np.sqrt(2),
    np.array([1, 1j], dtype=complex) / np.sqrt(2),
    np.array([1, -1j], dtype=complex) / np.sqrt(2),
]

KET_0 = TimeBinQubit(1, 0)
KET_1 = TimeBinQubit(0, 1)
KET_PLUS = TimeBinQubit.from_vector(_BASIS_VECTORS[2])
KET_MINUS = TimeBinQubit.from_vector(_BASIS_VECTORS[3])
KET_PLUS_I = TimeBinQubit.from_vector(_BASIS_VECTORS[4])
KET_MINUS_I = TimeBinQubit.from_vector(_BASIS_VECTORS[5])

SIX_STATES = {
    "0": KET_0,
    "1": KET_1,
    "+": KET_PLUS,
    "-": KET_MINUS,
    "+i": KET_PLUS_I,
    "-i": KET_MINUS_I,
}


def make_qubit(theta_bloch, phi):
    """Point on the Bloch sphere: ``cos(t/2)|0> + e^{i phi} sin(t/2)|1>``."""
    return TimeBinQubit(complex(np.cos(theta_bloch / 2)),
                        complex(np.exp(1j * phi) * np.sin(theta_bloch / 2)))


def apply_pauli(state, p):
    if p not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {p!r}")
    return TimeBinQubit.from_vector(SIGMA[p] @ state.vector)


def expected_teleported_state(state, outcome):
    """State the central node should hold after a heralded BSM outcome.

    Only the two outcomes a linear-optics analyzer can announce are defined.
    """
    if outcome is BellState.PSI_PLUS:
        return apply_pauli(state, 1)
    if outcome is BellState.PSI_MINUS:
        return apply_pauli(state, 2)
    raise ValueError(f"outcome {outcome} cannot be heralded by the analyzer")


def project_physical(m):
    """Closest physical state by clamping negative eigenvalues."""
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise NotPhysicalError("no positive eigenvalue left after clamping")
    w = w / w.sum()
    return (v * w) @ v.conj().T


def reconstruct_density(counts):
    """Linear-inversion tomography from six projection counts.

    Returns ``(rho, stokes, rho_raw)``.  ``rho_raw`` is ``1/2 sum S_i sigma_i``
    as measured and may be unphysical; ``rho`` is its clamped projection.
    """
    norm = counts.n0 + counts.n1
    if norm <= 0:
        raise NoDataError("n0 + n1 = 0: no computational-basis counts")
    s = StokesVector(
        1.0,
        (counts.n_plus - counts.n_minus) / norm,
        (counts.n_plus_i - counts.n_minus_i) / norm,
        (counts.n0 - counts.n1) / norm,
    )
    raw = 0.5 * np.einsum("i,ijk->jk", s.as_array(), SIGMA)
    return DensityMatrix(project_physical(raw)), s, raw


def _psd_sqrt(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho_aim, rho):
    """Uhlmann fidelity ``[Tr sqrt(sqrt(a) r sqrt(a))]^2``."""
    a = _as_matrix(rho_aim)
    r = _as_matrix(rho)
    sa = _psd_sqrt(a)
    inner = sa @ r @ sa
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho_a, rho_b):
    d = _as_matrix(rho_a) - _as_matrix(rho_b)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(d)).sum())


def _as_matrix(rho):
    if isinstance(rho, DensityMatrix):
        return rho.m
    if isinstance(rho, TimeBinQubit):
        return rho.density().m
    return check_density_matrix(rho)
