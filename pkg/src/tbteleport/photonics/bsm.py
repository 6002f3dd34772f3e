"""Cascaded-beam-splitter Bell analyzer for time-bin photon pairs.

The user photon enters the first 50:50 splitter from one side and the local
idler from the other.  Each splitter output feeds a second 50:50 splitter,
giving ports C1, C2 (first output) and C3, C4 (second output).  Detectors
resolve the early (0) and late (1) bins.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement, product

import numpy as np

from ..qstate import BellState

PORTS = ("C1", "C2", "C3", "C4")
GROUP = {"C1": 0, "C2": 0, "C3": 1, "C4": 1}

# Input-port -> output-port amplitudes through the two splitter stages.
USER_AMPS = np.array([1, 1, 1, 1], dtype=complex) / 2
IDLER_AMPS = np.array([1, 1, -1, -1], dtype=complex) / 2

MODES = tuple(product(PORTS, (0, 1)))


@dataclass(frozen=True)
class BsmSignature:
    """Two-photon click pattern at the analyzer and its announced outcome.

    ``clicks`` holds the ``(port, bin)`` of each photon, sorted; both
    entries are equal when the photons bunched into one detector gate.
    """

    clicks: tuple
    outcome: BellState | None

    @property
    def ports(self):
        return frozenset(p for p, _ in self.clicks)

    @property
    def bins(self):
        return tuple(b for _, b in self.clicks)


def classify_clicks(clicks, resolve_same_port_bins=False):
    """Announced outcome for a two-click pattern ``((port, bin), (port, bin))``."""
    (p1, b1), (p2, b2) = clicks
    if b1 == b2:
        return None
    if GROUP[p1] != GROUP[p2]:
        return BellState.PSI_MINUS
    if p1 != p2:
        return BellState.PSI_PLUS
    return BellState.PSI_PLUS if resolve_same_port_bins else None


def as_two_photon_amplitudes(state):
    """Normalize input to a 2x2 array ``c[user_bin, idler_bin]``."""
    if isinstance(state, BellState):
        state = state.vector()
    c = np.asarray(state, dtype=complex).reshape(2, 2)
    n = np.sqrt(np.sum(np.abs(c) ** 2))
    if n == 0:
        raise ValueError("empty two-photon state")
    return c / n


def bell_analyzer_probabilities(state, gamma, resolve_same_port_bins=False):
    """Click-pattern distribution for one user photon and one idler.

    Partial distinguishability enters as the weight ``|gamma|^2`` of the
    fully interfering part; the remainder is routed as distinguishable
    particles.  Returns ``{BsmSignature: probability}`` covering every
    pattern, so the values sum to one.
    """
    c = as_two_photon_amplitudes(state)
    g = float(abs(gamma)) ** 2
    if g > 1 + 1e-12:
        raise ValueError(f"|gamma| must be <= 1, got {abs(gamma)}")
    g = min(g, 1.0)
    idx = {m: k for k, m in enumerate(MODES)}
    n = len(MODES)
    # amp[m_user, m_idler]: user photon lands in mode m_user, idler in m_idler.
    amp = np.zeros((n, n), dtype=complex)
    for (pu, bu), (pi, bi) in product(MODES, MODES):
        amp[idx[(pu, bu)], idx[(pi, bi)]] = (
            USER_AMPS[PORTS.index(pu)] * IDLER_AMPS[PORTS.index(pi)] * c[bu, bi])

    out = {}
    for m1, m2 in combinations_with_replacement(MODES, 2):
        i, j = idx[m1], idx[m2]
        if i == j:
            p_ind = 2.0 * abs(amp[i, i]) ** 2
            p_dis = abs(amp[i, i]) ** 2
        else:
            p_ind = abs(amp[i, j] + amp[j, i]) ** 2
            p_dis = abs(amp[i, j]) ** 2 + abs(amp[j, i]) ** 2
        p = g * p_ind + (1.0 - g) * p_dis
        clicks = (m1, m2)
        out[BsmSignature(clicks, classify_clicks(clicks, resolve_same_port_bins))] = float(p)
    return out


def outcome_probabilities(table):
    """Collapse a signature table to ``{PSI_PLUS, PSI_MINUS, None}``."""
    agg = {BellState.PSI_PLUS: 0.0, BellState.PSI_MINUS: 0.0, None: 0.0}
    for sig, p in table.items():
        agg[sig.outcome] += p
    return agg
