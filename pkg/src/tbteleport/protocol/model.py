"""Exact per-pulse outcome model for the three-node link.

For a fixed number ``m`` of user photons reaching the analyzer and ``N``
relay pairs, the optical state is expanded in creation operators and sent
through the analyzer (relay idler loss included) and the central interferometer.  User
photons carry an internal label split as ``sqrt(g)`` parallel and
``sqrt(1 - g)`` orthogonal to the relay idler mode, so every outcome
probability is a polynomial of degree ``m`` in the mode overlap
``g = |gamma|^2``.  Tables store those polynomial coefficients and are
evaluated for any delay mismatch without re-expanding.

Detector gates: ``0..7`` are analyzer gates ``(port, bin)`` and ``8..13``
the central gates ``(B1|B2, 0..2)``.  Loss outside the relay idler path is
folded into a per-gate detection efficiency.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb

from scipy.special import factorial

import numpy as np

from ..photonics import fock
from ..photonics.bsm import IDLER_AMPS, PORTS, USER_AMPS, classify_clicks
from ..photonics.sources import thermal_pmf, two_mode_thermal_pmf
from ..photonics.umzi import umzi_network
from ..photonics.wavepacket import Wavepacket, disperse, mode_overlap, transform_limited_sigma
from ..qstate import BellState, TimeBinQubit

BSM_GATES = tuple((p, b) for p in PORTS for b in (0, 1))
CENTRAL_GATES = tuple((p, k) for p in ("B1", "B2") for k in (0, 1, 2))
GATES = BSM_GATES + CENTRAL_GATES
N_GATES = len(GATES)
GATE_INDEX = {g: i for i, g in enumerate(GATES)}


@dataclass(frozen=True)
class FourfoldClass:
    bsm_gates: tuple
    central_gate: tuple
    outcome: BellState


@dataclass(frozen=True)
class OutcomeTable:
    """Gate occupations ``occ[k, gate]`` and polynomial coefficients ``coef[k, power]``."""

    occ: np.ndarray
    coef: np.ndarray

    def probabilities(self, g):
        powers = g ** np.arange(self.coef.shape[1])
        return np.clip(self.coef @ powers, 0.0, None)


class _Engine:
    """Creation-operator expansion with caching across settings."""

    def __init__(self, theta, idler_t, alpha_meas, central_vbs, trace_signal=False):
        self.reg = fock.ModeRegistry()
        self.theta = theta
        self.idler_t = idler_t
        self.trace_signal = trace_signal
        self.gate_of = {}
        self.perp = set()
        reg = self.reg
        self.net = {}
        for b in (0, 1):
            for x in (0, 1):
                self.net[reg(("u", b, x))] = [
                    (self._out(("C", p, b, x), (p, b)), USER_AMPS[k]) for k, p in enumerate(PORTS)]
            form = [(self._out(("C", p, b, 0), (p, b)), np.sqrt(idler_t) * IDLER_AMPS[k])
                    for k, p in enumerate(PORTS)]
            if idler_t < 1:
                form.append((reg(("E", "i", b)), np.sqrt(1.0 - idler_t)))
            self.net[reg(("i", b))] = form
        umzi = umzi_network(alpha_meas, central_vbs)
        for k in (0, 1):
            if trace_signal:
                self.net[reg(("s", k))] = [(reg(("E", "s", k)), 1.0)]
            else:
                self.net[reg(("s", k))] = [(self._out(("B",) + key, key), f)
                                           for key, f in umzi[k]]
        self._relay_cache = {}

    def _out(self, label, gate):
        idx = self.reg(label)
        self.gate_of[idx] = GATE_INDEX[gate]
        if label[0] == "C" and label[-1] == 1:
            self.perp.add(idx)
        return idx

    def relay_output(self, n_pairs):
        out = self._relay_cache.get(n_pairs)
        if out is None:
            reg = self.reg
            pair = {tuple(sorted((reg(("i", 0)), reg(("s", 0))))): 1.0 + 0j,
                    tuple(sorted((reg(("i", 1)), reg(("s", 1))))): np.exp(1j * self.theta)}
            poly = {(): 1.0 + 0j}
            for _ in range(n_pairs):
                poly = fock.multiply(poly, pair)
            out = fock.apply_network(fock.normalized(poly), self.net)
            self._relay_cache[n_pairs] = out
        return out

    def user_output(self, m, amps, g):
        reg = self.reg
        form = []
        for b in (0, 1):
            if amps[b] == 0:
                continue
            if g > 0:
                form.append((reg(("u", b, 0)), amps[b] * np.sqrt(g)))
            if g < 1:
                form.append((reg(("u", b, 1)), amps[b] * np.sqrt(1.0 - g)))
        poly = fock.normalized(fock.product([form] * m)) if m else {(): 1.0 + 0j}
        return fock.apply_network(poly, self.net)

    def table(self, m, n_pairs, amps):
        # One expansion at g = 1/2 suffices: an outcome with j orthogonal
        # photons scales as g^(m - j) (1 - g)^j.
        relay = self.relay_output(n_pairs)
        state = fock.multiply(self.user_output(m, amps, 0.5), relay)
        monos = list(state)
        n_modes = len(self.reg)
        width = max((len(x) for x in monos), default=0)
        idx = np.full((len(monos), width), n_modes, dtype=np.int64)
        for r, mono in enumerate(monos):
            idx[r, : len(mono)] = mono
        counts = np.zeros((len(monos), n_modes + 1), dtype=np.int64)
        np.add.at(counts, (np.arange(len(monos))[:, None], idx), 1)
        counts = counts[:, :n_modes]
        amp2 = np.abs(np.fromiter(state.values(), dtype=complex, count=len(monos))) ** 2
        prob = amp2 * np.prod(factorial(counts), axis=1)
        to_gate = np.zeros((n_modes, N_GATES), dtype=np.int64)
        perp = np.zeros(n_modes, dtype=np.int64)
        for mode, gate in self.gate_of.items():
            to_gate[mode, gate] = 1
        perp[list(self.perp)] = 1
        occ_all = counts @ to_gate
        j = counts @ perp
        basis = np.zeros((m + 1, m + 1))
        for jj in range(m + 1):
            for k in range(jj + 1):
                basis[jj, m - jj + k] = comb(jj, k) * (-1) ** k
        base = int(occ_all.max(initial=0)) + 1
        keys = occ_all @ (base ** np.arange(N_GATES, dtype=np.int64))
        _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
        occ = occ_all[first]
        coef = np.zeros((occ.shape[0], m + 1))
        np.add.at(coef, inv.ravel(), (prob * 2.0 ** m)[:, None] * basis[j])
        return OutcomeTable(occ, coef)


def fourfold_classes(resolve_same_port_bins=False):
    out = []
    for g1, g2 in combinations(BSM_GATES, 2):
        outcome = classify_clicks((g1, g2), resolve_same_port_bins)
        if outcome is None:
            continue
        for c in CENTRAL_GATES:
            out.append(FourfoldClass((g1, g2), c, outcome))
    return tuple(out)


def user_amplitudes(user):
    """Bin amplitudes of the encoded user photon from any accepted state description."""
    if isinstance(user, TimeBinQubit):
        return user.vector
    if isinstance(user, np.ndarray):
        return user.astype(complex) / np.linalg.norm(user)
    r, phase = user
    return np.array([np.sqrt(1.0 - r), np.sqrt(r) * np.exp(1j * phase)])


class LinkModel:
    """Pulse-level outcome probabilities for a :class:`NodeConfig`."""

    def __init__(self, cfg):
        self.cfg = cfg
        u, r, c = cfg.user, cfg.relay, cfg.central
        det = cfg.detectors
        fib = cfg.fibers
        gate = cfg.timing.gate_width_ps
        self.user_transmission = (u.idler_transmittance * fib.user_relay.transmittance
                                  * r.input_transmittance)
        self.herald_efficiency = u.herald_transmittance * det.herald.efficiency
        self.herald_dark = det.herald.dark_probability(gate)
        eta_c = r.bsm_output_transmittance * det.relay.efficiency
        eta_b = (r.signal_transmittance * fib.relay_central.transmittance
                 * c.input_transmittance * det.central.efficiency)
        self.gate_efficiency = np.array([eta_c] * 8 + [eta_b] * 6)
        self.gate_dark = np.array([det.relay.dark_probability(gate)] * 8
                                  + [det.central.dark_probability(gate)] * 6)
        self.classes = fourfold_classes(r.resolve_same_port_bins)
        self._engines = {}
        self._tables = {}

    # -- wavepackets -------------------------------------------------
    @cached_property
    def relay_wavepacket(self):
        sigma = transform_limited_sigma(self.cfg.relay.filter_bandwidth_nm)
        return Wavepacket(0.0, sigma, 0.0, "C40")

    @cached_property
    def user_source_wavepacket(self):
        u = self.cfg.user
        return Wavepacket(0.0, transform_limited_sigma(u.filter_bandwidth_nm),
                          u.input_chirp_per_ps2, "C40")

    @cached_property
    def user_wavepacket(self):
        """User idler at the analyzer with zero delay mismatch."""
        return disperse(self.user_source_wavepacket, self.cfg.fibers.user_relay.beta2_l)

    def overlap(self, delta_ps):
        """``|gamma|^2`` for a user/relay arrival mismatch ``delta_ps``."""
        gam = mode_overlap(self.user_wavepacket.shifted(float(delta_ps)), self.relay_wavepacket)
        return min(abs(gam) ** 2, 1.0)

    # -- configuration weights ---------------------------------------
    def _user_pmf(self):
        u = self.cfg.user
        return thermal_pmf(u.mu, u.max_pairs) if u.mu > 0 else np.eye(u.max_pairs + 1)[0]

    def _relay_pmf(self):
        r = self.cfg.relay
        return two_mode_thermal_pmf(r.mu, r.max_pairs) if r.mu > 0 else np.eye(r.max_pairs + 1)[0]

    def config_weights(self, heralded=True):
        """``{(m, N): weight}`` over surviving user photons and relay pairs."""
        pu, pr = self._user_pmf(), self._relay_pmf()
        t = self.user_transmission
        if self.cfg.simulation.post_select_single_pair:
            h = (1.0 - (1.0 - self.herald_efficiency) * (1.0 - self.herald_dark)) if heralded else 1.0
            return {(1, 1): pu[1] * h * pr[1]}
        out = {}
        for n_u, p_n in enumerate(pu):
            h = 1.0
            if heralded:
                h = 1.0 - (1.0 - self.herald_efficiency) ** n_u * (1.0 - self.herald_dark)
            for m in range(n_u + 1):
                w_m = p_n * h * comb(n_u, m) * t ** m * (1.0 - t) ** (n_u - m)
                for n_r, p_r in enumerate(pr):
                    if w_m * p_r > 0:
                        out[(m, n_r)] = out.get((m, n_r), 0.0) + w_m * p_r
        return out

    def herald_probability(self):
        pu = self._user_pmf()
        n = np.arange(pu.size)
        return float(np.sum(pu * (1.0 - (1.0 - self.herald_efficiency) ** n
                                  * (1.0 - self.herald_dark))))

    # -- outcome tables ----------------------------------------------
    def _engine(self, alpha_meas, trace_signal):
        key = (round(float(alpha_meas), 12), trace_signal)
        eng = self._engines.get(key)
        if eng is None:
            r, c = self.cfg.relay, self.cfg.central
            eng = _Engine(r.theta_rad, r.idler_transmittance, alpha_meas, c.vbs_ratio,
                          trace_signal)
            self._engines[key] = eng
        return eng

    def outcome_table(self, m, n_pairs, user_state, alpha_meas, trace_signal=False):
        amps = user_amplitudes(user_state)
        key = (m, n_pairs, tuple(np.round(amps, 12)), round(float(alpha_meas), 12), trace_signal)
        tab = self._tables.get(key)
        if tab is None:
            tab = self._engine(alpha_meas, trace_signal).table(m, n_pairs, amps)
            self._tables[key] = tab
        return tab

    def no_click(self, occ):
        """Per-gate no-click probability for occupations ``occ``."""
        return (1.0 - self.gate_efficiency) ** occ * (1.0 - self.gate_dark)

    # -- aggregated class probabilities ------------------------------
    def fourfold_coefficients(self, user_state, alpha_meas):
        """Per-pulse four-fold class probabilities as polynomials in ``g``.

        Returns ``(coef, threefold_coef)``: ``coef[class, power]`` and the
        matching coefficients of the BSM-heralded three-fold probability.
        """
        weights = self.config_weights(heralded=True)
        deg = max(m for m, _ in weights) if weights else 0
        cls_idx = [(GATE_INDEX[a], GATE_INDEX[b], GATE_INDEX[c])
                   for (a, b), c, _ in ((k.bsm_gates, k.central_gate, k.outcome)
                                        for k in self.classes)]
        pairs = sorted({(i, j) for i, j, _ in cls_idx})
        coef = np.zeros((len(self.classes), deg + 1))
        three = np.zeros(deg + 1)
        for (m, n_r), w in weights.items():
            tab = self.outcome_table(m, n_r, user_state, alpha_meas)
            q = self.no_click(tab.occ)
            click = 1.0 - q
            p_bsm = {ij: _exact(q, click, ij, range(8)) for ij in pairs}
            p_cen = {c: _exact(q, click, (c,), range(8, 14)) for c in range(8, 14)}
            for ci, (i, j, c) in enumerate(cls_idx):
                coef[ci, : tab.coef.shape[1]] += w * ((p_bsm[(i, j)] * p_cen[c]) @ tab.coef)
            for ij in pairs:
                three[: tab.coef.shape[1]] += w * (p_bsm[ij] @ tab.coef)
        return coef, three

    def hom_coefficients(self, user_state, heralded=False):
        """Per-pulse same-bin coincidences between merged port pairs.

        Returns ``coef[bin, power]`` for ``(C1 or C2) & (C3 or C4)`` in each
        bin, as polynomials in ``g``.
        """
        weights = self.config_weights(heralded=heralded)
        deg = max(m for m, _ in weights) if weights else 0
        coef = np.zeros((2, deg + 1))
        x = [[GATE_INDEX[(p, b)] for p in ("C1", "C2")] for b in (0, 1)]
        y = [[GATE_INDEX[(p, b)] for p in ("C3", "C4")] for b in (0, 1)]
        for (m, n_r), w in weights.items():
            tab = self.outcome_table(m, n_r, user_state, 0.0, trace_signal=True)
            q = self.no_click(tab.occ)
            for b in (0, 1):
                p = (1.0 - np.prod(q[:, x[b]], axis=1)) * (1.0 - np.prod(q[:, y[b]], axis=1))
                coef[b, : tab.coef.shape[1]] += w * (p @ tab.coef)
        return coef


def _exact(q, click, chosen, gates):
    chosen = set(chosen)
    p = np.ones(q.shape[0])
    for gi in gates:
        p = p * (click[:, gi] if gi in chosen else q[:, gi])
    return p


def evaluate(coef, g):
    """Evaluate coefficient rows at overlap ``g``."""
    return np.clip(coef @ (g ** np.arange(coef.shape[-1])), 0.0, None)
