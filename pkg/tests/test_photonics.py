from collections import defaultdict
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from tbteleport.photonics import (PhotonRecord, SourceSpec, Wavepacket, apply_loss,
                                  bell_analyzer_probabilities, beta2_from_dispersion,
                                  disperse, encode_user_qubit, generate_bell_pair,
                                  generate_heralded_pairs, mode_overlap, outcome_probabilities,
                                  projective_umzi, sample_pair_count, thermal_pmf,
                                  transform_limited_sigma, two_mode_thermal_pmf, vbs_settings)
from tbteleport.photonics import fock
from tbteleport.qstate import KET_0, KET_PLUS, KET_PLUS_I, BellState, make_qubit
from tbteleport.validation import ConfigError

PORTS = ("C1", "C2", "C3", "C4")


def photon(amps, wp=None):
    return PhotonRecord("idler", np.asarray(amps, dtype=complex), wp or Wavepacket(0, 8.5), "user")


# ---------------------------------------------------------------- wavepackets

def quad_overlap(w1, w2):
    t = np.linspace(-400, 400, 200001)
    return trapezoid(np.conj(w1.amplitude(t)) * w2.amplitude(t), t)


class TestModeOverlap:
    def test_identical(self):
        w = Wavepacket(3.0, 8.5, 0.002)
        assert np.isclose(abs(mode_overlap(w, w)), 1)

    def test_shift_two_sigma(self):
        w1, w2 = Wavepacket(0, 8.5), Wavepacket(17.0, 8.5)
        g = mode_overlap(w1, w2)
        assert np.isclose(abs(g), np.exp(-0.5), atol=1e-12)
        assert np.isclose(g, quad_overlap(w1, w2), atol=1e-8)

    def test_dispersed_against_quadrature(self):
        b2l = beta2_from_dispersion(4.0) * 6.15
        w1 = Wavepacket(0, 8.5)
        w2 = disperse(w1, b2l)
        g = mode_overlap(w1, w2)
        assert abs(g) < 1
        assert np.isclose(g, quad_overlap(w1, w2), atol=1e-8)

    def test_other_channel(self):
        assert mode_overlap(Wavepacket(0, 8.5), Wavepacket(0, 8.5, channel="C48")) == 0

    @given(st.floats(-50, 50), st.floats(3, 30), st.floats(3, 30),
           st.floats(-0.01, 0.01), st.floats(-0.01, 0.01))
    def test_bounded_by_one(self, dt, s1, s2, c1, c2):
        g = mode_overlap(Wavepacket(0, s1, c1), Wavepacket(dt, s2, c2))
        assert abs(g) <= 1 + 1e-12

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            Wavepacket(0, 0)


class TestDispersion:
    def test_width_matches_fourier_propagation(self):
        # Oracle: apply the spectral phase on an FFT grid and measure the
        # intensity width numerically.
        b2l = beta2_from_dispersion(4.0) * 6.15
        w = Wavepacket(0, 8.5)
        t = np.linspace(-1000, 1000, 2 ** 16)
        dt = t[1] - t[0]
        spec = np.fft.fft(w.amplitude(t))
        om = 2 * np.pi * np.fft.fftfreq(t.size, dt)
        out = np.fft.ifft(spec * np.exp(-0.5j * b2l * om ** 2))
        inten = np.abs(out) ** 2
        inten /= inten.sum()
        sigma_num = np.sqrt(np.sum(inten * t ** 2) - np.sum(inten * t) ** 2)
        sigma_closed = disperse(w, b2l).sigma
        assert sigma_closed > w.sigma
        assert abs(sigma_closed / sigma_num - 1) < 0.01

    def test_zero_is_identity(self):
        w = Wavepacket(1, 8.5)
        assert disperse(w, 0.0) is w

    def test_filter_width(self):
        # 0.18 nm at 1545 nm is ~22.6 GHz; Gaussian TBP 0.441 gives ~19.5 ps FWHM.
        s = transform_limited_sigma(0.18)
        assert 8.0 < s < 8.6


# -------------------------------------------------------------------- sources

class TestSources:
    def test_vacuum(self, rng):
        assert np.all(sample_pair_count(SourceSpec(0.0), rng, 100) == 0)
        assert generate_bell_pair(0.0, rng, SourceSpec(0.0)).photons == []

    def test_mean(self, rng):
        n = sample_pair_count(SourceSpec(0.05), rng, 10 ** 6)
        assert abs(n.mean() - 0.05) < 0.002

    def test_thermal_g2(self, rng):
        n = sample_pair_count(SourceSpec(0.05, max_pairs=4), rng, 10 ** 7).astype(float)
        g2 = np.mean(n * (n - 1)) / np.mean(n) ** 2
        assert abs(g2 - 2) < 0.1

    @given(st.floats(0.001, 0.49), st.integers(2, 6))
    def test_pmfs_normalized(self, mu, k):
        assert np.isclose(thermal_pmf(mu, k).sum(), 1)
        p = two_mode_thermal_pmf(mu, k)
        assert np.isclose(p.sum(), 1) and np.all(p >= 0)

    def test_two_mode_is_convolution(self):
        # Oracle: sum of two independent thermal modes.
        mu = 0.2
        n = np.arange(30)
        single = mu ** n / (1 + mu) ** (n + 1)
        conv = np.convolve(single, single)[:4]
        assert np.allclose(two_mode_thermal_pmf(mu, 3), conv / conv.sum())

    def test_rejects_large_mu(self):
        with pytest.raises(ConfigError):
            SourceSpec(0.9)

    def test_bell_pair_phase(self, rng):
        for theta, sign in ((0.0, 1), (np.pi, -1)):
            while True:
                ev = generate_bell_pair(theta, rng, SourceSpec(0.3))
                if ev.pairs == 1:
                    break
            a = ev.joint_amplitudes
            assert np.allclose(a, np.array([1, sign]) / np.sqrt(2))
            assert len(ev.photons) == 2

    def test_heralded_pairs_are_early(self, rng):
        ev = generate_heralded_pairs(SourceSpec(0.45, 3), rng)
        assert all(np.array_equal(p.bin_amplitudes, [1, 0]) for p in ev.photons)
        assert len(ev.photons) == 2 * ev.pairs


class TestEncoding:
    @pytest.mark.parametrize("r, phi, target", [(0.0, 0.0, KET_0), (0.5, 0.0, KET_PLUS),
                                                (0.5, np.pi / 2, KET_PLUS_I)])
    def test_vbs(self, r, phi, target):
        p = encode_user_qubit(photon([1, 0]), vbs_ratio=r, phase=phi)
        assert np.isclose(abs(np.vdot(p.bin_amplitudes, target.vector)), 1)

    @given(st.floats(0, np.pi), st.floats(0, 2 * np.pi))
    def test_settings_round_trip(self, t, p):
        q = make_qubit(t, p)
        out = encode_user_qubit(photon([1, 0]), q)
        assert np.isclose(abs(np.vdot(out.bin_amplitudes, q.vector)), 1)
        r, _ = vbs_settings(q)
        assert 0 <= r <= 1

    def test_lost_photon(self):
        dead = PhotonRecord("idler", np.array([1, 0]), Wavepacket(0, 8.5), "user", alive=False)
        with pytest.raises(ValueError):
            encode_user_qubit(dead, vbs_ratio=0.5, phase=0)


class TestLoss:
    def test_limits(self, rng):
        p = photon([1, 0])
        assert all(apply_loss(p, 1.0, rng).alive for _ in range(100))
        assert not any(apply_loss(p, 0.0, rng).alive for _ in range(100))

    def test_half(self, rng):
        p = photon([1, 0])
        frac = np.mean([apply_loss(p, 0.5, rng).alive for _ in range(10 ** 5)])
        assert abs(frac - 0.5) < 0.01


# ----------------------------------------------------------------------- UMZI

class TestUmzi:
    def test_early_input(self):
        p = projective_umzi(photon([1, 0]), 0.0)
        assert np.isclose(p[("B1", 0)] + p[("B2", 0)], 0.5)
        assert np.isclose(p.get(("B1", 2), 0) + p.get(("B2", 2), 0), 0)
        assert np.isclose(p[("B1", 1)], 0.25) and np.isclose(p[("B2", 1)], 0.25)

    def test_plus_projects(self):
        p = projective_umzi(photon(KET_PLUS.vector), 0.0)
        assert np.isclose(p[("B1", 1)], 0.5) and np.isclose(p[("B2", 1)], 0)

    def test_unbiased(self):
        p = projective_umzi(photon(KET_PLUS_I.vector), 0.0)
        assert np.isclose(p[("B1", 1)], 0.25) and np.isclose(p[("B2", 1)], 0.25)

    @given(st.floats(0, np.pi), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
    def test_probability_conserved(self, t, p, a):
        probs = projective_umzi(photon(make_qubit(t, p).vector), a)
        assert np.isclose(sum(probs.values()), 1)


# ------------------------------------------------------------------------ BSM

def fock_oracle(state, gamma):
    """Two-photon enumeration with an explicit internal mode for distinguishability.

    The user photon sits in internal mode ``a``; the idler is
    ``gamma a + sqrt(1 - |gamma|^2) b``.  Splitter chain built from scratch:
    first 50:50 (user +, idler - on the second output), then one 50:50 per arm.
    """
    c = BellState(state).vector().reshape(2, 2) if isinstance(state, BellState) else state
    reg = fock.ModeRegistry()
    s = 1 / np.sqrt(2)

    def outputs(src, b, internal):
        arm = [(0, s), (1, s if src == "u" else -s)]
        return [(reg((PORTS[2 * a + k], b, internal)), fa * s) for a, fa in arm for k in (0, 1)]

    g = abs(gamma)
    terms = []
    for bu, bi in product((0, 1), repeat=2):
        if c[bu, bi] == 0:
            continue
        user = outputs("u", bu, "a")
        idler = [(m, f * g) for m, f in outputs("i", bi, "a")]
        if g < 1:
            idler += [(m, f * np.sqrt(1 - g ** 2)) for m, f in outputs("i", bi, "b")]
        terms.append((c[bu, bi], fock.product([user, idler])))
    probs = fock.probabilities(fock.add(*terms), tol=0)
    out = defaultdict(float)
    for mono, p in probs.items():
        clicks = tuple(sorted(reg.labels[m][:2] for m in mono))
        out[clicks] += p
    return out


def _cross_arm(sig):
    (p1, _), (p2, _) = sig.clicks
    return (p1 in ("C1", "C2")) != (p2 in ("C1", "C2"))


class TestBellAnalyzer:
    @pytest.mark.parametrize("state", list(BellState))
    @pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0])
    def test_matches_fock_enumeration(self, state, gamma):
        table = bell_analyzer_probabilities(state, gamma)
        oracle = fock_oracle(state, gamma)
        got = {sig.clicks: p for sig, p in table.items()}
        for key in set(got) | set(oracle):
            assert abs(got.get(key, 0) - oracle.get(key, 0)) < 1e-9, key
        assert np.isclose(sum(got.values()), 1, atol=1e-12)

    def test_psi_minus_always_announced(self):
        o = outcome_probabilities(bell_analyzer_probabilities(BellState.PSI_MINUS, 1.0))
        assert np.isclose(o[BellState.PSI_MINUS], 1) and np.isclose(o[BellState.PSI_PLUS], 0)

    def test_psi_plus_half(self):
        o = outcome_probabilities(bell_analyzer_probabilities(BellState.PSI_PLUS, 1.0))
        assert abs(o[BellState.PSI_PLUS] - 0.5) < 1e-12

    @pytest.mark.parametrize("state", list(BellState))
    def test_distinguishable_cross_arm_half(self, state):
        table = bell_analyzer_probabilities(state, 0.0)
        cross = sum(p for sig, p in table.items() if _cross_arm(sig))
        assert np.isclose(cross, 0.5)

    @given(st.floats(0, 1))
    def test_hom_coincidence(self, gamma):
        # Both photons early, i.e. two independent single photons in one mode.
        state = np.array([[1, 0], [0, 0]])
        table = bell_analyzer_probabilities(state, gamma)
        cross = sum(p for sig, p in table.items() if _cross_arm(sig))
        assert np.isclose(cross, (1 - gamma ** 2) / 2)

    @given(st.complex_numbers(max_magnitude=1), st.complex_numbers(max_magnitude=1),
           st.complex_numbers(max_magnitude=1), st.floats(0, 1))
    def test_normalized_for_any_input(self, a, b, c, gamma):
        state = np.array([a, b, c, 0.5])
        table = bell_analyzer_probabilities(state, gamma)
        assert np.isclose(sum(table.values()), 1)
        assert min(table.values()) >= -1e-12

    def test_rejects_gamma_above_one(self):
        with pytest.raises(ValueError):
            bell_analyzer_probabilities(BellState.PSI_PLUS, 1.5)
