import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tbteleport.qstate import (KET_0, KET_1, KET_MINUS, KET_MINUS_I, KET_PLUS, KET_PLUS_I,
                               SIGMA, BellState, DensityMatrix, ProjectionCounts,
                               TimeBinQubit, apply_pauli, expected_teleported_state, fidelity,
                               make_qubit, project_physical, reconstruct_density,
                               trace_distance)
from tbteleport.validation import NoDataError, NotPhysicalError

angles = st.floats(0, np.pi, allow_nan=False)
phases = st.floats(0, 2 * np.pi, allow_nan=False)


def same_ray(a, b):
    return abs(abs(np.vdot(a.vector, b.vector)) - 1) < 1e-12


class TestMakeQubit:
    def test_pole(self):
        assert same_ray(make_qubit(0, 0), KET_0)

    def test_equator(self):
        assert same_ray(make_qubit(np.pi / 2, 0), KET_PLUS)
        assert same_ray(make_qubit(np.pi / 2, np.pi / 2), KET_PLUS_I)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            TimeBinQubit(1, 1)


class TestPauli:
    def test_x_flips(self):
        assert same_ray(apply_pauli(KET_0, 1), KET_1)

    def test_y_on_plus(self):
        # Oracle: explicit 2x2 product.
        v = np.array([[0, -1j], [1j, 0]]) @ (np.array([1, 1]) / np.sqrt(2))
        assert same_ray(apply_pauli(KET_PLUS, 2), TimeBinQubit.from_vector(v))
        assert same_ray(apply_pauli(KET_PLUS, 2), KET_MINUS)

    def test_identity(self):
        q = make_qubit(1.1, 0.3)
        assert same_ray(apply_pauli(q, 0), q)

    def test_bad_index(self):
        with pytest.raises(ValueError):
            apply_pauli(KET_0, 4)


class TestExpectedTeleportedState:
    def test_table(self):
        assert same_ray(expected_teleported_state(KET_0, BellState.PSI_PLUS), KET_1)
        assert same_ray(expected_teleported_state(KET_PLUS_I, BellState.PSI_PLUS), KET_MINUS_I)
        assert same_ray(expected_teleported_state(KET_MINUS, BellState.PSI_MINUS), KET_PLUS)

    def test_phi_outcomes_undefined(self):
        with pytest.raises(ValueError):
            expected_teleported_state(KET_0, BellState.PHI_PLUS)

    @given(angles, phases)
    def test_unitary_preserves_norm(self, t, p):
        q = make_qubit(t, p)
        for o in (BellState.PSI_PLUS, BellState.PSI_MINUS):
            assert np.isclose(np.linalg.norm(expected_teleported_state(q, o).vector), 1)


class TestReconstruction:
    def test_pole(self):
        rho, s, _ = reconstruct_density(ProjectionCounts(100, 0, 50, 50, 50, 50))
        assert np.allclose(s.as_array(), [1, 0, 0, 1])
        assert np.allclose(rho.m, KET_0.density().m)

    def test_plus(self):
        rho, _, _ = reconstruct_density(ProjectionCounts(50, 50, 100, 0, 50, 50))
        assert np.allclose(rho.m, KET_PLUS.density().m)

    def test_overlong_stokes_projected(self):
        rho, s, raw = reconstruct_density(ProjectionCounts(90, 10, 85, 15, 50, 50))
        assert np.allclose(s.as_array(), [1, 0.7, 0, 0.8])
        assert s.length > 1
        # Oracle: eigenvalues of the raw matrix are (1 +- |S|)/2; the clamp
        # keeps the eigenvector of the positive one.
        w, v = np.linalg.eigh(raw)
        assert np.isclose(w[1], (1 + np.hypot(0.7, 0.8)) / 2)
        top = v[:, 1]
        assert np.allclose(rho.m, np.outer(top, top.conj()))
        assert np.isclose(rho.purity(), 1.0)

    def test_no_data(self):
        with pytest.raises(NoDataError):
            reconstruct_density(ProjectionCounts(0, 0, 3, 4, 5, 6))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ProjectionCounts(-1, 0, 0, 0, 0, 0)

    @given(angles, phases, st.floats(0, 1))
    def test_round_trip_exact_probabilities(self, t, p, purity_mix):
        pure = make_qubit(t, p).density().m
        m = purity_mix * pure + (1 - purity_mix) * np.eye(2) / 2
        n = 10 ** 9
        rho, _, _ = reconstruct_density(ProjectionCounts.from_probabilities(m, n))
        assert trace_distance(rho, m) < 1e-6


class TestFidelity:
    def test_self(self):
        r = DensityMatrix(np.array([[0.7, 0.2], [0.2, 0.3]]))
        assert np.isclose(fidelity(r, r), 1)

    def test_orthogonal(self):
        assert np.isclose(fidelity(KET_0, KET_1), 0)

    def test_mixed(self):
        assert np.isclose(fidelity(KET_0, np.eye(2) / 2), 0.5)

    def test_rejects_unphysical(self):
        with pytest.raises(NotPhysicalError):
            fidelity(np.array([[1.2, 0], [0, -0.2]]), KET_0)

    @given(angles, phases, angles, phases)
    def test_pure_states_reduce_to_overlap(self, t1, p1, t2, p2):
        a, b = make_qubit(t1, p1), make_qubit(t2, p2)
        assert np.isclose(fidelity(a, b), a.overlap(b), atol=1e-9)

    @given(angles, phases, angles, phases, st.floats(0, 1))
    def test_bounded_and_symmetric(self, t1, p1, t2, p2, lam):
        a = make_qubit(t1, p1).density().m
        b = lam * make_qubit(t2, p2).density().m + (1 - lam) * np.eye(2) / 2
        f = fidelity(a, b)
        assert 0 <= f <= 1
        assert np.isclose(f, fidelity(b, a), atol=1e-7)


class TestProjection:
    @given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
    def test_output_is_physical(self, s):
        m = 0.5 * (SIGMA[0] + sum(x * SIGMA[i + 1] for i, x in enumerate(s)))
        p = project_physical(m)
        assert np.isclose(np.trace(p).real, 1)
        assert np.linalg.eigvalsh(p).min() > -1e-12

    def test_physical_input_unchanged(self):
        m = np.array([[0.6, 0.1 - 0.2j], [0.1 + 0.2j, 0.4]])
        assert np.allclose(project_physical(m), m)
