"""Propagator construction, per-period evolution, AC phases, derivatives."""

import math

import numpy as np
import pytest

import kickedchain as kc


def pftc_params(N=4, D=0.0):
    return kc.ChainParams(N=N, J1=-1.0, J2=0.25, D=D, h=7.0, phi=3.05)


def tilted_state(N, theta=math.pi / 16):
    return kc.prepare_initial_state(N, np.full(N, theta))


class TestInitialState:
    def test_all_up(self):
        s = kc.prepare_initial_state(3, np.zeros(3))
        expected = np.zeros(8)
        expected[7] = 1.0
        assert np.abs(s.amplitudes - expected).max() < 1e-15

    def test_all_down(self):
        s = kc.prepare_initial_state(3, np.full(3, math.pi))
        assert abs(s.amplitudes[0] - 1.0) < 1e-15

    def test_single_site_tilt(self):
        s = kc.prepare_initial_state(1, [math.pi / 16])
        assert kc.magnetization(s) == pytest.approx(0.4903926402016152, abs=1e-12)

    def test_profile_length_mismatch(self):
        with pytest.raises(kc.DimensionError):
            kc.prepare_initial_state(4, [0.0, 0.0])


class TestPropagatorInvariants:
    @pytest.mark.parametrize("D", [0.0, 0.6])
    def test_unitarity_and_reconstruction(self, D):
        p = pftc_params(N=5, D=D)
        d = kc.DisorderRealization.draw(p.h, p.N, seed=3, index=0)
        basis = kc.build_basis(p.N)
        sectors = kc.build_hamiltonian(p, d, basis)
        prop = kc.FloquetPropagator(p, basis, sectors)
        hnorm = max(np.linalg.norm(s.matrix, 2) for s in sectors)
        for k, s in enumerate(sectors):
            V = prop.vectors[k]
            assert np.abs(V.conj().T @ V - np.eye(len(V))).max() <= 1e-10
            rebuilt = (V * prop.energies[k]) @ V.conj().T
            assert np.abs(rebuilt - s.matrix).max() <= 1e-9 * max(hnorm, 1.0)

    def test_dense_and_sector_paths_agree(self):
        p = pftc_params(N=5, D=0.4)
        d = kc.DisorderRealization.draw(p.h, p.N, seed=6, index=2)
        fast = kc.FloquetPropagator.build(p, d)
        slow = kc.FloquetPropagator.build(p, d, dense_cutoff=0)
        assert fast.full_matrix() is not None and slow.full_matrix() is None
        state = tilted_state(p.N)
        ac = kc.ACFieldParams(h_ac=0.03, omega=math.pi, theta=0.2)
        a, b = state, state
        for n in range(7):
            a = kc.evolve_period(fast, ac, n, a)
            b = kc.evolve_period(slow, ac, n, b)
        assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-12


class TestACPhase:
    def test_resonant_alternating_sign(self):
        ac = kc.ACFieldParams(h_ac=0.3, omega=math.pi, theta=0.0)
        for n in range(6):
            phase, g = kc.ac_period_phase(ac, n, 1.0)
            expected = 0.3 * (2.0 / math.pi) * (-1) ** n
            assert phase == pytest.approx(expected, abs=1e-15)
            assert g == pytest.approx(expected / 0.3, abs=1e-15)

    def test_zero_amplitude(self):
        ac = kc.ACFieldParams(h_ac=0.0, omega=2.3, theta=0.7)
        assert all(kc.ac_period_phase(ac, n, 1.0)[0] == 0.0 for n in range(5))

    def test_full_period_sine_integrates_to_zero(self):
        ac = kc.ACFieldParams(h_ac=0.5, omega=2 * math.pi, theta=0.0)
        for n in range(5):
            assert kc.ac_period_phase(ac, n, 1.0)[0] == pytest.approx(0.0, abs=1e-15)

    def test_omega_zero_limit(self):
        assert kc.integrated_sine(0.0, 0.5, 0.0, 2.0) == pytest.approx(
            2.0 * math.sin(0.5), abs=1e-15
        )

    def test_matches_quadrature(self):
        from scipy.integrate import quad

        ac = kc.ACFieldParams(h_ac=1.0, omega=1.7, theta=0.3)
        for n in range(4):
            num, _ = quad(lambda t: math.sin(1.7 * t + 0.3), n * 0.9, (n + 1) * 0.9)
            assert kc.ac_period_phase(ac, n, 0.9)[0] == pytest.approx(num, abs=1e-12)

    def test_omega_must_be_positive(self):
        with pytest.raises(ValueError):
            kc.ACFieldParams(h_ac=0.1, omega=0.0)


class TestEvolvePeriod:
    def test_pure_kick_flips(self):
        p = kc.ChainParams(N=3, J1=0.0, J2=0.0, D=0.0, h=0.0, phi=math.pi)
        d = kc.DisorderRealization.draw(0.0, 3, 0, 0)
        prop = kc.FloquetPropagator.build(p, d)
        out = kc.evolve_period(prop, None, 0, kc.prepare_initial_state(3, np.zeros(3)))
        assert abs(abs(out.amplitudes[0]) - 1.0) < 1e-12

    def test_norm_preserved_long_run(self):
        p = pftc_params(N=4)
        d = kc.DisorderRealization.draw(p.h, 4, seed=1, index=0)
        prop = kc.FloquetPropagator.build(p, d)
        ac = kc.ACFieldParams(h_ac=0.02, omega=math.pi, theta=0.1)
        amps = tilted_state(4).amplitudes.copy()
        for n in range(100_000):
            phase = kc.ac_period_phase(ac, n, p.T)[0]
            amps = prop.step_raw(amps, phase)
        assert abs(np.linalg.norm(amps) - 1.0) <= 1e-10

    def test_reversibility_100_periods(self):
        p = pftc_params(N=5, D=0.3)
        d = kc.DisorderRealization.draw(p.h, 5, seed=12, index=0)
        prop = kc.FloquetPropagator.build(p, d)
        ac = kc.ACFieldParams(h_ac=0.05, omega=math.pi, theta=0.4)
        start = tilted_state(5)
        state = start
        for n in range(100):
            state = kc.evolve_period(prop, ac, n, state)
        for n in reversed(range(100)):
            state = kc.evolve_period_inverse(prop, ac, n, state)
        assert np.linalg.norm(state.amplitudes - start.amplitudes) <= 1e-9

    def test_kick_angle_2pi_periodicity(self):
        p = pftc_params(N=4)
        d = kc.DisorderRealization.draw(p.h, 4, seed=2, index=0)
        p_shift = kc.ChainParams(N=4, J1=p.J1, J2=p.J2, D=p.D, h=p.h, phi=p.phi + 2 * math.pi)
        a = kc.evolve_period(kc.FloquetPropagator.build(p, d), None, 0, tilted_state(4))
        b = kc.evolve_period(kc.FloquetPropagator.build(p_shift, d), None, 0, tilted_state(4))
        fidelity = abs(np.vdot(a.amplitudes, b.amplitudes))
        assert abs(fidelity - 1.0) <= 1e-12


class TestTrotterOracle:
    def test_exact_when_ac_off(self):
        p = pftc_params(N=4, D=0.2)
        d = kc.DisorderRealization.draw(p.h, 4, seed=8, index=0)
        prop = kc.FloquetPropagator.build(p, d)
        state = tilted_state(4)
        for n in range(3):
            state = kc.evolve_period(prop, None, n, state)
        for steps in (1, 7):
            tr = kc.trotter_oracle(p, d, None, 3, steps, tilted_state(4))
            assert np.linalg.norm(tr.amplitudes - state.amplitudes) <= 1e-12

    def test_second_order_convergence(self):
        p = pftc_params(N=4)
        d = kc.DisorderRealization.draw(p.h, 4, seed=5, index=0)
        ac = kc.ACFieldParams(h_ac=0.05, omega=math.pi, theta=0.4)
        prop = kc.FloquetPropagator.build(p, d)
        state = tilted_state(4)
        for n in range(3):
            state = kc.evolve_period(prop, ac, n, state)
        errs = []
        for steps in (512, 1024, 2048):
            tr = kc.trotter_oracle(p, d, ac, 3, steps, tilted_state(4))
            errs.append(np.linalg.norm(tr.amplitudes - state.amplitudes))
        for a, b in zip(errs, errs[1:]):
            assert 3.0 < a / b < 5.0

    def test_two_spin_singlet_triplet_precession(self):
        # J1-only pair: |up,down> = (triplet0 + singlet)/sqrt2 precesses with
        # frequency gap J1 between the E=J1/4 and E=-3J1/4 levels
        J1, T = 1.0, 1.0
        p = kc.ChainParams(N=2, J1=J1, J2=0.0, D=0.0, h=0.0, phi=0.0, T=T)
        d = kc.DisorderRealization.draw(0.0, 2, 0, 0)
        up_down = kc.StateVector(np.array([0, 1.0, 0, 0], dtype=complex), 2)
        out = kc.trotter_oracle(p, d, None, 1, 64, up_down)
        phase_t, phase_s = np.exp(-1j * J1 / 4 * T), np.exp(1j * 3 * J1 / 4 * T)
        expected = np.zeros(4, dtype=complex)
        expected[0b01] = (phase_t + phase_s) / 2.0
        expected[0b10] = (phase_t - phase_s) / 2.0
        assert np.abs(out.amplitudes - expected).max() < 1e-10


class TestDerivative:
    def test_initial_derivative_is_zero(self):
        pair = kc.DerivativePair.initial(tilted_state(3))
        assert np.all(pair.dpsi == 0)

    def test_zero_sensitivity_keeps_dpsi_zero(self):
        p = pftc_params(N=3)
        d = kc.DisorderRealization.draw(p.h, 3, seed=3, index=0)
        prop = kc.FloquetPropagator.build(p, d)
        ac = kc.ACFieldParams(h_ac=0.0, omega=2 * math.pi, theta=0.0)  # g_n = 0
        pair = kc.DerivativePair.initial(tilted_state(3))
        for n in range(10):
            pair = kc.evolve_period_with_derivative(prop, ac, n, pair)
        assert np.abs(pair.dpsi).max() == 0.0

    @pytest.mark.parametrize("h_ac", [0.0, 0.04])
    def test_finite_difference_oracle(self, h_ac):
        p = pftc_params(N=4, D=0.2)
        d = kc.DisorderRealization.draw(p.h, 4, seed=9, index=0)
        prop = kc.FloquetPropagator.build(p, d)
        omega, theta = math.pi, 0.0
        ac = kc.ACFieldParams(h_ac=h_ac, omega=omega, theta=theta)
        delta = 1e-5
        ac_p = kc.ACFieldParams(h_ac=h_ac + delta, omega=omega, theta=theta)
        ac_m = kc.ACFieldParams(h_ac=h_ac - delta, omega=omega, theta=theta)
        pair = kc.DerivativePair.initial(tilted_state(4))
        sp = sm = tilted_state(4)
        for n in range(50):
            pair = kc.evolve_period_with_derivative(prop, ac, n, pair)
            sp = kc.evolve_period(prop, ac_p, n, sp)
            sm = kc.evolve_period(prop, ac_m, n, sm)
            fd = (sp.amplitudes - sm.amplitudes) / (2 * delta)
            rel = np.linalg.norm(pair.dpsi - fd) / np.linalg.norm(fd)
            assert rel <= 1e-4

    def test_single_spin_echo_qfi(self):
        # free spin, pi kick, resonant AC: F(nT) = (2nT/pi)^2 exactly
        p = kc.ChainParams(N=1, J1=0.0, J2=0.0, D=0.0, h=0.0, phi=math.pi)
        d = kc.DisorderRealization.draw(0.0, 1, 0, 0)
        prop = kc.FloquetPropagator.build(p, d)
        ac = kc.ACFieldParams(h_ac=0.0, omega=math.pi, theta=0.0)
        pair = kc.DerivativePair.initial(kc.prepare_initial_state(1, [math.pi / 2]))
        for n in range(20):
            pair = kc.evolve_period_with_derivative(prop, ac, n, pair)
            t = (n + 1) * p.T
            assert kc.qfi(pair) == pytest.approx((2 * t / math.pi) ** 2, rel=1e-12)


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            kc.StateVector(np.ones(4), 2)

    def test_rejects_wrong_shape(self):
        with pytest.raises(kc.DimensionError):
            kc.StateVector(np.array([1.0, 0.0]), 2)

    def test_amplitudes_read_only(self):
        s = kc.prepare_initial_state(2, [0.0, 0.0])
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0
