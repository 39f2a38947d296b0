import math

import numpy as np
import pytest

from subquantum.doubleslit import GridSpec, PhaseRamp, SlitConfig, average_current, channel_densities, intensity, relative_phase
from subquantum.errors import QuadratureUnresolved
from subquantum.packet import PacketParams, PhysicalConstants, marginal_density, mean_velocity_field
from subquantum.qoracle import (
    assemble_wavefunctions,
    expectation_moment,
    integrate,
    osmotic_unbiasedness,
    osmotic_unbiasedness_total,
    quantum_current,
    quantum_density,
    shift_operator_expectation,
)

FAR = SlitConfig(half_separation=10.0)
NEAR = SlitConfig(half_separation=1.0)
PHIS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def random_points(rng, n=100):
    return rng.uniform(-6, 6, n), rng.uniform(0, 8, n)


class TestWavefunctions:
    @pytest.mark.parametrize("cfg", [SlitConfig(), SlitConfig(v_x=0.3, amplitude_weights=(1.0, 0.4))])
    def test_modulus_is_density(self, cfg, rng):
        x, t = random_points(rng)
        for xi, ti in zip(x, t):
            w1, w2 = assemble_wavefunctions(cfg, ti)
            p1, p2 = channel_densities(cfg, xi, ti)
            np.testing.assert_allclose(abs(w1.psi(xi)) ** 2, p1, rtol=1e-14)
            np.testing.assert_allclose(abs(w2.psi(xi)) ** 2, p2, rtol=1e-14)

    @pytest.mark.parametrize(
        "cfg",
        [
            SlitConfig(),
            SlitConfig(v_x=-0.2, half_separation=2.0),
            SlitConfig(ramp=PhaseRamp(5 * math.pi, 1.0, 3.0), phase_offset=0.3),
            SlitConfig(mirrored=True, v_x=0.1),
        ],
    )
    def test_action_difference_is_relative_phase(self, cfg, rng):
        x, t = random_points(rng)
        hbar = cfg.constants.hbar
        for xi, ti in zip(x, t):
            w1, w2 = assemble_wavefunctions(cfg, ti)
            diff = (w1.S(xi) - w2.S(xi)) / hbar
            assert abs(diff - relative_phase(cfg, xi, ti)) <= 1e-12 * max(1.0, abs(diff))

    def test_action_gradient_is_mean_velocity(self, rng):
        cfg = SlitConfig(v_x=0.25, half_separation=1.5)
        x, t = random_points(rng)
        c1, c2 = cfg.channels()
        for xi, ti in zip(x, t):
            w1, w2 = assemble_wavefunctions(cfg, ti)
            np.testing.assert_allclose(w1.gradS(xi) / cfg.constants.mass, mean_velocity_field(c1, xi, ti), rtol=1e-12, atol=1e-14)
            np.testing.assert_allclose(w2.gradS(xi) / cfg.constants.mass, mean_velocity_field(c2, xi, ti), rtol=1e-12, atol=1e-14)

    def test_action_fixed_at_origin(self):
        w1, w2 = assemble_wavefunctions(SlitConfig(), 0.0)
        assert w1.S(0.0) == 0.0 and w2.S(0.0) == 0.0

    def test_derivatives_match_differences(self):
        w1, _ = assemble_wavefunctions(SlitConfig(v_x=0.2), 1.3)
        x, h = np.linspace(-3, 3, 13), 1e-4
        np.testing.assert_allclose(w1.grad_psi(x), (w1.psi(x + h) - w1.psi(x - h)) / (2 * h), rtol=1e-7, atol=1e-9)
        lap = (w1.psi(x + h) - 2 * w1.psi(x) + w1.psi(x - h)) / h**2
        np.testing.assert_allclose(w1.lap_psi(x), lap, rtol=1e-5, atol=1e-6)


class TestQuantumCurrent:
    def test_density(self):
        cfg = SlitConfig(amplitude_weights=(1.0, 0.6), v_x=0.1)
        x = np.linspace(-6, 6, 49)
        np.testing.assert_allclose(quantum_density(cfg, x, 2.0), intensity(cfg, x, 2.0), rtol=1e-12, atol=1e-300)

    def test_single_slit(self):
        cfg = SlitConfig(amplitude_weights=(1.0, 0.0), v_x=0.4)
        c1, _ = cfg.channels()
        x = np.linspace(-5, 5, 41)
        ref = marginal_density(c1, x, 1.2) * mean_velocity_field(c1, x, 1.2)
        np.testing.assert_allclose(quantum_current(cfg, x, 1.2), ref, rtol=1e-13, atol=1e-300)

    @pytest.mark.parametrize(
        "cfg",
        [
            SlitConfig(),
            SlitConfig(v_x=-0.3, amplitude_weights=(1.0, 0.5)),
            SlitConfig(ramp=PhaseRamp(5 * math.pi, 2.0, 4.0), mirrored=True),
        ],
    )
    def test_matches_classical_current(self, cfg):
        grid = GridSpec(-12, 12, 257, 0.0, 8.0, 65)
        xx, tt = np.meshgrid(grid.x, grid.t)
        s = average_current(cfg, xx, tt)
        jq = quantum_current(cfg, xx, tt)
        mask = (s.P_tot >= 1e-12) & (jq != 0)
        rel = np.abs(s.J_x[mask] - jq[mask]) / np.abs(jq[mask])
        assert rel.max() <= 1e-8
        zero = (s.P_tot >= 1e-12) & (jq == 0)
        assert np.all(np.abs(s.J_x[zero]) <= 1e-15)

    def test_difference_gradient_second_order(self):
        cfg = SlitConfig(v_x=0.1)
        x = np.linspace(-4, 4, 33)
        exact = quantum_current(cfg, x, 1.5)
        e1 = np.max(np.abs(quantum_current(cfg, x, 1.5, "fd", 1e-2) - exact))
        e2 = np.max(np.abs(quantum_current(cfg, x, 1.5, "fd", 5e-3) - exact))
        assert math.log2(e1 / e2) >= 1.9

    def test_bad_gradient_mode(self):
        with pytest.raises(ValueError):
            quantum_current(SlitConfig(), 0.0, 1.0, gradient="spectral")


class TestIntegrate:
    def test_gaussian(self):
        value, err = integrate(lambda x: np.exp(-x * x), -10, 10)
        np.testing.assert_allclose(value, math.sqrt(math.pi), rtol=1e-12)
        assert err <= 1e-8

    def test_stacked(self):
        value, _ = integrate(lambda x: np.stack([x * x, np.ones_like(x)]), 0.0, 1.0, tol=1e-10)
        np.testing.assert_allclose(value, [1 / 3, 1.0], rtol=1e-9)

    def test_unresolved(self):
        with pytest.raises(QuadratureUnresolved):
            integrate(lambda x: np.cos(1e5 * x) * (x > 0.5), 0.0, 1.0, n0=65, n_max=2049)

    @pytest.mark.parametrize("t", [0.0, 2.0, 6.0])
    def test_norm_matches_intensity(self, t):
        cfg = SlitConfig(amplitude_weights=(1.0, 0.8))
        a, b = -40.0, 40.0
        lhs, _ = integrate(lambda x: quantum_density(cfg, x, t), a, b, tol=1e-12)
        rhs, _ = integrate(lambda x: intensity(cfg, x, t), a, b, tol=1e-12)
        assert abs(lhs - rhs) <= 1e-10


class TestMoments:
    def test_centred_position(self):
        for phi in (0.0, math.pi):
            assert abs(expectation_moment(SlitConfig(), 1.0, phi, "position", 1)) <= 1e-12

    @pytest.mark.parametrize("kind", ["position", "momentum"])
    @pytest.mark.parametrize("order", [1, 2])
    def test_phase_independent_when_separated(self, kind, order):
        vals = [expectation_moment(FAR, 1.0, phi, kind, order) for phi in PHIS]
        assert max(vals) - min(vals) <= 1e-6

    def test_phase_dependent_when_overlapping(self):
        p0 = expectation_moment(NEAR, 1.0, 0.0, "momentum", 1)
        p1 = expectation_moment(NEAR, 1.0, math.pi / 2, "momentum", 1)
        assert abs(p1 - p0) > 1e-3

    def test_second_moment_hand_value(self):
        # separated packets at +/-10 with sigma^2 = 1.25 at t = 1: <x^2> = 100 + 1.25
        np.testing.assert_allclose(expectation_moment(FAR, 1.0, 0.0, "position", 2), 101.25, rtol=1e-10)
        # <p^2> for each Gaussian: (hbar / 2 sigma0)^2 = 0.25
        np.testing.assert_allclose(expectation_moment(FAR, 1.0, 0.0, "momentum", 2), 0.25, rtol=1e-9)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            expectation_moment(FAR, 1.0, 0.0, "position", 3)
        with pytest.raises(ValueError):
            expectation_moment(FAR, 1.0, 0.0, "energy", 1)


class TestShiftOperator:
    @pytest.mark.parametrize("phi", [0.0, math.pi / 3, math.pi])
    def test_half_phase_factor(self, phi):
        val = shift_operator_expectation(FAR, 0.5, phi)
        assert abs(val - np.exp(-1j * phi) / 2) <= 1e-6

    @pytest.mark.parametrize("phi", [0.0, math.pi / 3, math.pi])
    def test_sum_with_conjugate(self, phi):
        total = shift_operator_expectation(FAR, 0.5, phi, +1) + shift_operator_expectation(FAR, 0.5, phi, -1)
        assert abs(total - math.cos(phi)) <= 1e-6

    def test_pi_gives_minus_half(self):
        assert abs(shift_operator_expectation(FAR, 0.0, math.pi).real + 0.5) <= 1e-6

    @pytest.mark.parametrize("X", [8.0, 10.0])
    @pytest.mark.parametrize("phi", [0.0, 1.0, 2.5])
    def test_modulus_bound_separated(self, X, phi):
        assert abs(shift_operator_expectation(SlitConfig(half_separation=X), 1.0, phi)) <= 0.5 + 1e-9

    @pytest.mark.parametrize("X", [0.5, 1.0, 3.0, 6.0])
    @pytest.mark.parametrize("phi", [0.0, 1.0, 2.5])
    def test_modulus_bound_general(self, X, phi):
        # overlapping channels shrink the norm, so only Cauchy-Schwarz applies
        assert abs(shift_operator_expectation(SlitConfig(half_separation=X), 1.0, phi)) <= 1.0 + 1e-9

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            shift_operator_expectation(FAR, 0.0, 0.0, direction=2)


class TestOsmotic:
    @pytest.mark.parametrize("t", [0.0, 1.0, 4.0, 20.0])
    def test_single_packet(self, t):
        assert abs(osmotic_unbiasedness(PacketParams(PhysicalConstants()), t)) <= 1e-10

    @pytest.mark.parametrize("t", [0.0, 3.0])
    def test_shifted_packet(self, t):
        p = PacketParams(PhysicalConstants(), sigma0=0.7, center0=3.0, v_x=0.2)
        assert abs(osmotic_unbiasedness(p, t)) <= 1e-10

    @pytest.mark.parametrize("t", [0.5, 2.0, 6.0])
    def test_two_channel_density(self, t):
        assert abs(osmotic_unbiasedness_total(SlitConfig(), t)) <= 1e-10
