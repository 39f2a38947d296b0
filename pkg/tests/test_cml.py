import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subquantum.cml import (
    LatticeSpec,
    LatticeState,
    init_gaussian,
    lattice_moments,
    profile_error,
    run_dispersion,
    step,
)
from subquantum.errors import DomainTooSmall, StabilityViolation, UnsupportedConfiguration
from subquantum.packet import PacketParams, PhysicalConstants

PARAMS = PacketParams(PhysicalConstants(), sigma0=1.0)


class TestSpec:
    @pytest.mark.parametrize(
        "kwargs", [{"n_cells": 8}, {"n_cells": 100.5}, {"dx": 0.0}, {"dt": -1.0}, {"boundary": "periodic"}]
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            LatticeSpec(**kwargs)

    def test_positions_centred(self):
        x = LatticeSpec(n_cells=16, dx=0.5).positions(2.0)
        assert x[8] == 2.0 and x[0] == -2.0


class TestInit:
    def test_mass(self):
        s = init_gaussian(LatticeSpec(), PARAMS)
        assert abs(s.values.sum() * 0.02 - 1.0) <= 1e-12

    def test_peak_at_centre(self):
        p = PacketParams(PhysicalConstants(), sigma0=1.0, center0=1.7)
        s = init_gaussian(LatticeSpec(), p)
        assert s.x[np.argmax(s.values)] == 1.7

    @pytest.mark.parametrize("dx", [0.02, 0.1, 0.25])
    def test_discrete_variance(self, dx):
        s = init_gaussian(LatticeSpec(n_cells=int(round(30 / dx)), dx=dx), PARAMS)
        assert abs(lattice_moments(s, dx)["variance"] - 1.0) <= dx**2

    def test_domain_too_small(self):
        with pytest.raises(DomainTooSmall):
            init_gaussian(LatticeSpec(n_cells=512, dx=0.02), PARAMS)

    def test_drift_unsupported(self):
        with pytest.raises(UnsupportedConfiguration):
            init_gaussian(LatticeSpec(), PacketParams(PhysicalConstants(), v_x=0.1))


class TestStep:
    SPEC = LatticeSpec(n_cells=64, dx=0.1, dt=0.01)

    def test_uniform_unchanged(self):
        x = self.SPEC.positions()
        s = step(LatticeState(np.full(64, 0.3), 1.0, x), self.SPEC, PARAMS)
        np.testing.assert_array_equal(s.values, 0.3)
        assert s.t == pytest.approx(1.01)

    def test_impulse_stencil(self):
        v = np.zeros(64)
        v[30] = 1.0
        t, dt, dx = 1.0, self.SPEC.dt, self.SPEC.dx
        r = 0.25 * (t + 0.5 * dt) * dt / dx**2
        s = step(LatticeState(v, t, self.SPEC.positions()), self.SPEC, PARAMS)
        expected = np.zeros(64)
        expected[29:32] = [r, 1 - 2 * r, r]
        np.testing.assert_allclose(s.values, expected, rtol=1e-14, atol=0)

    def test_variance_increment(self):
        spec = LatticeSpec()
        s0 = init_gaussian(spec, PARAMS)
        s0 = LatticeState(s0.values, 1.0, s0.x)
        dt = 5e-4
        s1 = step(s0, spec, PARAMS, dt)
        dvar = lattice_moments(s1, spec.dx)["variance"] - lattice_moments(s0, spec.dx)["variance"]
        np.testing.assert_allclose(dvar, 2 * 0.25 * (1.0 + dt / 2) * dt, rtol=1e-9)

    def test_stability(self):
        spec = LatticeSpec(n_cells=64, dx=0.1, dt=1.0)
        with pytest.raises(StabilityViolation):
            step(LatticeState(np.ones(64), 1.0, spec.positions()), spec, PARAMS)

    def test_absorbing_edges_lose_mass(self):
        spec = LatticeSpec(n_cells=64, dx=0.1, dt=0.01, boundary="absorbing")
        s = step(LatticeState(np.ones(64), 1.0, spec.positions()), spec, PARAMS)
        assert s.values[0] < 1.0 and s.values[-1] < 1.0
        np.testing.assert_array_equal(s.values[1:-1], 1.0)


@pytest.fixture(scope="module")
def long_run():
    return run_dispersion(LatticeSpec(), PARAMS, 8.0)


class TestDispersion:
    def test_zero_time(self):
        series = run_dispersion(LatticeSpec(), PARAMS, 0.0)
        assert series.t.tolist() == [0.0]
        assert abs(series.variance[0] - 1.0) <= 0.02**2

    def test_final_variance(self, long_run):
        assert long_run.t[-1] == 8.0
        assert abs(long_run.variance[-1] - 17.0) / 17.0 <= 0.01

    def test_tracks_ballistic_law(self, long_run):
        rel = np.abs(long_run.variance - long_run.analytic_variance(PARAMS)) / long_run.analytic_variance(PARAMS)
        assert rel.max() <= 1e-3

    def test_mass_conserved(self, long_run):
        assert np.max(np.abs(long_run.mass - 1.0)) <= 1e-12

    def test_positive(self, long_run):
        assert np.all(long_run.final.values >= 0)

    def test_kurtosis(self, long_run):
        assert np.max(np.abs(long_run.kurtosis)) <= 0.02

    def test_quadratic_not_linear(self, long_run):
        half = long_run.t >= 4.0
        t, y = long_run.t[half], long_run.variance[half]

        def r2(xv):
            coef = np.polyfit(xv, y, 1)
            res = y - np.polyval(coef, xv)
            return 1 - np.sum(res**2) / np.sum((y - y.mean()) ** 2)

        assert r2(t**2) >= 0.999
        assert r2(t**2) > r2(t)

    def test_profile_converges(self):
        errs = []
        for dx, n in ((0.04, 1024), (0.02, 2048)):
            series = run_dispersion(LatticeSpec(n_cells=n, dx=dx), PARAMS, 8.0, record_every=100)
            errs.append(profile_error(series.final, PARAMS))
        assert math.log2(errs[0] / errs[1]) >= 1.8

    def test_record_every(self):
        series = run_dispersion(LatticeSpec(), PARAMS, 1.0, record_every=30)
        np.testing.assert_allclose(series.t, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)

    def test_substep_limit(self):
        with pytest.raises(StabilityViolation):
            run_dispersion(LatticeSpec(), PARAMS, 8.0, max_substeps=2)

    def test_negative_end(self):
        with pytest.raises(ValueError):
            run_dispersion(LatticeSpec(), PARAMS, -1.0)

    def test_absorbing_leaks(self):
        spec = LatticeSpec(n_cells=256, dx=0.1, boundary="absorbing")
        series = run_dispersion(spec, PARAMS, 30.0, record_every=500)
        assert series.mass[-1] < 1.0 - 1e-6
        assert np.all(np.diff(series.mass) <= 1e-15)


@given(st.floats(0.005, 0.05), st.floats(0.0, 3.0), st.sampled_from([0.05, 0.1, 0.2]))
def test_mass_and_positivity(dt, t_end, dx):
    spec = LatticeSpec(n_cells=int(round(30 / dx)), dx=dx, dt=dt)
    series = run_dispersion(spec, PARAMS, t_end, record_every=1000)
    assert np.max(np.abs(series.mass - 1.0)) <= 1e-12
    assert np.all(series.final.values >= 0)
