import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indevo.calibration import TimeSeries, measure_shift
from indevo.dynamics import (
    SampledPath,
    effective_mu_bar,
    integrate_capital,
    mu_path,
    quasi_static_capital,
    residual_convergence,
    support_terms,
    validate,
)
from indevo.model_core import (
    CapitalParams,
    ModelConstants,
    RecoveryParams,
    capital_path,
    evolution_level,
    gdp_recovery,
    shifted_gdp,
    time_shift_evolution,
    time_shift_recovery,
)

C = ModelConstants()
G = C.G
CP = CapitalParams(mu_bar=0.24)
R = RecoveryParams(0.08, 1950.0)


def sampled(func, t0, t1, dt):
    return SampledPath.sample(func, t0, t1, dt)


def exp_lag(beta, mu_bar=0.24, t1=300.0, dt=0.05):
    """Lag of integrated capital behind GDP for pure exponential growth."""
    y = lambda t: np.exp(beta * np.asarray(t))  # noqa: E731
    k = integrate_capital(y, mu_bar, G, 0.0, 0.0, t1, dt)
    years = np.arange(8 * G, t1 + 1.0)
    ref = TimeSeries(np.arange(6 * G, t1 + 1.0), y(np.arange(6 * G, t1 + 1.0)))
    lagged = TimeSeries(years, np.interp(years, k.years, k.values) / (mu_bar * G))
    return measure_shift(ref, lagged, window=(0.0, 2 * G)).lag


class TestSampledPath:
    def test_grid(self):
        p = sampled(lambda t: t, 1900.0, 1901.0, 0.25)
        np.testing.assert_allclose(p.years, [1900, 1900.25, 1900.5, 1900.75, 1901])
        assert len(p.restrict(1900.4, 1901.0)) == 3

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            SampledPath(0.0, 0.0, [1.0, 2.0])

    def test_rejects_ragged_window(self):
        with pytest.raises(ValueError, match="whole number"):
            sampled(lambda t: t, 0.0, 1.0, 0.3)


class TestMuPath:
    def test_shifted_form_gives_constant_share(self):
        t0, t1 = 1800.0, 2300.0
        y_k = sampled(lambda t: shifted_gdp(t, C, R), t0, t1, 1.0)
        k = sampled(lambda t: capital_path(t, C, R, CP), t0, t1, 1.0)
        np.testing.assert_allclose(mu_path(y_k, k, G).values, 0.24, rtol=1e-14)

    def test_saturation(self):
        y = sampled(lambda t: gdp_recovery(t, C, R), 2900.0, 3000.0, 1.0)
        k = sampled(lambda t: capital_path(t, C, R, CP), 2900.0, 3000.0, 1.0)
        assert mu_path(y, k, G).values[-1] == pytest.approx(0.24, rel=1e-6)

    def test_recovery_regime(self):
        r = RecoveryParams(0.10, 1950.0)
        y = sampled(lambda t: gdp_recovery(t, C, r), 1750.0, 1760.0, 1.0)
        k = sampled(lambda t: capital_path(t, C, r, CP), 1750.0, 1760.0, 1.0)
        np.testing.assert_allclose(mu_path(y, k, G).values, 0.24 / 3.5, rtol=1e-3)
        assert mu_path(y, k, G).values[0] == pytest.approx(0.0686, abs=1e-4)

    def test_grid_mismatch(self):
        y = sampled(lambda t: t, 0.0, 10.0, 1.0)
        k = sampled(lambda t: t, 1.0, 11.0, 1.0)
        with pytest.raises(ValueError, match="grid mismatch"):
            mu_path(y, k, G)

    def test_nonpositive_gdp(self):
        y = sampled(lambda t: t, 0.0, 10.0, 1.0)
        with pytest.raises(ValueError, match="positive"):
            mu_path(y, y, G)


class TestEffectiveMuBar:
    def test_pure_exponential(self):
        beta = 0.1
        y = sampled(lambda t: np.exp(beta * t), 0.0, 50.0, 0.01)
        k = SampledPath(0.0, 0.01, 0.24 * G * y.values / (1 + beta * G))
        np.testing.assert_allclose(effective_mu_bar(y, k, G).values, 0.24, rtol=1e-6)

    def test_envelope_lower_tail(self):
        dT = time_shift_evolution(C.E, G)
        y = sampled(lambda t: evolution_level(t, C), 1200.0, 1400.0, 0.05)
        k = sampled(lambda t: 0.24 * G * evolution_level(t - dT, C), 1200.0, 1400.0, 0.05)
        np.testing.assert_allclose(effective_mu_bar(y, k, G).values, 0.24, rtol=1e-3)

    def test_needs_three_points(self):
        y = SampledPath(0.0, 1.0, [1.0, 2.0])
        with pytest.raises(ValueError):
            effective_mu_bar(y, y, G)

    def test_integrated_capital_deviates_in_crossover(self):
        # constant-share flow capital is not the closed form near the crossover
        gdp = lambda t: gdp_recovery(t, C, R)  # noqa: E731
        y = sampled(gdp, 1750.0, 2000.0, 0.05)
        k0 = quasi_static_capital(y, 0.24, G).values[0]
        k = integrate_capital(gdp, 0.24, G, k0, 1750.0, 2000.0, 0.05)
        eff = effective_mu_bar(y, k, G).restrict(1930.0, 1960.0)
        assert np.max(np.abs(eff.values / 0.24 - 1)) > 0.01


class TestSupportTerms:
    def paths(self, dt, t0=1900.0, t1=2200.0):
        y = sampled(lambda t: gdp_recovery(t, C, R), t0, t1, dt)
        k = sampled(lambda t: capital_path(t, C, R, CP), t0, t1, dt)
        return y, k

    def test_self_consistent_residual_small(self):
        y, k = self.paths(0.01)
        assert support_terms(y, k, G).relative_residual() < 1e-6

    def test_terms_add_up(self):
        y, k = self.paths(0.5)
        st_ = support_terms(y, k, G, 0.24)
        np.testing.assert_allclose(
            st_.investment + st_.maintenance - st_.constant_part - st_.endogenous_part,
            st_.residual, atol=1e-9)

    def test_saturation(self):
        y, k = self.paths(0.1, 2800.0, 2900.0)
        st_ = support_terms(y, k, G, 0.24)
        assert np.max(np.abs(st_.residual)) < 1e-6 * np.max(st_.constant_part)
        assert np.max(np.abs(st_.investment)) < 1e-3 * np.max(st_.maintenance)

    def test_endogenous_share_is_bell_shaped(self):
        # a single hump over the recovery; the envelope saturation adds a
        # much smaller second bump after 2000, outside this window
        y, k = self.paths(0.05, 1800.0, 2000.0)
        st_ = support_terms(y, k, G, 0.24)
        share = st_.endogenous_part / y.values
        peak = int(np.argmax(share))
        assert 0 < peak < share.size - 1
        assert np.all(np.diff(share[:peak + 1]) > 0)
        assert np.all(np.diff(share[peak:]) < 0)
        assert 1920.0 < st_.years[peak] < 1960.0

    def test_grid_mismatch(self):
        y, k = self.paths(0.5)
        with pytest.raises(ValueError):
            support_terms(y, SampledPath(k.t0 + 0.25, k.dt, k.values), G)


class TestIntegrateCapital:
    def test_constant_gdp_reaches_steady_state(self):
        k = integrate_capital(lambda t: 1000.0, 0.24, G, 0.0, 0.0, 7 * G, 0.05)
        target = 0.24 * G * 1000.0
        assert abs(k.values[-1] / target - 1) < 1e-3
        # linear solution 1 - exp(-t/G)
        np.testing.assert_allclose(k.values, target * -np.expm1(-k.years / G), rtol=1e-9)

    def test_exponential_particular_solution(self):
        beta = 0.1
        k = integrate_capital(lambda t: np.exp(beta * t), 0.24, G, 0.0, 0.0, 250.0, 0.05)
        ratio = k.values[-1] / (0.24 * G * math.exp(beta * 250.0))
        assert ratio == pytest.approx(1 / 3.5, abs=1e-4)

    def test_recovery_lag_end_to_end(self):
        gdp = lambda t: gdp_recovery(t, C, R)  # noqa: E731
        k = integrate_capital(gdp, 0.24, G, 0.0, 1600.0, 1910.0, 0.05)
        years = np.arange(1840.0, 1901.0)
        ref_years = np.arange(1790.0, 1901.0)
        ref = TimeSeries(ref_years, gdp(ref_years) / C.a_bar)
        lagged = TimeSeries(years, np.interp(years, k.years, k.values) / (0.24 * G * C.a_bar))
        lag = measure_shift(ref, lagged).lag
        assert lag == pytest.approx(time_shift_recovery(0.08, 25.0), abs=0.5)

    def test_scalar_only_callable(self):
        k1 = integrate_capital(lambda t: math.exp(0.01 * t), 0.2, G, 1.0, 0.0, 10.0, 0.1)
        k2 = integrate_capital(lambda t: np.exp(0.01 * t), 0.2, G, 1.0, 0.0, 10.0, 0.1)
        np.testing.assert_array_equal(k1.values, k2.values)

    @pytest.mark.parametrize("dt", [0.0, -0.1, 0.3])
    def test_bad_step(self, dt):
        with pytest.raises(ValueError):
            integrate_capital(lambda t: 1.0, 0.2, G, 0.0, 0.0, 3.0, dt)

    def test_nonfinite_gdp(self):
        with pytest.raises(ValueError, match="non-finite"):
            integrate_capital(lambda t: np.where(np.asarray(t) > 1, np.nan, 1.0),
                              0.2, G, 0.0, 0.0, 2.0, 0.1)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 1e4), st.floats(0, 1), st.floats(0.01, 2.0))
    def test_positivity(self, k0, mu_bar, freq):
        y = lambda t: 1.0 + np.sin(freq * np.asarray(t))  # noqa: E731
        k = integrate_capital(y, mu_bar, G, k0, 0.0, 50.0, 0.25)
        assert np.all(k.values >= 0)

    def test_rk4_order(self):
        gdp = lambda t: gdp_recovery(t, C, R)  # noqa: E731
        fine = integrate_capital(gdp, 0.24, G, 1000.0, 1900.0, 2000.0, 0.005)
        errors = []
        for dt, stride in ((0.2, 40), (0.1, 20)):
            k = integrate_capital(gdp, 0.24, G, 1000.0, 1900.0, 2000.0, dt)
            errors.append(np.max(np.abs(k.values - fine.values[::stride])))
        assert errors[0] / errors[1] >= 8.0


class TestQuasiStatic:
    def test_equals_closed_form(self):
        # dividing the GDP denominator D by (D - G dD/dt) reproduces the
        # shifted closed form exactly; only discretisation error remains
        y = sampled(lambda t: gdp_recovery(t, C, R), 1800.0, 2200.0, 0.01)
        k = quasi_static_capital(y, 0.24, G)
        np.testing.assert_allclose(k.values, capital_path(y.years, C, R, CP), rtol=1e-6)


@pytest.fixture(scope="module")
def report():
    return validate(C, R, CapitalParams())


class TestValidate:

    def test_envelope_shift(self, report):
        assert report.measured_delta_T_ode == pytest.approx(21.0, abs=1.0)
        assert report.measured_delta_T_closed == pytest.approx(report.formula_delta_T, abs=0.01)

    def test_recovery_shift(self, report):
        assert report.measured_delta_tau_ode == pytest.approx(13.73, abs=0.5)
        assert report.measured_delta_tau_closed == pytest.approx(13.73, abs=0.2)

    def test_single_exponential_regimes(self, report):
        # regression value of this build: 0.01656
        assert report.ode_vs_closed_form_max_rel < 0.02
        assert report.ode_vs_closed_form_max_rel == pytest.approx(0.016561, rel=1e-3)

    def test_crossover_discrepancy_is_reported(self, report):
        assert report.regime_breakdown["crossover"].closed_vs_ode_max_rel > 0.05
        assert report.regime_breakdown["crossover"].closed_vs_quasi_static_max_rel < 1e-5

    def test_mu_band(self, report):
        lo, hi = report.mu_range
        assert 0.08 <= lo < hi <= 0.26 and report.mu_in_empirical_range

    def test_deterministic(self, report):
        again = validate(C, R, CapitalParams())
        assert again.ode_vs_closed_form_max_rel == report.ode_vs_closed_form_max_rel
        np.testing.assert_array_equal(again.mu_bar_series.values, report.mu_bar_series.values)

    def test_residual_convergence_ratio_near_four(self):
        coarse, fine, ratio = residual_convergence(C, R, CapitalParams(), dt=0.1)
        assert fine < coarse
        assert ratio == pytest.approx(4.0, rel=1e-3)
