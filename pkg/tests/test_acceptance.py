"""Acceptance criteria; each test records one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py`` to see the lines in the terminal
summary, or ``python tests/test_acceptance.py`` to print them directly.
"""
import math
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from indevo.calibration import (
    TimeSeries,
    fit_recovery,
    infer_E,
    infer_G,
    measure_shift,
    synthetic_recovery,
)
from indevo.cli import eval_table, RunConfig
from indevo.dynamics import integrate_capital, residual_convergence
from indevo.equilibrium import (
    education_stock,
    equilibrium_output,
    equilibrium_residual,
    to_hours_per_week,
    working_time,
)
from indevo.model_core import (
    CapitalParams,
    ModelConstants,
    RecoveryParams,
    evolution_growth_rate,
    evolution_level,
    gdp_recovery,
    life_expectancy,
    time_shift_evolution,
    time_shift_recovery,
)

C = ModelConstants()
A_BAR = C.a_bar


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_delta_T_identity():
    dT = time_shift_evolution(62.0, 25.0)
    record(1, abs(dT - 21.0) <= 0.1, f"time_shift_evolution(62, 25) = {dT:.6f} (21.0 +- 0.1)")


def _exponential_lag(beta, mu_bar=0.25, t1=300.0, dt=0.05):
    y = lambda t: np.exp(beta * np.asarray(t))  # noqa: E731
    k = integrate_capital(y, mu_bar, C.G, 0.0, 0.0, t1, dt)
    # skip the 6G start-up transient of the k0 = 0 start
    ref_years = np.arange(6 * C.G, t1 + 1.0)
    years = np.arange(8 * C.G, t1 + 1.0)
    ref = TimeSeries(ref_years, mu_bar * C.G * y(ref_years))
    lagged = TimeSeries(years, np.interp(years, k.years, k.values))
    return measure_shift(ref, lagged, window=(0.0, 2 * C.G)).lag


def test_02_shift_formula_end_to_end():
    worst, parts = 0.0, []
    for beta in (0.05, 0.08, 0.10):
        lag = _exponential_lag(beta)
        formula = time_shift_recovery(beta, C.G)
        rel = abs(lag / formula - 1)
        worst = max(worst, rel)
        parts.append(f"beta={beta:g}: {lag:.3f} vs {formula:.3f}")
    record(2, worst <= 0.02, "; ".join(parts) + f"; max rel {worst:.2e} (<= 2%)")


def test_03_inverse_identities():
    worst = 0.0
    for beta in np.linspace(0.01, 0.5, 10):
        for G in np.linspace(1.0, 100.0, 10):
            worst = max(worst, abs(infer_G(beta, time_shift_recovery(beta, G)) / G - 1))
    for E in np.linspace(5.0, 300.0, 10):
        for G in np.linspace(1.0, 100.0, 10):
            worst = max(worst, abs(infer_E(G, time_shift_evolution(E, G)) / E - 1))
    record(3, worst <= 1e-8, f"max rel error {worst:.2e} over two 10x10 grids (<= 1e-8)")


def test_04_equilibrium_numerology():
    hours = to_hours_per_week(working_time(4 * A_BAR, 1.3 * A_BAR))
    y = equilibrium_output(4 * A_BAR, 1.3 * A_BAR)
    ok = abs(hours - 23.5) <= 1.0 and abs(y - 0.981 * A_BAR) <= 0.001 * A_BAR
    record(4, ok, f"w = {hours:.4f} h/week (23.5 +- 1.0), y = {y / A_BAR:.6f} a_bar "
                  "(0.981 +- 0.001)")


def test_05_education_margin():
    h_bar = education_stock(0.06, 62.0, A_BAR)
    ok = abs(h_bar - 3.72 * A_BAR) <= 0.05 * A_BAR and h_bar > 1.3 * A_BAR
    record(5, ok, f"h_bar = {h_bar / A_BAR:.4f} a_bar (3.72 +- 0.05, > 1.3)")


def test_06_equilibrium_consistency():
    rng = np.random.default_rng(6)
    k_w = rng.uniform(0.1 * A_BAR, 10 * A_BAR, 1000)
    h_s = rng.uniform(0.1 * A_BAR, 10 * A_BAR, 1000)
    w = working_time(k_w, h_s)
    demand, supply, _ = equilibrium_residual(w, k_w, h_s)
    y = equilibrium_output(k_w, h_s)
    worst = max(np.max(np.abs(demand / y - 1)), np.max(np.abs(supply / y - 1)))
    record(6, worst <= 1e-12, f"max rel mismatch {worst:.2e} over 1000 pairs (<= 1e-12)")


def test_07_growth_rate_law():
    years = np.linspace(1800.0, 2200.0, 50)
    h = 1e-2
    fd = (np.log(evolution_level(years + h)) - np.log(evolution_level(years - h))) / (2 * h)
    law = evolution_growth_rate(evolution_level(years))
    worst = float(np.max(np.abs(fd / law - 1)))
    record(7, worst <= 1e-6, f"max rel difference {worst:.2e} at 50 years (<= 1e-6)")


def test_08_life_expectancy_anchor():
    halftime = C.life_halftime
    value = life_expectancy(halftime)
    ok = halftime == 1981.0 and value == 74.0
    record(8, ok, f"inflection {halftime:g}, L = {value!r} (1981, 74.0 exactly)")


def test_09_calibration_round_trip():
    rng = np.random.default_rng(9)
    worst_beta, worst_tau = 0.0, 0.0
    for _ in range(50):
        beta = rng.uniform(0.03, 0.2)
        tau = float(rng.integers(1930, 1971))
        years = np.arange(tau - 4, tau + 36)
        res = fit_recovery(synthetic_recovery(years, C, RecoveryParams(beta, tau)), C)
        worst_beta = max(worst_beta, abs(res.params["beta"] / beta - 1))
        worst_tau = max(worst_tau, abs(res.params["tau"] - tau))
    ok = worst_beta <= 1e-3 and worst_tau <= 0.1
    record(9, ok, f"50 draws: max beta rel error {worst_beta:.2e} (<= 1e-3), "
                  f"max tau error {worst_tau:.2e} y (<= 0.1)")


def test_10_ode_steady_state():
    y0, mu_bar = 30000.0, 0.25
    k = integrate_capital(lambda t: y0, mu_bar, C.G, 0.0, 0.0, 20 * C.G, 0.05)
    rel = abs(k.values[-1] / (mu_bar * C.G * y0) - 1)
    record(10, rel <= 1e-6, f"k(20G)/(mu_bar G y) - 1 = {rel:.2e} (<= 1e-6)")


def _integrator_ratio():
    gdp = lambda t: gdp_recovery(t, C)  # noqa: E731
    fine = integrate_capital(gdp, 0.25, C.G, 1000.0, 1900.0, 2000.0, 0.005)
    errors = []
    for dt, stride in ((0.2, 40), (0.1, 20)):
        k = integrate_capital(gdp, 0.25, C.G, 1000.0, 1900.0, 2000.0, dt)
        errors.append(np.max(np.abs(k.values - fine.values[::stride])))
    return errors[0] / errors[1]


def test_11_discretisation_orders():
    _, _, res_ratio = residual_convergence(C, RecoveryParams(), CapitalParams(), dt=0.05)
    int_ratio = _integrator_ratio()
    ok = res_ratio >= 4.0 and int_ratio >= 8.0
    record(11, ok, f"residual ratio {res_ratio:.7f} (>= 4), integrator ratio "
                   f"{int_ratio:.3f} (>= 8)")


def test_12_recovery_merges_into_envelope():
    r = RecoveryParams()
    cfg = RunConfig.from_mapping({})
    t, cols, _ = eval_table(cfg)
    late = t > r.tau + 2 / r.beta
    gap = np.abs(cols["a"][late] - cols["y"][late])
    rel_a = float(np.max(gap / cols["a"][late]))
    rel_abar = float(np.max(gap / C.a_bar))
    record(12, rel_a < 0.01, f"max (a - y)/a for t > tau + 2/beta = {rel_a:.4f} (< 0.01); "
                             f"relative to a_bar {rel_abar:.4f}")


if __name__ == "__main__":
    failed = 0
    for name, func in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                func()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
