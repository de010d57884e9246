"""
Reading G and E off time shifts
===============================

Capital lags GDP by ``ln(1 + beta G)/beta`` during a recovery and by
``E ln(1 + G/E)`` in the lower tail of the envelope. Measuring the lag
between two curves and inverting these formulas recovers ``G`` and ``E``.
"""

import numpy as np

from indevo import (
    ModelConstants,
    RecoveryParams,
    TimeSeries,
    gdp_recovery,
    infer_E,
    infer_G,
    measure_shift,
    time_shift_evolution,
    time_shift_recovery,
)
from indevo.model_core import shifted_gdp

c = ModelConstants()
r = RecoveryParams(0.10, 1950.0)

print("formula lags: recovery %.3f y, envelope %.3f y" % (
    time_shift_recovery(r.beta, c.G), time_shift_evolution(c.E, c.G)))

# Recovery regime: the reference reaches further back so every trial lag overlaps.
ref_t = np.arange(1790.0, 1905.0)
t = np.arange(1840.0, 1905.0)
reference = TimeSeries(ref_t, gdp_recovery(ref_t, c, r) / c.a_bar)
capital = TimeSeries(t, shifted_gdp(t, c, r) / c.a_bar)
est = measure_shift(reference, capital)
print("measured recovery lag %.3f y -> G = %.2f" % (est.lag, infer_G(r.beta, est.lag)))

# Envelope regime, far below saturation.
t = np.arange(1700.0, 1900.0)
env = TimeSeries(t, gdp_recovery(t, c, RecoveryParams(0.08, 1000.0)) / c.a_bar)
lagged = TimeSeries(t, shifted_gdp(t, c, RecoveryParams(0.08, 1000.0)) / c.a_bar)
est = measure_shift(env, lagged)
print("measured envelope lag %.3f y -> E = %.2f" % (est.lag, infer_E(c.G, est.lag)))
