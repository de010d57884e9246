"""
Fitting a recovery curve
========================

``fit_recovery`` estimates ``beta`` and ``tau`` from a GDP series while the
universal constants stay fixed. Here the series is synthetic, generated from
the closed form, with and without measurement noise.
"""

import numpy as np

from indevo import ModelConstants, RecoveryParams, fit_recovery, synthetic_recovery

c = ModelConstants()
truth = RecoveryParams(beta=0.08, tau=1950.0)
years = np.arange(1946.0, 1986.0)

clean = fit_recovery(synthetic_recovery(years, c, truth), c)
print("noiseless: beta = %.6f  tau = %.3f  rmse = %.2e" % (
    clean.params["beta"], clean.params["tau"], clean.rmse))

# A 1% noise level (relative to a_bar) already moves beta by several percent,
# so single estimates should be read with their scatter in mind.
estimates = []
for seed in range(20):
    noisy = synthetic_recovery(years, c, truth, noise=0.01, seed=seed)
    estimates.append(fit_recovery(noisy, c).params["beta"])
print("noisy, 20 seeds: beta mean %.4f  sd %.4f" % (np.mean(estimates), np.std(estimates)))

# Fitting in log space weights the early, small values more strongly.
log_fit = fit_recovery(synthetic_recovery(years, c, truth), c, log_space=True)
print("log-space fit: beta = %.6f" % log_fit.params["beta"])
