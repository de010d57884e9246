"""Closed-form S-functions of industrial growth and their time-shift identities.

Every function here is pure and accepts either a scalar year or a numpy
array of years. Exponential overflow is silenced and resolves to ``inf``,
so extreme years return the exact asymptotes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _exp(x):
    # exp(>709) overflows to inf and a/(1 + inf) is then exactly 0
    with np.errstate(over="ignore"):
        return np.exp(x)


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class ModelConstants:
    """Universal parameters of the growth model.

    Parameters
    ----------
    G : float
        Effective lifetime of physical capital [years].
    E : float
        Reaction time of human capacity [years].
    L_bar : float
        Maximum mean life expectancy [years].
    L_o : float
        Subsistence life expectancy [years].
    eps_bar : float
        Maximum working time; 1.0 corresponds to 96 hours per week.
    a_bar : float
        Amplitude of the evolution envelope [constant-1991 currency/capita].
    T_a : float
        Halftime of the envelope [calendar year].
    """

    G: float = 25.0
    E: float = 62.0
    L_bar: float = 118.0
    L_o: float = 30.0
    eps_bar: float = 1.0
    a_bar: float = 75000.0
    T_a: float = 2040.0

    def __post_init__(self):
        for name in ("G", "E", "L_bar", "L_o", "eps_bar", "a_bar", "T_a"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        if self.L_bar <= self.L_o:
            raise ValueError(f"L_bar ({self.L_bar}) must exceed L_o ({self.L_o})")

    @property
    def life_halftime(self) -> float:
        """Inflection year of the life-expectancy curve, ``T_a - L_bar/2``."""
        return self.T_a - self.L_bar / 2.0


@dataclass(frozen=True)
class RecoveryParams:
    """Per-nation recovery: initial growth rate ``beta`` [1/year] and reference year ``tau``."""

    beta: float = 0.08
    tau: float = 1950.0

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if not np.isfinite(self.tau):
            raise ValueError(f"tau must be finite, got {self.tau!r}")


@dataclass(frozen=True)
class CapitalParams:
    """Support shares for physical capital.

    ``mu_bar`` is the constant share of GDP supporting all capital,
    ``mu_bar_w`` the share supporting production capital and
    ``production_split`` the fraction of capital used for production.
    The default ``mu_bar = 0.25`` makes ``production_split * mu_bar``
    equal to ``mu_bar_w``.
    """

    mu_bar: float = 0.25
    mu_bar_w: float = 0.15
    production_split: float = 0.6

    def __post_init__(self):
        if not 0.0 < self.mu_bar < 1.0:
            raise ValueError(f"mu_bar must lie in (0, 1), got {self.mu_bar!r}")
        if not 0.0 < self.mu_bar_w < 1.0:
            raise ValueError(f"mu_bar_w must lie in (0, 1), got {self.mu_bar_w!r}")
        if not 0.0 <= self.production_split <= 1.0:
            raise ValueError(
                f"production_split must lie in [0, 1], got {self.production_split!r}")


@dataclass(frozen=True)
class TimeShiftPair:
    """Lag of capital behind GDP in the recovery (``delta_tau``) and envelope (``delta_T``) regimes."""

    delta_tau: float
    delta_T: float

    @classmethod
    def from_params(cls, c: ModelConstants, r: RecoveryParams) -> "TimeShiftPair":
        return cls(time_shift_recovery(r.beta, c.G), time_shift_evolution(c.E, c.G))


def evolution_level(t, c: ModelConstants = ModelConstants()):
    """Envelope ``a(t) = a_bar / (1 + exp((T_a - t)/E))``."""
    t = np.asarray(t, dtype=float)
    out = c.a_bar / (1.0 + _exp((c.T_a - t) / c.E))
    return _scalar_or_array(out, t)


def gdp_recovery(t, c: ModelConstants = ModelConstants(),
                 r: RecoveryParams = RecoveryParams()):
    """National GDP per capita recovering from disaster into the envelope."""
    t = np.asarray(t, dtype=float)
    out = c.a_bar / (1.0 + _exp((c.T_a - t) / c.E) + _exp(r.beta * (r.tau - t)))
    return _scalar_or_array(out, t)


def shifted_gdp(t, c: ModelConstants = ModelConstants(),
                r: RecoveryParams = RecoveryParams()):
    """GDP form delayed by both time shifts; capital is ``mu_bar * G`` times this."""
    t = np.asarray(t, dtype=float)
    dT = time_shift_evolution(c.E, c.G)
    dtau = time_shift_recovery(r.beta, c.G)
    out = c.a_bar / (1.0 + _exp((c.T_a + dT - t) / c.E)
                     + _exp(r.beta * (r.tau + dtau - t)))
    return _scalar_or_array(out, t)


def capital_path(t, c: ModelConstants = ModelConstants(),
                 r: RecoveryParams = RecoveryParams(),
                 cp: CapitalParams = CapitalParams()):
    """Physical capital per capita, ``mu_bar * G * shifted_gdp(t)``."""
    return cp.mu_bar * c.G * shifted_gdp(t, c, r)


def life_expectancy(t, c: ModelConstants = ModelConstants()):
    """Mean unisex life expectancy; inflects ``L_bar/2`` years before ``T_a``."""
    t = np.asarray(t, dtype=float)
    out = c.L_o + (c.L_bar - c.L_o) / (1.0 + _exp((c.life_halftime - t) / c.E))
    return _scalar_or_array(out, t)


def evolution_growth_rate(a, c: ModelConstants = ModelConstants()):
    """Relative growth rate ``(1 - a/a_bar)/E`` of the envelope at level ``a``."""
    a_arr = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(a_arr)) or np.any(a_arr < 0) or np.any(a_arr > c.a_bar):
        raise ValueError(f"level outside model range [0, {c.a_bar}]: {a!r}")
    return _scalar_or_array((1.0 - a_arr / c.a_bar) / c.E, a_arr)


def time_shift_recovery(beta: float, G: float) -> float:
    """Capital lag behind GDP during exponential recovery, ``ln(1 + beta*G)/beta``."""
    if not (beta > 0 and G > 0):
        raise ValueError(f"beta and G must be positive, got beta={beta!r}, G={G!r}")
    return float(np.log1p(beta * G) / beta)


def time_shift_evolution(E: float, G: float) -> float:
    """Capital lag behind the envelope in its lower tail, ``E * ln(1 + G/E)``."""
    if not (E > 0 and G > 0):
        raise ValueError(f"E and G must be positive, got E={E!r}, G={G!r}")
    return float(E * np.log1p(G / E))


def capital_coefficient(rate, c: ModelConstants = ModelConstants(),
                        cp: CapitalParams = CapitalParams()):
    """Years of GDP embodied in capital, ``mu_bar*G / (1 + G*rate)``.

    ``rate`` is the instantaneous relative GDP growth rate; rates at or
    below ``-1/G`` make the support share diverge and are rejected.
    """
    rate_arr = np.asarray(rate, dtype=float)
    denom = 1.0 + c.G * rate_arr
    if np.any(~np.isfinite(rate_arr)) or np.any(denom <= 0):
        raise ValueError(f"growth rate must exceed -1/G = {-1.0 / c.G}, got {rate!r}")
    return _scalar_or_array(cp.mu_bar * c.G / denom, rate_arr)
