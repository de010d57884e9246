"""Demand/supply equilibrium between working time, spare time and the two amplifiers.

Working time ``w`` is amplified by production capital ``k_w``, spare time
``s = eps_bar - w`` by spare-time human capacity ``h_s``. Equilibrium
``s*h_s = y = w*k_w`` fixes ``w`` and gives the harmonic output law
``1/y = 1/(eps_bar*h_s) + 1/(eps_bar*k_w)``.

Times are fractions of ``eps_bar`` (1.0 = 96 hours/week); use
:func:`to_hours_per_week` only for presentation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HOURS_PER_WEEK_AT_EPS_BAR = 96.0

# required spare-time capacity of the G7, in units of a_bar/eps_bar
REQUIRED_H_S_PER_A_BAR = 1.3


def to_hours_per_week(w, eps_bar: float = 1.0):
    return w / eps_bar * HOURS_PER_WEEK_AT_EPS_BAR


def from_hours_per_week(hours, eps_bar: float = 1.0):
    return hours / HOURS_PER_WEEK_AT_EPS_BAR * eps_bar


@dataclass(frozen=True)
class HouseholdAllocation:
    """Working and spare time of a household, summing to ``eps_bar``."""

    w: float
    s: float

    @classmethod
    def from_working_time(cls, w: float, eps_bar: float = 1.0) -> "HouseholdAllocation":
        return cls(w, spare_time(w, eps_bar))

    @property
    def eps_bar(self) -> float:
        return self.w + self.s


@dataclass(frozen=True)
class EquilibriumInputs:
    k_w: float
    k_s: float
    h_s: float
    v_bar: float = 0.06
    h_bar: float = 0.0

    def __post_init__(self):
        for name in ("k_w", "k_s", "h_s", "v_bar", "h_bar"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")


def spare_time(w, eps_bar: float = 1.0):
    """Spare time left by working time ``w``."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(~np.isfinite(w_arr)) or np.any(w_arr < 0) or np.any(w_arr > eps_bar):
        raise ValueError(f"working time must lie in [0, {eps_bar}], got {w!r}")
    out = eps_bar - w_arr
    return float(out) if out.ndim == 0 else out


def working_time(k_w, h_s, eps_bar: float = 1.0):
    """Equilibrium working time ``eps_bar / (1 + k_w/h_s)``."""
    k_w = np.asarray(k_w, dtype=float)
    h_s = np.asarray(h_s, dtype=float)
    if np.any(h_s <= 0):
        raise ValueError("spare-time capacity h_s must be positive; equilibrium undefined")
    if np.any(k_w < 0):
        raise ValueError("production capital k_w must be nonnegative")
    out = eps_bar * h_s / (h_s + k_w)
    return float(out) if out.ndim == 0 else out


def equilibrium_output(k_w, h_s, eps_bar: float = 1.0):
    """GDP from the harmonic law; zero if either amplifier vanishes."""
    k_w = np.asarray(k_w, dtype=float)
    h_s = np.asarray(h_s, dtype=float)
    if np.any(k_w < 0) or np.any(h_s < 0):
        raise ValueError("k_w and h_s must be nonnegative")
    total = k_w + h_s
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, eps_bar * k_w * h_s / np.where(total > 0, total, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def equilibrium_residual(w, k_w, h_s, eps_bar: float = 1.0):
    """Demand side ``(eps_bar - w)*h_s``, supply side ``w*k_w`` and their difference.

    When ``k_w << h_s`` the equilibrium ``w`` sits just below ``eps_bar``
    and the demand side loses about ``log10(h_s/k_w)`` digits.
    """
    demand = (eps_bar - w) * h_s
    supply = w * k_w
    return demand, supply, demand - supply


def required_human_capacity(w, k_w, eps_bar: float = 1.0):
    """Spare-time capacity ``w*k_w/(eps_bar - w)`` that balances working time ``w``."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr >= eps_bar):
        raise ValueError(f"working time {w!r} at or above eps_bar needs infinite capacity")
    if np.any(w_arr < 0):
        raise ValueError(f"working time must be nonnegative, got {w!r}")
    out = w_arr * np.asarray(k_w, dtype=float) / (eps_bar - w_arr)
    return float(out) if out.ndim == 0 else out


def education_stock(v_bar: float, E: float, a_bar: float) -> float:
    """Educated human capacity ``v_bar*E*a_bar`` sustained by education spending ``v_bar``."""
    if v_bar < 0 or E <= 0 or a_bar <= 0:
        raise ValueError(f"invalid inputs v_bar={v_bar!r}, E={E!r}, a_bar={a_bar!r}")
    return v_bar * E * a_bar


def capital_split(k, production_split: float = 0.6):
    """Split capital into production ``k_w`` and housing ``k_s = k - k_w``."""
    if not 0.0 <= production_split <= 1.0:
        raise ValueError(f"production_split must lie in [0, 1], got {production_split!r}")
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0):
        raise ValueError("capital must be nonnegative")
    # the smaller part is k minus the larger one; that subtraction is exact,
    # so k_w + k_s reproduces k bit for bit
    if production_split >= 0.5:
        k_w = production_split * k_arr
        k_s = k_arr - k_w
    else:
        k_s = (1.0 - production_split) * k_arr
        k_w = k_arr - k_s
    if k_arr.ndim == 0:
        return float(k_w), float(k_s)
    return k_w, k_s


def saturation_h_s(k_w_sat: float, a_bar: float, eps_bar: float = 1.0) -> float:
    """Spare-time capacity for which the harmonic law yields ``a_bar`` at capital ``k_w_sat``.

    Equivalently ``required_human_capacity(w_sat, k_w_sat)`` with the
    saturation working time ``w_sat = a_bar/k_w_sat`` from the supply side.
    """
    w_sat = a_bar / k_w_sat
    if not 0 < w_sat < eps_bar:
        raise ValueError(
            f"production capital {k_w_sat!r} cannot produce a_bar={a_bar!r} within eps_bar")
    return required_human_capacity(w_sat, k_w_sat, eps_bar)
