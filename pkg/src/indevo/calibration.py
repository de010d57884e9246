"""Fitting the closed forms to observed series and measuring time shifts.

Fits minimise squared residuals with a deterministic grid scan followed by
Nelder-Mead refinement, so identical inputs always give identical results.
Lags between two series are found by an integer-year scan refined with a
golden-section search on linearly interpolated data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .model_core import ModelConstants, RecoveryParams, _exp, gdp_recovery


class CalibrationError(ValueError):
    """Raised when a series cannot be fitted or aligned."""


@dataclass(frozen=True)
class TimeSeries:
    """Observations ``(year, value)`` with strictly increasing years."""

    years: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        years = np.array(self.years, dtype=float).ravel()
        values = np.array(self.values, dtype=float).ravel()
        if years.shape != values.shape:
            raise ValueError(
                f"years and values differ in length ({years.size} != {values.size})")
        if not np.all(np.isfinite(years)):
            raise ValueError("years must be finite")
        if not np.all(np.isfinite(values)):
            bad = years[~np.isfinite(values)]
            raise ValueError(f"non-finite values at years {bad.tolist()}")
        if years.size > 1 and np.any(np.diff(years) <= 0):
            i = int(np.argmin(np.diff(years) > 0))
            raise ValueError(
                f"years must be strictly increasing (year {years[i + 1]!r} after {years[i]!r})")
        years.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_points(cls, points) -> "TimeSeries":
        points = list(points)
        if not points:
            return cls(np.empty(0), np.empty(0))
        years, values = zip(*points)
        return cls(np.array(years), np.array(values))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.years.tolist(), self.values.tolist()))

    def __len__(self) -> int:
        return self.years.size

    def window(self, start: float | None = None, stop: float | None = None) -> "TimeSeries":
        """Observations with ``start <= year <= stop``."""
        mask = np.ones(self.years.size, dtype=bool)
        if start is not None:
            mask &= self.years >= start
        if stop is not None:
            mask &= self.years <= stop
        return TimeSeries(self.years[mask], self.values[mask])

    def exclude(self, start: float, stop: float) -> "TimeSeries":
        """Observations outside the closed interval ``[start, stop]``."""
        mask = (self.years < start) | (self.years > stop)
        return TimeSeries(self.years[mask], self.values[mask])


@dataclass
class FitResult:
    """Outcome of a least-squares fit.

    ``params`` holds every model parameter (fitted and fixed); ``free``
    names the fitted ones. ``rmse`` is in the units of the series.
    """

    params: dict[str, float]
    free: tuple[str, ...]
    rmse: float
    n_iterations: int
    converged: bool
    n_points: int
    log_space: bool = False
    residuals: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


@dataclass(frozen=True)
class ShiftEstimate:
    """Lag of one series behind another; ``score`` is the RMS distance at the optimum."""

    lag: float
    score: float
    search_window: tuple[float, float]
    n_overlap: int
    at_window_edge: bool


def normalize_series(series: TimeSeries, amplitude: float | None = None) -> TimeSeries:
    """Divide all values by ``amplitude``; the series maximum when not given."""
    if amplitude is None:
        amplitude = float(np.max(series.values)) if len(series) else 0.0
    if not (np.isfinite(amplitude) and amplitude > 0):
        raise ValueError(f"amplitude must be positive, got {amplitude!r}")
    return TimeSeries(series.years, series.values / amplitude)


def denormalize_series(series: TimeSeries, amplitude: float) -> TimeSeries:
    if not (np.isfinite(amplitude) and amplitude > 0):
        raise ValueError(f"amplitude must be positive, got {amplitude!r}")
    return TimeSeries(series.years, series.values * amplitude)


# -- inversions of the time-shift identities --------------------------------

def infer_G(beta: float, delta_tau: float) -> float:
    """Capital lifetime implied by a recovery-regime lag: ``(exp(beta*delta_tau) - 1)/beta``."""
    if not (beta > 0 and delta_tau > 0):
        raise ValueError(
            f"beta and delta_tau must be positive, got beta={beta!r}, delta_tau={delta_tau!r}")
    return float(math.expm1(beta * delta_tau) / beta)


def infer_E(G: float, delta_T: float, rtol: float = 1e-12) -> float:
    """Reaction time ``E`` solving ``delta_T = E*ln(1 + G/E)``.

    The right-hand side increases strictly from 0 to ``G`` as ``E`` runs
    over ``(0, inf)``, so the root is unique; it is bracketed in
    ``[1e-6, 1e6]`` and found by bisection on ``log E``.
    """
    if not (G > 0 and delta_T > 0):
        raise ValueError(f"G and delta_T must be positive, got G={G!r}, delta_T={delta_T!r}")
    if delta_T >= G:
        raise ValueError(f"no finite solution: delta_T={delta_T!r} must be below G={G!r}")

    def gap(log_e):
        e = math.exp(log_e)
        return e * math.log1p(G / e) - delta_T

    lo, hi = math.log(1e-6), math.log(1e6)
    if gap(lo) > 0 or gap(hi) < 0:
        raise ValueError(
            f"solution for delta_T={delta_T!r}, G={G!r} lies outside E in [1e-6, 1e6]")
    # bracket width in log E is the relative width in E
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


# -- least-squares machinery -------------------------------------------------

_NM_OPTIONS = {"xatol": 1e-9, "fatol": 1e-10, "maxiter": 500}


def _check_fit_input(series: TimeSeries, n_free: int, min_points: int = 0):
    need = max(n_free + 1, min_points)
    if len(series) < need:
        raise CalibrationError(f"too few points: {len(series)} < {need}")
    if np.ptp(series.values) == 0:
        raise CalibrationError("degenerate series: all values are equal")
    if not np.all(np.isfinite(series.values)):
        raise CalibrationError("non-finite values in series")


def _nelder_mead(objective, start, scale, bounds):
    """Refine ``start`` by Nelder-Mead in coordinates scaled by ``scale``."""
    start = np.asarray(start, dtype=float)
    scale = np.asarray(scale, dtype=float)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    scaled_bounds = list(zip((lo - start) / scale, (hi - start) / scale))
    n = start.size
    simplex = np.vstack([np.zeros(n), np.eye(n)])
    # keep the initial simplex inside the bounds
    for i in range(n):
        if simplex[i + 1, i] > scaled_bounds[i][1]:
            simplex[i + 1, i] = -1.0

    res = minimize(lambda z: objective(start + scale * z), np.zeros(n),
                   method="Nelder-Mead", bounds=scaled_bounds,
                   options={**_NM_OPTIONS, "initial_simplex": simplex})
    return start + scale * res.x, int(res.nit), bool(res.success)


def _fit(model, start, scale, bounds, series, log_space):
    t = series.years
    data = series.values
    if log_space:
        if np.any(data <= 0):
            raise CalibrationError("log-space fit requires positive values")
        data = np.log(data)
        norm = 1.0
    else:
        norm = float(np.max(np.abs(data)))

    def objective(x):
        pred = model(t, x)
        if log_space:
            if np.any(pred <= 0):
                return np.inf
            pred = np.log(pred)
        return float(np.mean(((pred - data) / norm) ** 2))

    best, nit, ok = _nelder_mead(objective, start, scale, bounds)
    # one restart from the optimum guards against a collapsed simplex
    best2, nit2, ok2 = _nelder_mead(objective, best, np.asarray(scale) * 1e-2, bounds)
    if objective(best2) <= objective(best):
        best = best2
    residuals = series.values - model(t, best)
    rmse = float(np.sqrt(np.mean(residuals ** 2)))
    return best, nit + nit2, ok and ok2, residuals, rmse


_RECOVERY_PARAMS = ("beta", "tau", "a_bar", "T_a")


def _recovery_model(c: ModelConstants, free):
    fixed = {"a_bar": c.a_bar, "T_a": c.T_a}

    def model(t, x):
        p = {**fixed, **dict(zip(free, x))}
        return p["a_bar"] / (1.0 + _exp((p["T_a"] - t) / c.E)
                             + _exp(p["beta"] * (p["tau"] - t)))

    return model


def fit_recovery(series: TimeSeries, c: ModelConstants = ModelConstants(),
                 free=("beta", "tau"), init: RecoveryParams | None = None,
                 window: tuple[float, float] | None = None,
                 log_space: bool = False) -> FitResult:
    """Least-squares fit of the national recovery curve to a GDP series.

    Parameters
    ----------
    series : TimeSeries
        Deflated GDP per capita.
    c : ModelConstants
        Fixed constants; ``E`` is never fitted, ``a_bar`` and ``T_a`` only
        when named in ``free``.
    free : sequence of str
        Subset of ``("beta", "tau", "a_bar", "T_a")``; must contain
        ``beta`` and ``tau``.
    init : RecoveryParams, optional
        Starting point. It competes with a coarse ``(beta, tau)`` grid and
        the better of the two seeds the simplex refinement.
    window : (float, float), optional
        Restrict the fit to these years, e.g. to skip a stagnation segment.
    log_space : bool
        Fit ``log(value)`` instead of raw values.
    """
    free = tuple(free)
    unknown = set(free) - set(_RECOVERY_PARAMS)
    if unknown or not {"beta", "tau"} <= set(free) or len(set(free)) != len(free):
        raise ValueError(f"free must contain beta and tau from {_RECOVERY_PARAMS}, got {free}")
    if window is not None:
        series = series.window(*window)
    _check_fit_input(series, len(free))

    t0, t1 = float(series.years[0]), float(series.years[-1])
    limits = {
        "beta": (0.01, 0.5),
        "tau": (t0 - 50.0, t1 + 50.0),
        "a_bar": (1e-6 * c.a_bar, 1e3 * c.a_bar),
        "T_a": (t0 - 500.0, t1 + 500.0),
    }
    if init is not None:
        if not limits["beta"][0] <= init.beta <= limits["beta"][1]:
            raise ValueError(f"initial beta {init.beta} outside {limits['beta']}")
        if not limits["tau"][0] <= init.tau <= limits["tau"][1]:
            raise ValueError(f"initial tau {init.tau} outside {limits['tau']}")

    model = _recovery_model(c, free)

    # coarse grid over (beta, tau) with the other parameters at their defaults
    betas = np.geomspace(limits["beta"][0], limits["beta"][1], 40)
    taus = np.arange(limits["tau"][0], limits["tau"][1] + 0.5, 1.0)
    bb, tt = np.meshgrid(betas, taus, indexing="ij")
    yrs = series.years[None, None, :]
    pred = c.a_bar / (1.0 + _exp((c.T_a - yrs) / c.E)
                      + _exp(bb[..., None] * (tt[..., None] - yrs)))
    if log_space:
        sse = np.sum((np.log(pred) - np.log(np.clip(series.values, 1e-300, None))) ** 2, axis=-1)
    else:
        sse = np.sum((pred - series.values) ** 2, axis=-1)
    i, j = np.unravel_index(np.argmin(sse), sse.shape)
    grid_seed = {"beta": float(betas[i]), "tau": float(taus[j])}

    def seed_vector(seed):
        return np.array([seed.get(name, getattr(c, name, None)) for name in free], dtype=float)

    def objective_of(x):
        return float(np.sum((model(series.years, x) - series.values) ** 2))

    start = seed_vector(grid_seed)
    if init is not None:
        init_vec = seed_vector({"beta": init.beta, "tau": init.tau})
        if objective_of(init_vec) < objective_of(start):
            start = init_vec

    scales = {"beta": 0.01, "tau": 1.0, "a_bar": 0.05 * c.a_bar, "T_a": 5.0}
    best, nit, ok, residuals, rmse = _fit(
        model, start, [scales[n] for n in free], [limits[n] for n in free],
        series, log_space)

    params = {"beta": 0.0, "tau": 0.0, "a_bar": c.a_bar, "T_a": c.T_a, "E": c.E}
    params.update(dict(zip(free, best.tolist())))
    return FitResult(params=params, free=free, rmse=rmse, n_iterations=nit,
                     converged=ok, n_points=len(series), log_space=log_space,
                     residuals=residuals)


_LIFE_PARAMS = ("L_o", "L_bar", "halftime", "E")


def fit_life_expectancy(series: TimeSeries, init: dict | None = None,
                        exclude: tuple[float, float] | None = None,
                        window: tuple[float, float] | None = None) -> FitResult:
    """Fit subsistence level, maximum, halftime and reaction time of the life-expectancy curve.

    ``exclude`` drops a closed year range, typically the earliest points
    still depressed by child mortality. ``init`` maps any of
    ``L_o, L_bar, halftime, E`` to starting values; missing ones default
    to the universal constants.
    """
    if window is not None:
        series = series.window(*window)
    if exclude is not None:
        series = series.exclude(*exclude)
    _check_fit_input(series, len(_LIFE_PARAMS), min_points=5)

    c = ModelConstants()
    seed = {"L_o": c.L_o, "L_bar": c.L_bar, "halftime": c.life_halftime, "E": c.E}
    if init:
        unknown = set(init) - set(_LIFE_PARAMS)
        if unknown:
            raise ValueError(f"unknown life-expectancy parameters: {sorted(unknown)}")
        seed.update({k: float(v) for k, v in init.items()})

    t0, t1 = float(series.years[0]), float(series.years[-1])
    vmax = float(np.max(series.values))
    limits = {
        "L_o": (0.0, vmax),
        "L_bar": (float(np.min(series.values)), 10.0 * vmax),
        "halftime": (t0 - 500.0, t1 + 500.0),
        "E": (1.0, 1000.0),
    }
    for name in _LIFE_PARAMS:
        lo, hi = limits[name]
        if not lo <= seed[name] <= hi:
            raise ValueError(f"initial {name}={seed[name]} outside [{lo}, {hi}]")

    def model(t, x):
        lo_, hi_, half, e = x
        return lo_ + (hi_ - lo_) / (1.0 + _exp((half - t) / e))

    start = np.array([seed[n] for n in _LIFE_PARAMS])
    scales = [1.0, 1.0, 1.0, 1.0]
    best, nit, ok, residuals, rmse = _fit(
        model, start, scales, [limits[n] for n in _LIFE_PARAMS],
        series, log_space=False)
    return FitResult(params=dict(zip(_LIFE_PARAMS, best.tolist())), free=_LIFE_PARAMS,
                     rmse=rmse, n_iterations=nit, converged=ok,
                     n_points=len(series), residuals=residuals)


# -- lag measurement ---------------------------------------------------------

_MIN_OVERLAP_YEARS = 10.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f, a, b, tol=1e-7):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def measure_shift(reference: TimeSeries, shifted: TimeSeries,
                  window: tuple[float, float] | None = None,
                  min_overlap: float = _MIN_OVERLAP_YEARS) -> ShiftEstimate:
    """Lag ``L`` for which ``shifted(t)`` best matches ``reference(t - L)``.

    The mismatch is the mean squared difference over the years of
    ``shifted`` that fall inside the lagged span of ``reference``, which is
    interpolated linearly. Lags whose overlap is shorter than
    ``min_overlap`` years are not admissible. Both series should already be
    on a common scale (see :func:`normalize_series`).
    """
    if window is None:
        window = (0.0, 2.0 * ModelConstants().G)
    lo, hi = float(window[0]), float(window[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
        raise CalibrationError(f"empty search window {window!r}")
    if len(reference) < 2 or len(shifted) < 2:
        raise CalibrationError("insufficient overlap: each series needs at least two points")

    ref_t, ref_v = reference.years, reference.values
    sh_t, sh_v = shifted.years, shifted.values

    def mismatch(lag):
        src = sh_t - lag
        mask = (src >= ref_t[0]) & (src <= ref_t[-1])
        if not mask.any() or sh_t[mask][-1] - sh_t[mask][0] < min_overlap:
            return np.inf, 0
        diff = np.interp(src[mask], ref_t, ref_v) - sh_v[mask]
        return float(np.mean(diff * diff)), int(mask.sum())

    grid = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float)
    grid = np.unique(np.concatenate([[lo], grid, [hi]]))
    scores = np.array([mismatch(g)[0] for g in grid])
    if not np.isfinite(scores).any():
        raise CalibrationError(
            f"insufficient overlap: fewer than {min_overlap} years for every lag in {window}")
    k = int(np.argmin(scores))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid.size - 1)]
    if b > a:
        lag = _golden_section(lambda x: mismatch(x)[0], a, b)
        if not mismatch(lag)[0] <= scores[k]:
            lag = float(grid[k])
    else:
        lag = float(grid[k])
    mse, n = mismatch(lag)
    edge_tol = 0.05
    return ShiftEstimate(lag=float(lag), score=float(math.sqrt(mse)), search_window=(lo, hi),
                         n_overlap=n,
                         at_window_edge=bool(lag - lo < edge_tol or hi - lag < edge_tol))


def synthetic_recovery(years, c: ModelConstants = ModelConstants(),
                       r: RecoveryParams = RecoveryParams(), noise: float = 0.0,
                       seed: int | None = None) -> TimeSeries:
    """Sample the recovery curve, optionally with Gaussian noise of ``noise * a_bar``."""
    years = np.asarray(years, dtype=float)
    values = gdp_recovery(years, c, r)
    if noise:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise * c.a_bar, size=years.size)
    return TimeSeries(years, values)
