"""Batch front-end: ``indevo <eval|fit|shift|validate|equilibrium> [--config FILE] [--out DIR]``.

Configuration is a flat ``key = value`` file with ``#`` comments; every
key can also be given as a flag (``--beta 0.1``), and flags win. Reports
are ``key = value`` text with 6 significant digits and no timestamps, so
identical inputs give byte-identical output.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import calibration, dataio, dynamics, equilibrium
from .model_core import (
    CapitalParams,
    ModelConstants,
    RecoveryParams,
    capital_path,
    evolution_level,
    gdp_recovery,
    life_expectancy,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def _window(text):
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise ValueError(f"expected 'lo:hi', got {text!r}")
    return float(lo), float(hi)


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    return parse


# key -> (parser, help)
CONFIG_KEYS = {
    "G": (float, "capital lifetime [years]"),
    "E": (float, "human-capacity reaction time [years]"),
    "L_bar": (float, "maximum life expectancy [years]"),
    "L_o": (float, "subsistence life expectancy [years]"),
    "eps_bar": (float, "maximum working time (1.0 = 96 h/week)"),
    "a_bar": (float, "envelope amplitude"),
    "T_a": (float, "envelope halftime [year]"),
    "beta": (float, "recovery growth rate [1/year]"),
    "tau": (float, "recovery reference year"),
    "mu_bar": (float, "constant support share"),
    "mu_bar_w": (float, "production-capital support share"),
    "production_split": (float, "production fraction of capital"),
    "t0": (float, "window start [year]"),
    "t1": (float, "window end [year]"),
    "dt": (float, "grid step [years]"),
    "series": (str, "input series for fit"),
    "series_a": (str, "reference series for shift"),
    "series_b": (str, "lagging series for shift"),
    "out": (str, "output directory"),
    "log_fit": (_bool, "fit log values"),
    "free": (str, "comma-separated fitted recovery parameters"),
    "normalization": (_choice("max", "amplitude"), "shift normalization"),
    "fit_window": (_window, "years included in a fit, lo:hi"),
    "exclude": (_window, "years excluded from a life-expectancy fit, lo:hi"),
    "shift_window": (_window, "admissible lags, lo:hi"),
    "shift_mode": (_choice("G", "E", "none"), "infer G (needs beta) or E from the lag"),
    "v_bar": (float, "education share of GDP"),
    "k_w": (float, "production capital for equilibrium"),
    "h_s": (float, "spare-time human capacity for equilibrium"),
}


@dataclass
class RunConfig:
    constants: ModelConstants = field(default_factory=ModelConstants)
    recovery: RecoveryParams = field(default_factory=RecoveryParams)
    capital: CapitalParams = field(default_factory=CapitalParams)
    t0: float = 1900.0
    t1: float = 2200.0
    dt: float | None = None
    series: str | None = None
    series_a: str | None = None
    series_b: str | None = None
    out: str | None = None
    log_fit: bool = False
    free: tuple[str, ...] = ("beta", "tau")
    normalization: str = "max"
    fit_window: tuple[float, float] | None = None
    exclude: tuple[float, float] | None = None
    shift_window: tuple[float, float] | None = None
    shift_mode: str = "none"
    beta_given: bool = False
    v_bar: float = 0.06
    k_w: float | None = None
    h_s: float | None = None

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "RunConfig":
        unknown = sorted(set(raw) - set(CONFIG_KEYS))
        if unknown:
            raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
        values = {}
        for key, text in raw.items():
            parser = CONFIG_KEYS[key][0]
            try:
                values[key] = parser(text)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
        try:
            constants = ModelConstants(**{f.name: values[f.name]
                                          for f in fields(ModelConstants) if f.name in values})
            recovery = RecoveryParams(**{k: values[k] for k in ("beta", "tau") if k in values})
            capital = CapitalParams(**{f.name: values[f.name]
                                       for f in fields(CapitalParams) if f.name in values})
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        cfg = cls(constants=constants, recovery=recovery, capital=capital,
                  beta_given="beta" in values)
        for key in ("t0", "t1", "dt", "series", "series_a", "series_b", "out", "log_fit",
                    "normalization", "fit_window", "exclude", "shift_window", "shift_mode",
                    "v_bar", "k_w", "h_s"):
            if key in values:
                setattr(cfg, key, values[key])
        if "free" in values:
            cfg.free = tuple(part.strip() for part in values["free"].split(",") if part.strip())
        if cfg.t1 <= cfg.t0:
            raise UsageError(f"t1 ({cfg.t1}) must exceed t0 ({cfg.t0})")
        if cfg.dt is not None and cfg.dt <= 0:
            raise UsageError(f"dt must be positive, got {cfg.dt}")
        return cfg

    def out_dir(self) -> str:
        return self.out or os.environ.get("INDEVO_OUT") or "."


def read_config_file(path) -> dict[str, str]:
    raw = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        raw[key.strip()] = value.strip()
    return raw


# -- report formatting ---------------------------------------------------------

def g6(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".6g")
    return str(x)


def format_report(title: str, items) -> str:
    lines = [f"# {title}"]
    for key, value in items:
        if key.startswith("#"):
            lines.append(key)
        else:
            lines.append(f"{key} = {g6(value)}")
    return "\n".join(lines) + "\n"


def _emit(cfg: RunConfig, name: str, text: str, stream) -> str:
    os.makedirs(cfg.out_dir(), exist_ok=True)
    path = os.path.join(cfg.out_dir(), name)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    stream.write(text)
    return path


def _grid(cfg: RunConfig, default_dt: float) -> np.ndarray:
    dt = cfg.dt or default_dt
    n = int(round((cfg.t1 - cfg.t0) / dt))
    return cfg.t0 + dt * np.arange(n + 1)


def _load(path, what):
    if not path:
        raise UsageError(f"no {what} file given")
    if not os.path.exists(path):
        raise FileNotFoundError(f"{what} file not found: {path}")
    return dataio.load_csv(path)


# -- subcommands ---------------------------------------------------------------

def eval_table(cfg: RunConfig):
    """Columns of the evaluation table and the constant spare-time capacity used for ``w``."""
    c, r, cp = cfg.constants, cfg.recovery, cfg.capital
    t = _grid(cfg, 1.0)
    a = evolution_level(t, c)
    y = gdp_recovery(t, c, r)
    k = capital_path(t, c, r, cp)
    life = life_expectancy(t, c)
    k_w, _ = equilibrium.capital_split(k, cp.production_split)
    k_w_sat = cp.production_split * cp.mu_bar * c.G * c.a_bar
    h_s = equilibrium.saturation_h_s(k_w_sat, c.a_bar, c.eps_bar)
    w = equilibrium.working_time(k_w, h_s, c.eps_bar)
    s = equilibrium.spare_time(w, c.eps_bar)
    return t, {"a": a, "y": y, "k": k, "L": life, "w": w, "s": s}, h_s


def merge_gap(t, a, y, c: ModelConstants, r: RecoveryParams):
    """Largest gap between envelope and GDP after ``tau + 2/beta``, relative to ``a`` and to ``a_bar``."""
    mask = t > r.tau + 2.0 / r.beta
    if not mask.any():
        return float("nan"), float("nan")
    gap = a[mask] - y[mask]
    return float(np.max(gap / a[mask])), float(np.max(gap / c.a_bar))


def cmd_eval(cfg: RunConfig, stream=sys.stdout) -> int:
    c, r, cp = cfg.constants, cfg.recovery, cfg.capital
    t, cols, h_s = eval_table(cfg)
    dataio.export_plot_data([(name, (t, vals)) for name, vals in cols.items()],
                            os.path.join(_ensure_out(cfg), "eval.tsv"))
    gap_a, gap_abar = merge_gap(t, cols["a"], cols["y"], c, r)
    items = [
        ("# w(t) closure: h_s is held at the value for which the harmonic output law", None),
        ("# gives y = a_bar at saturated production capital k_w = split*mu_bar*G*a_bar;", None),
        ("# w = eps_bar/(1 + k_w(t)/h_s) with k_w(t) = split*k(t); s = eps_bar - w.", None),
        ("# columns of eval.tsv: year a y k L w s (w, s as fractions of eps_bar)", None),
        ("t0", cfg.t0), ("t1", cfg.t1), ("dt", cfg.dt or 1.0),
        ("beta", r.beta), ("tau", r.tau), ("mu_bar", cp.mu_bar),
        ("production_split", cp.production_split),
        ("h_s", h_s), ("h_s_over_a_bar", h_s / c.a_bar),
        ("w_end_hours_per_week", equilibrium.to_hours_per_week(cols["w"][-1], c.eps_bar)),
        ("y_end", cols["y"][-1]),
        ("merge_gap_max_rel_a", gap_a),
        ("merge_gap_max_rel_a_bar", gap_abar),
    ]
    _emit(cfg, "eval_report.txt", format_report("indevo eval", items), stream)
    return EXIT_OK


def _ensure_out(cfg):
    os.makedirs(cfg.out_dir(), exist_ok=True)
    return cfg.out_dir()


def cmd_fit(cfg: RunConfig, stream=sys.stdout) -> int:
    data = _load(cfg.series, "series")
    series = data.series
    if data.variable == "life_expectancy":
        res = calibration.fit_life_expectancy(series, exclude=cfg.exclude, window=cfg.fit_window)
        p = res.params
        model = lambda t: p["L_o"] + (p["L_bar"] - p["L_o"]) / (  # noqa: E731
            1.0 + np.exp((p["halftime"] - t) / p["E"]))
    elif data.variable == "gdp":
        init = cfg.recovery if cfg.beta_given else None
        res = calibration.fit_recovery(series, cfg.constants, free=cfg.free, init=init,
                                       window=cfg.fit_window, log_space=cfg.log_fit)
        p = res.params
        c = ModelConstants(**{**{f.name: getattr(cfg.constants, f.name)
                                 for f in fields(ModelConstants)},
                              "a_bar": p["a_bar"], "T_a": p["T_a"]})
        model = lambda t: gdp_recovery(t, c, RecoveryParams(p["beta"], p["tau"]))  # noqa: E731
    else:
        raise UsageError(f"cannot fit variable {data.variable!r}; expected gdp or life_expectancy")

    fitted = model(series.years)
    dataio.export_plot_data([("observed", series), ("fitted", (series.years, fitted))],
                            os.path.join(_ensure_out(cfg), "fit_overlay.tsv"))
    items = [("nation", data.nation), ("variable", data.variable),
             ("n_points", res.n_points), ("log_space", res.log_space),
             ("free", ",".join(res.free))]
    items += [(name, value) for name, value in res.params.items()]
    items += [("rmse", res.rmse), ("n_iterations", res.n_iterations),
              ("converged", res.converged)]
    _emit(cfg, "fit_report.txt", format_report("indevo fit", items), stream)
    if not res.converged:
        raise NumericalFailure("fit did not converge within the iteration limit")
    return EXIT_OK


def cmd_shift(cfg: RunConfig, stream=sys.stdout) -> int:
    c = cfg.constants
    a = _load(cfg.series_a, "reference series")
    b = _load(cfg.series_b, "lagging series")
    amp = c.a_bar if cfg.normalization == "amplitude" else None
    if cfg.normalization == "amplitude" and b.variable == "capital":
        amp_b = cfg.capital.mu_bar * c.G * c.a_bar
    else:
        amp_b = amp
    ref = calibration.normalize_series(a.series, amp)
    lag = calibration.normalize_series(b.series, amp_b)
    window = cfg.shift_window or (0.0, 2.0 * c.G)
    est = calibration.measure_shift(ref, lag, window=window)
    items = [("reference", a.nation), ("lagging", b.nation),
             ("normalization", cfg.normalization),
             ("window_lo", est.search_window[0]), ("window_hi", est.search_window[1]),
             ("lag", est.lag), ("score", est.score), ("n_overlap", est.n_overlap),
             ("at_window_edge", est.at_window_edge)]
    if est.at_window_edge:
        items.append(("warning", "lag at search window edge"))
    if cfg.shift_mode == "G":
        if not cfg.beta_given:
            raise UsageError("shift_mode G needs beta")
        items += [("beta", cfg.recovery.beta),
                  ("implied_G", calibration.infer_G(cfg.recovery.beta, est.lag))]
    elif cfg.shift_mode == "E":
        items += [("G", c.G), ("implied_E", calibration.infer_E(c.G, est.lag))]
    _emit(cfg, "shift_report.txt", format_report("indevo shift", items), stream)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, stream=sys.stdout) -> int:
    c, r, cp = cfg.constants, cfg.recovery, cfg.capital
    dt = cfg.dt or 0.05
    rep = dynamics.validate(c, r, cp, cfg.t0, cfg.t1, dt)
    res_dt, res_half, ratio = dynamics.residual_convergence(c, r, cp, cfg.t0, cfg.t1, dt)
    items = [
        ("t0", cfg.t0), ("t1", cfg.t1), ("dt", dt),
        ("beta", r.beta), ("tau", r.tau), ("mu_bar", rep.mu_bar),
        ("max_rel_deviation", rep.max_rel_deviation),
        ("ode_vs_closed_form_max_rel", rep.ode_vs_closed_form_max_rel),
        ("envelope_tail_ode_max_rel", rep.envelope_tail_ode_max_rel),
        ("formula_delta_tau", rep.formula_delta_tau),
        ("measured_delta_tau_closed", rep.measured_delta_tau_closed),
        ("measured_delta_tau_ode", rep.measured_delta_tau_ode),
        ("formula_delta_T", rep.formula_delta_T),
        ("measured_delta_T_closed", rep.measured_delta_T_closed),
        ("measured_delta_T_ode", rep.measured_delta_T_ode),
        ("mu_min", rep.mu_range[0]), ("mu_max", rep.mu_range[1]),
        ("mu_in_empirical_range", rep.mu_in_empirical_range),
        ("endogenous_peak_year", rep.endogenous_peak_year),
        ("self_consistent_residual", rep.self_consistent_residual),
        ("convergence", f"residual {g6(res_dt)} at dt={g6(dt)}, {g6(res_half)} at "
                        f"dt={g6(dt / 2)}, ratio {g6(ratio)}"),
    ]
    items += [("warning", w) for w in rep.warnings]
    text = format_report("indevo validate", items)
    text += "# regime  n_points  mu_bar_max_rel  closed_vs_ode_max_rel  closed_vs_quasi_static_max_rel\n"
    for name in dynamics.REGIMES:
        st = rep.regime_breakdown[name]
        text += (f"{name}\t{st.n_points}\t{g6(st.mu_bar_max_rel)}\t"
                 f"{g6(st.closed_vs_ode_max_rel)}\t{g6(st.closed_vs_quasi_static_max_rel)}\n")
    _emit(cfg, "validate_report.txt", text, stream)
    dataio.export_plot_data([("effective_mu_bar", rep.mu_bar_series)],
                            os.path.join(_ensure_out(cfg), "validate_mu.tsv"))
    return EXIT_OK


def cmd_equilibrium(cfg: RunConfig, stream=sys.stdout) -> int:
    c, cp = cfg.constants, cfg.capital
    k_w = cfg.k_w if cfg.k_w is not None else cp.mu_bar_w * c.G * c.a_bar
    if cfg.h_s is not None:
        h_s = cfg.h_s
    else:
        h_s = equilibrium.saturation_h_s(k_w, c.a_bar, c.eps_bar)
    if h_s <= 0:
        raise UsageError("h_s must be positive: equilibrium undefined without spare-time capacity")
    w = equilibrium.working_time(k_w, h_s, c.eps_bar)
    s = equilibrium.spare_time(w, c.eps_bar)
    y = equilibrium.equilibrium_output(k_w, h_s, c.eps_bar)
    h_bar = equilibrium.education_stock(cfg.v_bar, c.E, c.a_bar)
    required = equilibrium.REQUIRED_H_S_PER_A_BAR * c.a_bar / c.eps_bar
    items = [
        ("k_w", k_w), ("k_w_over_a_bar", k_w / c.a_bar),
        ("h_s", h_s), ("h_s_over_a_bar", h_s / c.a_bar),
        ("w", w), ("w_hours_per_week", equilibrium.to_hours_per_week(w, c.eps_bar)),
        ("s", s), ("s_hours_per_week", equilibrium.to_hours_per_week(s, c.eps_bar)),
        ("y", y), ("y_over_a_bar", y / c.a_bar),
        ("v_bar", cfg.v_bar), ("h_bar", h_bar), ("h_bar_over_a_bar", h_bar / c.a_bar),
        ("safety_margin", h_bar - required), ("safety_margin_over_a_bar",
                                              (h_bar - required) / c.a_bar),
    ]
    _emit(cfg, "equilibrium_report.txt", format_report("indevo equilibrium", items), stream)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "fit": cmd_fit,
    "shift": cmd_shift,
    "validate": cmd_validate,
    "equilibrium": cmd_equilibrium,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="indevo", description="Industrial growth model engine.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        if name == "fit":
            p.add_argument("inputs", nargs="?", metavar="SERIES")
        elif name == "shift":
            p.add_argument("inputs", nargs="*", metavar="SERIES")
        for key, (_, help_text) in CONFIG_KEYS.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=f"opt_{key}", help=help_text)
    return parser


def run(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        raw = read_config_file(args.config) if args.config else {}
        for key in CONFIG_KEYS:
            value = getattr(args, f"opt_{key}")
            if value is not None:
                raw[key] = value
        inputs = getattr(args, "inputs", None)
        if args.command == "fit" and inputs:
            raw["series"] = inputs
        if args.command == "shift" and inputs:
            if len(inputs) != 2:
                raise UsageError("shift takes two series files")
            raw["series_a"], raw["series_b"] = inputs
        cfg = RunConfig.from_mapping(raw)
        return COMMANDS[args.command](cfg, stream)
    except UsageError as exc:
        print(f"indevo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, dataio.DataFormatError, calibration.CalibrationError) as exc:
        print(f"indevo: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalFailure as exc:
        print(f"indevo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"indevo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
