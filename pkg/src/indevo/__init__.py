"""Closed-form model of industrial growth: evaluation, calibration, equilibrium and validation."""
from .calibration import (
    CalibrationError,
    FitResult,
    ShiftEstimate,
    TimeSeries,
    denormalize_series,
    fit_life_expectancy,
    fit_recovery,
    infer_E,
    infer_G,
    measure_shift,
    normalize_series,
    synthetic_recovery,
)
from .dataio import (
    DataFormatError,
    NationSeries,
    decade_average,
    export_plot_data,
    load_csv,
    load_plot_data,
    write_csv,
    write_fixtures,
)
from .dynamics import (
    SampledPath,
    ValidationReport,
    effective_mu_bar,
    integrate_capital,
    mu_path,
    quasi_static_capital,
    support_terms,
    validate,
)
from .equilibrium import (
    EquilibriumInputs,
    HouseholdAllocation,
    capital_split,
    education_stock,
    equilibrium_output,
    equilibrium_residual,
    required_human_capacity,
    spare_time,
    working_time,
)
from .model_core import (
    CapitalParams,
    ModelConstants,
    RecoveryParams,
    TimeShiftPair,
    capital_coefficient,
    capital_path,
    evolution_growth_rate,
    evolution_level,
    gdp_recovery,
    life_expectancy,
    time_shift_evolution,
    time_shift_recovery,
)

__version__ = "0.1.0"
