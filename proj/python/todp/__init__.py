"""Day-to-day departure-time simulation with tolls tuned by Bayesian optimization."""

from ._core import (
    Config,
    ConfigError,
    EncodingError,
    GP,
    InputError,
    MisuseError,
    Network,
    NumericalError,
    SamplingError,
    SimulationStall,
    TollProfile,
    critical_accumulation,
    lhs,
    population,
    run_bo,
    run_campaign,
    run_scenario,
    simulate_day,
    speed,
)

__all__ = [
    "Config",
    "ConfigError",
    "EncodingError",
    "GP",
    "InputError",
    "MisuseError",
    "Network",
    "NumericalError",
    "SamplingError",
    "SimulationStall",
    "TollProfile",
    "critical_accumulation",
    "lhs",
    "population",
    "run_bo",
    "run_campaign",
    "run_scenario",
    "simulate_day",
    "speed",
]
