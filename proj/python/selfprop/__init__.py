"""Energy-harvesting tape agent."""

from ._core import (
    ConfigError,
    ContractViolation,
    InvalidInput,
    binary_entropy,
    expected_gain,
    landauer_bit,
    optimal_engine,
    resonance_trace,
    run_scenario,
    sweep_q_curve,
    sweep_r_grid,
    synthesize,
    verify,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "InvalidInput",
    "binary_entropy",
    "expected_gain",
    "landauer_bit",
    "optimal_engine",
    "resonance_trace",
    "run_scenario",
    "sweep_q_curve",
    "sweep_r_grid",
    "synthesize",
    "verify",
]
