from ._core import (
    HarvestError,
    Scenario,
    check_uncertainty,
    cli,
    mode_number_expectation,
    negativity,
    nu_minus,
    p_function_witness,
    partial_transpose,
    simon_value,
    weyl_expectation,
)

__all__ = [
    "HarvestError",
    "Scenario",
    "check_uncertainty",
    "cli",
    "mode_number_expectation",
    "negativity",
    "nu_minus",
    "p_function_witness",
    "partial_transpose",
    "simon_value",
    "weyl_expectation",
]
