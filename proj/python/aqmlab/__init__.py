"""Discrete-event AQM simulator with a Kohonen-map RED controller."""

from ._aqmlab import (
    ConfigError,
    FrozenMapError,
    RedParams,
    SomMap,
    ared_adapt,
    cli,
    convergence_check,
    ewma_update,
    fred_adapt,
    kred_train,
    load_map,
    pi_probability,
    pole_balance_validate,
    red_count_corrected,
    red_mark_prob,
    run_scenario,
    save_map,
    scenario_spec,
    teacher,
)

__all__ = [
    "ConfigError",
    "FrozenMapError",
    "RedParams",
    "SomMap",
    "ared_adapt",
    "cli",
    "convergence_check",
    "ewma_update",
    "fred_adapt",
    "kred_train",
    "load_map",
    "pi_probability",
    "pole_balance_validate",
    "red_count_corrected",
    "red_mark_prob",
    "run_scenario",
    "save_map",
    "scenario_spec",
    "teacher",
]
