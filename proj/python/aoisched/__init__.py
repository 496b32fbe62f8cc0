"""Optimal preempt-or-continue scheduling for age of information over an erasure channel."""

from ._core import (
    Action,
    ModelParams,
    Policy,
    SolveReport,
    SolveResult,
    State,
    ValueTable,
    check_policy_structure,
    check_value_structure,
    count_states,
    default_delta_max,
    enumerate_states,
    evaluate_policy_exact,
    extract_thresholds,
    load_policy_document,
    make_params,
    persistent_avg_aoi,
    persistent_policy,
    save_policy_document,
    simulate,
    solve,
    threshold_policy,
    trace,
    transition,
)

__all__ = [name for name in dir() if not name.startswith("_")]
