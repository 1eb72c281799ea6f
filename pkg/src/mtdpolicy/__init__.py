"""Finite-MDP solver and cost-sweep toolkit for moving-target-defense
policy selection."""

__version__ = "0.1.0"

from .mdp import (
    MdpError,
    MdpModel,
    Policy,
    SolveReport,
    ValueFunction,
    bellman_backup,
    extract_policy,
    policy_evaluation,
    validate,
    value_iteration,
)
from .config import ConfigError, RunConfig, load_config, parse_config, render_config
from .mtd import ACTIONS, BASELINE, STATES, MtdParams, build_mtd_model, exploited_state_backup
from .oracle import (
    McEstimate,
    PolicyEnumeration,
    enumerate_policies,
    monte_carlo_eval,
    required_horizon,
)
from .sweeps import (
    NoCrossingError,
    PhaseDiagram,
    PiecewiseLinearFit,
    SolveFailedError,
    SweepResult,
    TurningPoint,
    calibrate_scale_base,
    case_study,
    find_turning_point,
    fit_piecewise,
    phase_diagram,
    sweep_cost,
)

__all__ = [
    "ACTIONS",
    "BASELINE",
    "STATES",
    "ConfigError",
    "RunConfig",
    "MdpError",
    "MdpModel",
    "McEstimate",
    "MtdParams",
    "NoCrossingError",
    "PhaseDiagram",
    "PiecewiseLinearFit",
    "Policy",
    "PolicyEnumeration",
    "SolveFailedError",
    "SolveReport",
    "SweepResult",
    "TurningPoint",
    "ValueFunction",
    "bellman_backup",
    "build_mtd_model",
    "calibrate_scale_base",
    "case_study",
    "enumerate_policies",
    "exploited_state_backup",
    "extract_policy",
    "find_turning_point",
    "fit_piecewise",
    "load_config",
    "monte_carlo_eval",
    "parse_config",
    "render_config",
    "required_horizon",
    "phase_diagram",
    "policy_evaluation",
    "sweep_cost",
    "validate",
    "value_iteration",
]
