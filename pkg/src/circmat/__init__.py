"""circmat: circularity of batch material networks, from topology validation
through staged mass flows to the metric itself, with a learned
robotic-disassembly surrogate supplying the success/duration inputs."""

__version__ = "0.1.0"

from .circularity import (
    CircularityReport,
    SweepRow,
    alpha,
    compute_report,
    lambda_approx,
    lambda_closed_form,
    lambda_numeric,
    round_half_away,
    sensitivity_sweep,
)
from .flows import (
    DisassemblyOutcome,
    MaterialSpec,
    PiecewiseConstant,
    ScenarioParams,
    batch_mass_schedule,
    functionality_coefficient,
    split_by_success,
    weighted_initial_mass,
)
from .network import Compartment, MaterialNetwork, build_network, compartmental_digraph, validate_solids_topology
from .scenario import ScenarioFile, parse_scenario, validate_scenario

__all__ = [
    "CircularityReport",
    "Compartment",
    "DisassemblyOutcome",
    "MaterialNetwork",
    "MaterialSpec",
    "PiecewiseConstant",
    "ScenarioFile",
    "ScenarioParams",
    "SweepRow",
    "__version__",
    "alpha",
    "batch_mass_schedule",
    "build_network",
    "compartmental_digraph",
    "compute_report",
    "functionality_coefficient",
    "lambda_approx",
    "lambda_closed_form",
    "lambda_numeric",
    "parse_scenario",
    "round_half_away",
    "sensitivity_sweep",
    "split_by_success",
    "validate_scenario",
    "validate_solids_topology",
    "weighted_initial_mass",
]
