"""Relaxed proximal point method with two-step inertial extrapolation for
equilibrium problems: find x in C with f(x, y) >= 0 for every y in C."""

from .core import AffineSubspace, EquilibriumProblem, Interval, WholeSpace
from .params import Schedule, SolverConfig, ValidationReport, Variant, validate_all
from .prox import Method, ProxQuery, brute_force_prox_oracle, prox_step
from .solver import ProxOptions, RunResult, StopReason, run

__all__ = [
    "AffineSubspace",
    "EquilibriumProblem",
    "Interval",
    "Method",
    "ProxOptions",
    "ProxQuery",
    "RunResult",
    "Schedule",
    "SolverConfig",
    "StopReason",
    "ValidationReport",
    "Variant",
    "WholeSpace",
    "brute_force_prox_oracle",
    "prox_step",
    "run",
    "validate_all",
]
