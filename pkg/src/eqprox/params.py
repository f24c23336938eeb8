"""Solver parameters and the convergence-condition validator.

Condition failures never raise. They become report entries so that a
parameter set violating the sufficient conditions can still be run and
studied.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

from . import constants


class Variant(str, enum.Enum):
    TWO_STEP = "two_step"
    ONE_STEP = "one_step"
    PLAIN = "plain"


class Schedule:
    """A map k -> value for k >= 1.

    Built from a number (constant), a sequence (entry k-1 at step k, the
    last entry held afterwards) or a callable.
    """

    def __init__(self, spec: Union[float, Sequence[float], Callable[[int], float], "Schedule"]):
        if isinstance(spec, Schedule):
            self._fn, self.constant, self.values = spec._fn, spec.constant, spec.values
            return
        self.constant: Optional[float] = None
        self.values: Optional[tuple] = None
        if callable(spec):
            self._fn = spec
        elif isinstance(spec, (int, float)):
            self.constant = float(spec)
            self._fn = lambda k: self.constant
        else:
            vals = tuple(float(v) for v in spec)
            if not vals:
                raise ValueError("a schedule needs at least one value")
            if len(set(vals)) == 1:
                self.constant = vals[0]
                self._fn = lambda k: self.constant
            else:
                self.values = vals
                self._fn = lambda k: vals[min(k, len(vals)) - 1]

    def __call__(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"schedules are defined for k >= 1, got {k}")
        return float(self._fn(k))

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def __repr__(self):
        if self.constant is not None:
            return f"Schedule({self.constant!r})"
        if self.values is not None:
            return f"Schedule({list(self.values)!r})"
        return f"Schedule({self._fn!r})"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the relaxed two-step inertial proximal point loop.

    `epsilon_step` is the step-size bound appearing in the step condition;
    `epsilon_stop` is the stopping tolerance on |z_k - y_k|. The variant
    fixes some inertia weights: one-step sets ``beta = 0`` and plain sets
    ``theta = beta = 0``.
    """

    theta: float = 0.0
    beta: float = 0.0
    rho: float = 0.0
    rho_k: Union[float, Sequence[float], Callable, Schedule] = 1.0
    lambda_k: Union[float, Sequence[float], Callable, Schedule] = 0.2
    epsilon_step: float = 0.25
    epsilon_stop: float = 1e-8
    max_iter: int = constants.DEFAULT_MAX_ITER
    variant: Variant = Variant.TWO_STEP

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        theta, beta = float(self.theta), float(self.beta)
        if variant is Variant.ONE_STEP:
            beta = 0.0
        elif variant is Variant.PLAIN:
            theta = beta = 0.0
        if not 0.0 <= theta < 0.5:
            raise ValueError(f"theta must lie in [0, 0.5), got {theta}")
        if beta > 0:
            raise ValueError(f"beta must be <= 0, got {beta}")
        if not (self.epsilon_step > 0 and self.epsilon_stop > 0):
            raise ValueError("epsilon_step and epsilon_stop must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be a positive integer")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        object.__setattr__(self, "rho_k", Schedule(self.rho_k))
        object.__setattr__(self, "lambda_k", Schedule(self.lambda_k))


@dataclass(frozen=True)
class AlphaBounds:
    alpha_max: float
    alpha_min: float


def alpha_bounds(rho_k: float, lambda_k: float, eta: float) -> AlphaBounds:
    """alpha_max = (2 - rho_k)/rho_k and alpha_min = (2 - 4 eta lambda_k - rho_k)/rho_k."""
    if not rho_k > 0:
        raise ValueError(f"rho_k must be positive, got {rho_k}")
    if not lambda_k > 0:
        raise ValueError(f"lambda_k must be positive, got {lambda_k}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return AlphaBounds(
        alpha_max=(2.0 - rho_k) / rho_k,
        alpha_min=(2.0 - 4.0 * eta * lambda_k - rho_k) / rho_k,
    )


# --------------------------------------------------------------------------
# report


PASS = "pass"
FAIL = "fail"
VACUOUS = "vacuous"
DEGENERATE = "degenerate"


@dataclass
class ConditionEntry:
    """Outcome of one condition at one k (``k=None`` means all k).

    `checks` maps each elementary inequality to its status; `values`
    holds the evaluated sides.
    """

    condition: str
    status: str
    k: Optional[int] = None
    checks: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in (PASS, VACUOUS)


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)
    horizon: int = 0

    @property
    def all_passed(self) -> bool:
        return all(e.ok for e in self.entries)

    def failed(self) -> list:
        return [e for e in self.entries if not e.ok]

    def by_condition(self, condition: str) -> list:
        return [e for e in self.entries if e.condition == condition]

    def condition_ok(self, condition: str) -> bool:
        return all(e.ok for e in self.by_condition(condition))

    def summary_flags(self) -> dict:
        """Condition id -> pass/fail over all checked k."""
        out = {}
        for e in self.entries:
            out[e.condition] = PASS if (out.get(e.condition, PASS) == PASS and e.ok) else FAIL
        return out

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "all_passed": self.all_passed,
            "entries": [asdict(e) for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            where = "all k" if e.k is None else f"k={e.k}"
            vals = ", ".join(f"{name}={value:.10g}" for name, value in e.values.items())
            checks = ", ".join(f"{name}:{st}" for name, st in e.checks.items())
            line = f"{e.condition:<9} {where:<7} {e.status.upper():<10} {vals}"
            if checks:
                line += f" [{checks}]"
            if e.message:
                line += f"  -- {e.message}"
            lines.append(line)
        lines.append("overall: " + ("PASS" if self.all_passed else "FAIL"))
        return "\n".join(lines)


def _ks(config: SolverConfig, horizon: int) -> list:
    if horizon < 1:
        return []
    if config.rho_k.is_constant and config.lambda_k.is_constant:
        return [None]
    return list(range(1, horizon + 1))


def _at(schedule: Schedule, k: Optional[int]) -> float:
    return schedule(1 if k is None else k)


def validate_c1(config: SolverConfig, gamma: float, eta: float, horizon: int) -> list:
    """1/(gamma - 8 eta) < lambda_k < epsilon_step <= 1/(4 eta)."""
    entries = []
    eps = config.epsilon_step
    for k in _ks(config, horizon):
        lam = _at(config.lambda_k, k)
        checks, values = {}, {"lambda_k": lam, "epsilon_step": eps, "upper_cap": 1.0 / (4.0 * eta)}
        msg = ""
        if gamma <= 8.0 * eta:
            checks["lower"] = VACUOUS
            msg = "gamma <= 8 eta, so the lower bound 1/(gamma - 8 eta) is not positive"
        else:
            lower = 1.0 / (gamma - 8.0 * eta)
            values["lower_bound"] = lower
            checks["lower"] = PASS if lower < lam else FAIL
        checks["lambda<eps"] = PASS if lam < eps else FAIL
        checks["eps<=1/(4eta)"] = PASS if eps <= 1.0 / (4.0 * eta) else FAIL
        status = FAIL if FAIL in checks.values() else PASS
        entries.append(ConditionEntry("C1", status, k, checks, values, msg))
    return entries


def validate_c2(config: SolverConfig, eta: float, horizon: int) -> list:
    """0 < 1 - rho <= rho_k <= 1 + rho and 0 <= rho <= 1 - 4 eta epsilon_step."""
    entries = []
    rho = config.rho
    cap = 1.0 - 4.0 * eta * config.epsilon_step
    for k in _ks(config, horizon):
        rk = _at(config.rho_k, k)
        checks = {
            "1-rho>0": PASS if 1.0 - rho > 0 else FAIL,
            "1-rho<=rho_k": PASS if 1.0 - rho <= rk else FAIL,
            "rho_k<=1+rho": PASS if rk <= 1.0 + rho else FAIL,
            "rho>=0": PASS if rho >= 0 else FAIL,
            "rho<=1-4eta*eps": PASS if rho <= cap else FAIL,
        }
        values = {"rho": rho, "rho_k": rk, "rho_cap": cap}
        status = FAIL if FAIL in checks.values() else PASS
        entries.append(ConditionEntry("C2", status, k, checks, values))
    return entries


def validate_c3(theta: float, beta: float, bounds: AlphaBounds, k: Optional[int] = None) -> ConditionEntry:
    amin, amax = bounds.alpha_min, bounds.alpha_max
    if amin <= 0:
        return ConditionEntry(
            "C3", DEGENERATE, k, values={"alpha_min": amin, "alpha_max": amax},
            message="alpha_min <= 0: the first term is undefined or of the wrong sign",
        )
    m1 = 2.0 * theta / amin - (1.0 - theta)
    m2 = theta / (1.0 + amax) - amin * (theta - 1.0) ** 2 / ((1.0 + theta) * (1.0 + amax))
    m = max(m1, m2)
    status = PASS if (m < beta <= 0.0) else FAIL
    return ConditionEntry(
        "C3", status, k,
        values={"m1": m1, "m2": m2, "max_term": m, "beta": beta, "alpha_min": amin, "alpha_max": amax},
    )


def c4_value(theta: float, beta: float, bounds: AlphaBounds) -> float:
    amin, amax = bounds.alpha_min, bounds.alpha_max
    return (
        theta**2 * (1.0 - amin)
        + theta * (1.0 - 2.0 * beta + 2.0 * amax - 2.0 * amin)
        - beta * (1.0 - 2.0 * amin)
        + beta**2 * (1.0 - amin)
        - amin
    )


def validate_c4(theta: float, beta: float, bounds: AlphaBounds, k: Optional[int] = None) -> ConditionEntry:
    value = c4_value(theta, beta, bounds)
    return ConditionEntry(
        "C4", PASS if value < 0 else FAIL, k,
        values={"value": value, "alpha_min": bounds.alpha_min, "alpha_max": bounds.alpha_max},
    )


def _structural(config: SolverConfig) -> list:
    out = []
    theta, beta, rho = config.theta, config.beta, config.rho
    out.append(ConditionEntry("theta", PASS if 0.0 <= theta < 0.5 else FAIL, values={"theta": theta}))
    out.append(ConditionEntry("beta", PASS if beta <= 0.0 else FAIL, values={"beta": beta}))
    out.append(ConditionEntry("rho", PASS if 0.0 <= rho < 1.0 else FAIL, values={"rho": rho}))
    return out


def validate_all(problem, config: SolverConfig, horizon: int = 1) -> ValidationReport:
    """Structural checks plus C1-C4 for k = 1..horizon.

    Constant schedules are evaluated once and reported with ``k=None``.
    """
    eta, gamma = problem.eta, problem.gamma
    report = ValidationReport(entries=_structural(config), horizon=horizon)
    report.entries += validate_c1(config, gamma, eta, horizon)
    report.entries += validate_c2(config, eta, horizon)
    for k in _ks(config, horizon):
        rk, lam = _at(config.rho_k, k), _at(config.lambda_k, k)
        try:
            bounds = alpha_bounds(rk, lam, eta)
        except ValueError as exc:
            for cond in ("C3", "C4"):
                report.entries.append(ConditionEntry(cond, DEGENERATE, k, message=str(exc)))
            continue
        report.entries.append(validate_c3(config.theta, config.beta, bounds, k))
        report.entries.append(validate_c4(config.theta, config.beta, bounds, k))
    return report
