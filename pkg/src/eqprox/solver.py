"""Relaxed proximal point iteration with two-step inertial extrapolation.

One step, given x_{k-2}, x_{k-1}, x_k::

    y_k     = x_k + theta (x_k - x_{k-1}) + beta (x_{k-1} - x_{k-2})
    z_k     = prox of f(y_k, .) with step lambda_k over C
    stop if |z_k - y_k| < epsilon_stop
    x_{k+1} = (1 - rho_k) y_k + rho_k z_k

With beta = 0 this is the one-step relaxed inertial method; with
theta = beta = 0 and rho_k = 1 it is the classical proximal point method.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import constants
from .core import EquilibriumProblem, _common_dim, as_point
from .params import SolverConfig
from .prox import Method, ProxError, ProxQuery, default_method, prox_step


class StopReason(str, enum.Enum):
    RESIDUAL = "ResidualBelowTolerance"
    MAX_ITER = "MaxIterations"
    PROX_FAILURE = "ProxFailure"


@dataclass(frozen=True)
class ProxOptions:
    """How the inner subproblem is solved; ``method=None`` picks the
    closed form when the problem registers one, else the grid search."""

    method: Optional[Method] = None
    bracket: Optional[tuple] = None
    coarse_n: int = constants.DEFAULT_COARSE_N
    refine_tol: float = constants.DEFAULT_REFINE_TOL
    resolution: float = constants.DEFAULT_ORACLE_RESOLUTION


@dataclass(frozen=True)
class DiagnosticSample:
    fejer_lhs: float
    fejer_rhs_plain: float
    fejer_rhs_damped: float
    gamma_k: float
    gamma_bar_k: float
    c1: float
    c2: float

    @property
    def slack_plain(self) -> float:
        return self.fejer_rhs_plain - self.fejer_lhs

    @property
    def slack_damped(self) -> float:
        return self.fejer_rhs_damped - self.fejer_lhs


@dataclass(frozen=True, eq=False)
class IterationRecord:
    k: int
    y: np.ndarray
    z: np.ndarray
    x_next: np.ndarray
    residual: float
    rho_k: float
    lambda_k: float
    diagnostics: Optional[DiagnosticSample] = None


@dataclass
class SolverState:
    x_km2: np.ndarray
    x_km1: np.ndarray
    x_k: np.ndarray
    k: int = 1

    def advance(self, x_next: np.ndarray) -> None:
        self.x_km2, self.x_km1, self.x_k = self.x_km1, self.x_k, x_next
        self.k += 1


@dataclass
class RunResult:
    final: np.ndarray
    iterations: int
    stop_reason: StopReason
    trace: list
    wall_time: float
    iterates: list = field(default_factory=list)
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.stop_reason is StopReason.RESIDUAL


def extrapolate(x_k, x_km1, x_km2, theta: float, beta: float) -> np.ndarray:
    x_k, x_km1, x_km2 = as_point(x_k), as_point(x_km1), as_point(x_km2)
    _common_dim(x_k, x_km1, x_km2)
    return x_k + theta * (x_k - x_km1) + beta * (x_km1 - x_km2)


def relax(y, z, rho_k: float) -> np.ndarray:
    """(1 - rho_k) y + rho_k z, evaluated as y + rho_k (z - y).

    The second form keeps x_next - y equal to rho_k (z - y) to rounding.
    """
    y, z = as_point(y), as_point(z)
    _common_dim(y, z)
    return y + rho_k * (z - y)


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class FejerCheck:
    holds_plain: bool
    holds_damped: bool
    slack_plain: float
    slack_damped: float

    @property
    def holds_any(self) -> bool:
        return self.holds_plain or self.holds_damped


def _sq(v) -> float:
    return float(np.dot(v, v))


def fejer_terms(y, x_next, x_hat, rho_k: float, lambda_k: float, eta: float) -> tuple:
    """Return |x_{k+1} - x_hat|^2 and the right-hand sides of both
    truncated distance inequalities."""
    lhs = _sq(x_next - x_hat)
    base = _sq(y - x_hat)
    step = _sq(x_next - y)
    rhs_plain = base - (2.0 - rho_k) / rho_k * step
    rhs_damped = base - (2.0 - 4.0 * eta * lambda_k - rho_k) / rho_k * step
    return lhs, rhs_plain, rhs_damped


def fejer_check(record: IterationRecord, x_hat, eta: float, tol: float = 0.0) -> FejerCheck:
    """Evaluate

        |x_{k+1} - x^|^2 <= |y_k - x^|^2 - (2 - rho_k)/rho_k |x_{k+1} - y_k|^2
        |x_{k+1} - x^|^2 <= |y_k - x^|^2 - (2 - 4 eta lambda_k - rho_k)/rho_k |x_{k+1} - y_k|^2

    on one iteration record. Slack is rhs - lhs; an inequality holds when
    its slack is >= -tol.
    """
    if x_hat is None:
        raise ValueError("fejer_check needs a known solution")
    x_hat = as_point(x_hat, record.y.size)
    lhs, r_plain, r_damped = fejer_terms(record.y, record.x_next, x_hat, record.rho_k, record.lambda_k, eta)
    s_plain, s_damped = r_plain - lhs, r_damped - lhs
    return FejerCheck(s_plain >= -tol, s_damped >= -tol, s_plain, s_damped)


def lyapunov_constants(theta: float, beta: float, alpha: float) -> tuple[float, float]:
    """c1 and c2 of the Lyapunov decrease estimate for weight `alpha`."""
    a = (theta - beta) * (1.0 + theta) - alpha * (theta**2 - 2.0 * theta + beta * theta + beta + 1.0)
    c1 = -a
    c2 = -(a - beta * (theta - beta) - alpha * (beta**2 + beta + beta * theta))
    return c1, c2


def lyapunov_terms(x_k, x_km1, x_km2, x_hat, theta: float, beta: float, alpha: float) -> tuple[float, float]:
    gamma_k = (
        _sq(x_k - x_hat)
        - theta * _sq(x_km1 - x_hat)
        - beta * _sq(x_km2 - x_hat)
        + alpha * (1.0 + beta - theta) * _sq(x_k - x_km1)
    )
    c1, _ = lyapunov_constants(theta, beta, alpha)
    return gamma_k, gamma_k + c1 * _sq(x_km1 - x_km2)


def default_alpha(rho_k: float) -> float:
    return (2.0 - rho_k) / rho_k


def lyapunov_sequence(
    iterates: Sequence,
    x_hat,
    theta: float,
    beta: float,
    alpha_k: Callable[[int], float],
) -> list:
    """(Gamma_k, Gamma_bar_k) for k = 1, 2, ... from the iterate list
    ``[x_{-1}, x_0, x_1, x_2, ...]``."""
    xs = [as_point(x) for x in iterates]
    if len(xs) < 3:
        raise ValueError("need at least x_{-1}, x_0 and x_1")
    x_hat = as_point(x_hat, xs[0].size)
    out = []
    for k in range(1, len(xs) - 1):
        out.append(lyapunov_terms(xs[k + 1], xs[k], xs[k - 1], x_hat, theta, beta, alpha_k(k)))
    return out


# --------------------------------------------------------------------------
# main loop


def run(
    problem: EquilibriumProblem,
    config: SolverConfig,
    x_init: Sequence,
    *,
    prox: Optional[ProxOptions] = None,
    on_record: Optional[Callable[[IterationRecord], None]] = None,
    keep_trace: bool = True,
) -> RunResult:
    """Iterate until |z_k - y_k| < epsilon_stop or max_iter steps.

    `x_init` is ``(x_{-1}, x_0, x_1)``. On convergence the returned point is
    y_k, which solves the problem when y_k = z_k. A failing inner solve
    ends the run with ``StopReason.PROX_FAILURE``; the loop never continues
    past it. `on_record` receives every record as it is produced.
    """
    if len(x_init) != 3:
        raise ValueError("x_init must hold (x_{-1}, x_0, x_1)")
    dim = problem.dim
    state = SolverState(*(as_point(x, dim) for x in x_init))
    prox = prox or ProxOptions()
    method = Method(prox.method) if prox.method is not None else default_method(problem)
    theta, beta = config.theta, config.beta
    x_hat = problem.known_solution
    eps = config.epsilon_stop

    trace: list = []
    iterates = [state.x_km2, state.x_km1, state.x_k]
    stop, message, final = StopReason.MAX_ITER, "", state.x_k
    t0 = time.perf_counter()
    while state.k <= config.max_iter:
        k = state.k
        rk, lam = config.rho_k(k), config.lambda_k(k)
        y = extrapolate(state.x_k, state.x_km1, state.x_km2, theta, beta)
        try:
            res = prox_step(
                ProxQuery(y, lam, problem),
                method,
                bracket=prox.bracket,
                coarse_n=prox.coarse_n,
                refine_tol=prox.refine_tol,
                resolution=prox.resolution,
            )
        except (ProxError, ValueError) as exc:
            stop, message, final = StopReason.PROX_FAILURE, f"k={k}: {exc}", state.x_k
            break
        z = res.minimizer
        residual = float(np.linalg.norm(z - y))
        x_next = relax(y, z, rk)

        diag = None
        if x_hat is not None:
            lhs, r_plain, r_damped = fejer_terms(y, x_next, x_hat, rk, lam, problem.eta)
            alpha = default_alpha(rk)
            c1, c2 = lyapunov_constants(theta, beta, alpha)
            g, gbar = lyapunov_terms(state.x_k, state.x_km1, state.x_km2, x_hat, theta, beta, alpha)
            diag = DiagnosticSample(lhs, r_plain, r_damped, g, gbar, c1, c2)

        record = IterationRecord(k, y, z, x_next, residual, rk, lam, diag)
        if keep_trace:
            trace.append(record)
        if on_record is not None:
            on_record(record)

        if residual < eps:
            stop, final = StopReason.RESIDUAL, y
            break
        state.advance(x_next)
        iterates.append(x_next)
        final = x_next

    wall = time.perf_counter() - t0
    iterations = state.k if stop is not StopReason.MAX_ITER else config.max_iter
    if stop is StopReason.PROX_FAILURE:
        iterations = state.k - 1
    return RunResult(final, iterations, stop, trace, wall, iterates, message)


def residuals(result: RunResult) -> np.ndarray:
    return np.array([r.residual for r in result.trace])


def relaxation_defect(record: IterationRecord) -> float:
    """|(x_{k+1} - y_k) - rho_k (z_k - y_k)|, zero up to rounding."""
    return float(np.linalg.norm((record.x_next - record.y) - record.rho_k * (record.z - record.y)))
