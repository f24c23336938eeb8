"""Inner proximal subproblem  z in argmin_{x in C} f(w, x) + |w - x|^2 / (2 lam).

Three routes are available:

* ``CLOSED_FORM`` uses the minimizer registered on the problem.
* ``GRID_REFINE`` scans a coarse grid over a 1-D bracket and polishes the
  best cell with golden-section search. The objective need not be
  quasiconvex, so golden section is never started from the full bracket.
* ``ORACLE`` is a dense uniform scan with no refinement, meant for tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import constants
from .core import AffineSubspace, EquilibriumProblem, Interval, as_point

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    GRID_REFINE = "grid_refine"
    ORACLE = "oracle"


class ProxError(RuntimeError):
    """Base class for inner-solver failures."""


class UnsupportedMethodError(ProxError):
    pass


class MissingBracketError(ProxError):
    pass


class EvaluationError(ProxError):
    def __init__(self, message: str, abscissa: float):
        super().__init__(message)
        self.abscissa = abscissa


@dataclass(frozen=True, eq=False)
class ProxQuery:
    base: np.ndarray
    lam: float
    problem: EquilibriumProblem

    def __post_init__(self):
        base = as_point(self.base, self.problem.dim)
        object.__setattr__(self, "base", base)
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        fs = self.problem.feasible_set
        if isinstance(fs, AffineSubspace) and fs.residual(base) > constants.AFFINE_MEMBERSHIP_TOL:
            raise ValueError("prox base point is not on the affine feasible set")

    def objective(self, x) -> float:
        x = as_point(x, self.problem.dim)
        d = x - self.base
        return float(self.problem.f(self.base, x)) + float(np.dot(d, d)) / (2.0 * self.lam)

    def scan(self, xs: np.ndarray) -> np.ndarray:
        """Objective at every scalar abscissa in `xs` (1-D problems only)."""
        w = self.base
        if self.problem.f_scan is not None:
            fv = np.asarray(self.problem.f_scan(w, xs), dtype=float)
        else:
            fv = np.array([float(self.problem.f(w, np.array([x]))) for x in xs])
        return fv + (xs - w[0]) ** 2 / (2.0 * self.lam)


@dataclass
class ProxResult:
    minimizer: np.ndarray
    objective: float
    evaluations: int
    bracket: Optional[tuple] = None


def golden_section(h: Callable[[float], float], lo: float, hi: float, tol: float, max_steps: int = 500):
    """Golden-section search on [lo, hi] until the window is at most `tol` wide.

    Returns ``(x, h(x), evals)`` where x is the better of the two interior
    probes at exit.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = h(c), h(d)
    evals = 2
    steps = 0
    while b - a > tol and steps < max_steps:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = h(d)
        evals += 1
        steps += 1
        # window stops shrinking once the probes collide in floating point
        if not (a < c < b) or not (a < d < b):
            break
    if fc <= fd:
        return c, fc, evals
    return d, fd, evals


def grid_refine_minimize_1d(
    h: Callable[[float], float],
    bracket: tuple,
    coarse_n: int = constants.DEFAULT_COARSE_N,
    refine_tol: float = constants.DEFAULT_REFINE_TOL,
    h_vec: Optional[Callable[[np.ndarray], np.ndarray]] = None,
):
    """Global 1-D minimization: coarse uniform grid, then golden section on
    the best cell and its two neighbours.

    Returns ``(x_star, h_star, evals)``. The result is never worse than the
    best grid point; grid ties within ``GRID_TIE_TOL`` go to the smallest
    abscissa.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid bracket ({lo}, {hi})")
    if coarse_n < constants.MIN_COARSE_N:
        raise ValueError(f"coarse_n must be >= {constants.MIN_COARSE_N}, got {coarse_n}")
    grid = np.linspace(lo, hi, coarse_n + 1)
    if h_vec is not None:
        values = np.asarray(h_vec(grid), dtype=float)
    else:
        values = np.array([h(x) for x in grid])
    evals = grid.size
    bad = ~np.isfinite(values)
    if bad.any():
        x_bad = float(grid[np.argmax(bad)])
        raise EvaluationError(f"objective is not finite at x = {x_bad!r}", x_bad)

    best = float(values.min())
    i = int(np.flatnonzero(values <= best + constants.GRID_TIE_TOL)[0])
    x_grid, h_grid = float(grid[i]), float(values[i])
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, coarse_n)])

    def h_checked(x):
        v = h(x)
        if not math.isfinite(v):
            raise EvaluationError(f"objective is not finite at x = {x!r}", x)
        return v

    x_ref, h_ref, n_ref = golden_section(h_checked, a, b, refine_tol)
    evals += n_ref
    if h_ref <= h_grid:
        return x_ref, h_ref, evals
    return x_grid, h_grid, evals


def _search_bracket(query: ProxQuery, bracket: Optional[tuple]) -> tuple:
    fs = query.problem.feasible_set
    if query.problem.dim != 1:
        raise UnsupportedMethodError("the built-in global search is one-dimensional")
    set_bracket = fs.bracket
    if bracket is None:
        if set_bracket is None:
            raise MissingBracketError("the feasible set is unbounded; supply a search bracket")
        return set_bracket
    lo, hi = float(bracket[0]), float(bracket[1])
    if isinstance(fs, Interval):
        lo, hi = max(lo, fs.lo), min(hi, fs.hi)
    if not lo < hi:
        raise MissingBracketError(f"search bracket ({lo}, {hi}) does not meet the feasible set")
    return (lo, hi)


def _localization_radius(query: ProxQuery) -> float:
    """Radius around w that contains every minimizer, or inf.

    h(w) = f(w, w) = 0, so a minimizer z has |z - w|^2 <= -2 lam * inf f(w, .).
    """
    lb = query.problem.lower_bound
    if lb is None or query.problem.feasible_set.residual(query.base) > 0:
        return math.inf
    m = float(lb(query.base))
    return math.sqrt(max(0.0, -2.0 * query.lam * m))


def brute_force_prox_oracle(
    query: ProxQuery,
    resolution: float = constants.DEFAULT_ORACLE_RESOLUTION,
    chunk: int = 1 << 20,
) -> ProxResult:
    """Dense uniform scan of the prox objective at spacing <= `resolution`.

    Only the part of the interval within the localization radius of the
    base point is scanned. Registered breakpoints of f(w, .) inside the
    window are evaluated as well. No refinement is done.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    fs = query.problem.feasible_set
    if not isinstance(fs, Interval) or fs.bracket is None:
        raise MissingBracketError("the oracle needs a bounded Interval feasible set")
    w = float(query.base[0])
    r = _localization_radius(query)
    lo, hi = max(fs.lo, w - r), min(fs.hi, w + r)
    if hi <= lo:
        # window collapsed onto a single feasible point
        lo = hi = min(max(w, fs.lo), fs.hi)
    n = max(1, int(math.ceil((hi - lo) / resolution)))
    step = (hi - lo) / n

    best_x, best_h = math.nan, math.inf
    evals = 0
    for start in range(0, n + 1, chunk):
        idx = np.arange(start, min(start + chunk, n + 1), dtype=float)
        xs = lo + idx * step
        if start + chunk > n:
            xs[-1] = hi
        hv = query.scan(xs)
        evals += xs.size
        if not np.all(np.isfinite(hv)):
            x_bad = float(xs[np.argmax(~np.isfinite(hv))])
            raise EvaluationError(f"objective is not finite at x = {x_bad!r}", x_bad)
        j = int(np.flatnonzero(hv <= hv.min() + constants.GRID_TIE_TOL)[0])
        if hv[j] < best_h - constants.GRID_TIE_TOL:
            best_x, best_h = float(xs[j]), float(hv[j])

    extra = np.array([b for b in query.problem.breakpoints if lo <= b <= hi])
    if extra.size:
        hv = query.scan(extra)
        evals += extra.size
        for x, v in sorted(zip(extra, hv)):
            if v < best_h - constants.GRID_TIE_TOL or (v <= best_h + constants.GRID_TIE_TOL and x < best_x):
                best_x, best_h = float(x), float(v)

    return ProxResult(np.array([best_x]), best_h, evals, (lo, hi))


def prox_step(
    query: ProxQuery,
    method: Method = Method.GRID_REFINE,
    *,
    bracket: Optional[tuple] = None,
    coarse_n: int = constants.DEFAULT_COARSE_N,
    refine_tol: float = constants.DEFAULT_REFINE_TOL,
    resolution: float = constants.DEFAULT_ORACLE_RESOLUTION,
) -> ProxResult:
    method = Method(method)
    problem = query.problem
    if method is Method.CLOSED_FORM:
        if problem.closed_form_prox is None:
            raise UnsupportedMethodError(f"no closed-form prox registered for family {problem.name!r}")
        z = as_point(problem.closed_form_prox(query.base, query.lam), problem.dim)
        return ProxResult(z, query.objective(z), 1)
    if method is Method.ORACLE:
        return brute_force_prox_oracle(query, resolution)

    lo, hi = _search_bracket(query, bracket)
    x, hx, evals = grid_refine_minimize_1d(
        lambda t: query.objective(np.array([t])),
        (lo, hi),
        coarse_n=coarse_n,
        refine_tol=refine_tol,
        h_vec=query.scan if problem.f_scan is not None else None,
    )
    return ProxResult(np.array([x]), float(hx), evals, (lo, hi))


def default_method(problem: EquilibriumProblem) -> Method:
    if problem.closed_form_prox is not None:
        return Method.CLOSED_FORM
    return Method.GRID_REFINE


def prox_inequality_check(query: ProxQuery, z, y, mu: float, gamma: float) -> tuple[float, float]:
    """Both sides of the prox inequality for strongly quasiconvex g = f(w, .).

    lhs = g(z) - max(g(y), g(z))
    rhs = (mu/lam) <z - w, y - z> + (mu/2)(mu/lam - gamma + mu gamma) |y - z|^2

    For a prox output z and y in C, lhs <= rhs.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    problem = query.problem
    w, lam = query.base, query.lam
    z = as_point(z, problem.dim)
    y = as_point(y, problem.dim)
    gz = float(problem.f(w, z))
    gy = float(problem.f(w, y))
    lhs = gz - max(gy, gz)
    d = y - z
    rhs = (mu / lam) * float(np.dot(z - w, d)) + 0.5 * mu * (mu / lam - gamma + mu * gamma) * float(np.dot(d, d))
    return lhs, rhs
