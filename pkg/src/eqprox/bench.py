"""Benchmark problem families and the method comparison.

Families
--------
max_type
    f(x, y) = p g(y) - p g(x) with g(t) = max(sqrt|t|, (t - q)^2 - q).
    Non-convex; the inner prox is solved by the 1-D grid search.
linear_monotone
    f(x, y) = <x, y - x>, monotone, solution 0, closed-form prox.
quadratic
    f(x, y) = |y|^2/2 - |x|^2/2, strongly convex in y, closed-form prox.
zero
    f = 0; the prox is the projection onto C.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .core import EquilibriumProblem, Interval, WholeSpace
from .params import SolverConfig, Variant
from .prox import ProxQuery, brute_force_prox_oracle
from .solver import ProxOptions, RunResult, StopReason, run

# Reported values for the max-type experiment (p=2, q=99), kept for side by
# side comparison only. They are not minimizers under the symmetric reading.
REPORTED_RESULTS = {
    "two_step": {"final": 79.1999999999766, "iterations": 152, "time": 0.029584646224975586},
    "one_step": {"final": 79.199999999986, "iterations": 313, "time": 0.04530167579650879},
}
# listed among the experiment parameters but used by no formula
UNUSED_ALPHA_SETTING = "1/29 - epsilon"

MAX_TYPE_SETUP = {
    "p": 2,
    "q": 99,
    "theta": 0.25,
    "beta": -0.0001,
    "rho": 0.4,
    "rho_k": 1.4,
    "lambda_k": 0.2,
    "epsilon_step": 0.25,
    "epsilon_stop": 1e-13,
    "x_init": (3210.0, 8297.0, 8297.0),
    "bracket": (0.0, 10000.0),
}

DELTA_MARGIN = 1e-6


def bisect_root(fn, lo: float, hi: float, tol: float = 1e-10, max_steps: int = 200) -> tuple[float, int]:
    """Bisection for a sign change of `fn` on [lo, hi].

    Stops when the bracket is narrower than `tol` or stops shrinking in
    floating point. Returns ``(root, steps)``.
    """
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0:
        return lo, 0
    if f_hi == 0:
        return hi, 0
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")
    steps = 0
    while hi - lo > tol and steps < max_steps:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        steps += 1
        if f_mid == 0:
            return mid, steps
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), steps


def delta_residual(y: float, p: float, q: float) -> float:
    return p * (y - q) ** 2 - math.sqrt(abs(y)) - p * q


def delta_bracket(p: int, q: int) -> tuple[float, float]:
    """Sign-change bracket for delta_residual: negative at q, positive at
    the upper end since p (y - q)^2 there exceeds p q + sqrt(y)."""
    if not (p > 1 and q > 1):
        raise ValueError("p and q must exceed 1")
    return float(q), q + 2.0 * math.sqrt(q + math.sqrt(q) / p) + 10.0


def solve_delta(p: int, q: int, tol: float = 1e-10) -> float:
    """Positive root of p (y - q)^2 - sqrt(y) = p q."""
    lo, hi = delta_bracket(p, q)
    root, _ = bisect_root(lambda y: delta_residual(y, p, q), lo, hi, tol)
    return root


def max_type_g(t, q: float):
    """g(t) = max(sqrt|t|, (t - q)^2 - q), elementwise."""
    t = np.asarray(t, dtype=float)
    return np.maximum(np.sqrt(np.abs(t)), (t - q) ** 2 - q)


def max_type_g_literal(t, q: float):
    """The x-argument text read literally, with the comma missing: a product
    inside a one-element max. Kept to show why that reading is rejected."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.abs(t)) * ((t - q) ** 2 - q)


def max_type_breakpoints(q: float) -> tuple[float, float]:
    """The two abscissae where sqrt(t) and (t - q)^2 - q cross (t > 0)."""
    phi = lambda t: (t - q) ** 2 - q - math.sqrt(t)
    left, _ = bisect_root(phi, 0.0, float(q), tol=0.0)
    right, _ = bisect_root(phi, float(q), 2.0 * q + 1.0, tol=0.0)
    return left, right


@dataclass(frozen=True)
class MaxTypeProblem:
    p: int
    q: int
    delta: float
    gamma: float
    eta: float
    bracket: tuple

    def g(self, t):
        return max_type_g(t, self.q)


def max_type_params(p: int, q: int, bracket: tuple = MAX_TYPE_SETUP["bracket"]) -> MaxTypeProblem:
    delta0 = solve_delta(p, q)
    delta = delta0 * (1.0 + DELTA_MARGIN)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (lo <= 0.0 and hi >= delta and math.isfinite(hi)):
        raise ValueError(f"bracket ({lo}, {hi}) must contain [0, delta] = [0, {delta:.6g}]")
    return MaxTypeProblem(p, q, delta, 1.0 / (2.0 * delta**1.5), 0.5, (lo, hi))


def build_max_type(
    p: int = 2,
    q: int = 99,
    bracket: tuple = MAX_TYPE_SETUP["bracket"],
    reading: str = "A",
    known_solution=None,
    seed: int = 0,
) -> EquilibriumProblem:
    """Max-type bifunction on C = Interval(bracket).

    Reading "A" uses the symmetric g in both arguments. Reading "B" takes
    the first argument's printed formula literally; it does not vanish on
    the diagonal, so construction fails with ValueError.
    """
    params = max_type_params(p, q, bracket)
    if reading == "A":
        g_x = g_y = max_type_g
    elif reading == "B":
        g_x, g_y = max_type_g_literal, max_type_g
    else:
        raise ValueError(f"unknown reading {reading!r}")

    def f(x, y):
        return float(p * g_y(y[0], q) - p * g_x(x[0], q))

    def f_scan(x, ys):
        return p * g_y(ys, q) - p * g_x(x[0], q)

    def lower_bound(w):
        # g >= 0
        return -p * float(g_x(w[0], q))

    try:
        return EquilibriumProblem(
            f=f,
            feasible_set=Interval(*params.bracket),
            eta=params.eta,
            gamma=params.gamma,
            known_solution=known_solution,
            name="max_type",
            f_scan=f_scan,
            lower_bound=lower_bound,
            breakpoints=max_type_breakpoints(q),
            params={"p": p, "q": q, "delta": params.delta, "reading": reading, "bracket": params.bracket},
            seed=seed,
        )
    except ValueError as exc:
        if reading == "B":
            raise ValueError(f"reading B is not an equilibrium bifunction: {exc}") from exc
        raise


def reference_minimizer(p: int, q: int, bracket: tuple = MAX_TYPE_SETUP["bracket"], resolution: float = 1e-3):
    """argmin of g over the bracket: dense scan, then scipy's golden-section
    search bracketed by the best grid point and its neighbours. This solves
    the max-type problem, since f(x, y) >= 0 for all y exactly when x
    minimizes g.

    Returns ``(x_star, g_star)``; p only scales f and does not move the minimizer.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    n = int(math.ceil((hi - lo) / resolution))
    xs = np.linspace(lo, hi, n + 1)
    gv = max_type_g(xs, q)
    i = int(np.argmin(gv))
    if 0 < i < n:
        x_ref = optimize.golden(
            lambda t: float(max_type_g(t, q)), brack=(xs[i - 1], xs[i], xs[i + 1]), tol=1e-15, maxiter=2000
        )
        g_ref = float(max_type_g(x_ref, q))
        if g_ref <= gv[i]:
            return float(x_ref), g_ref
    return float(xs[i]), float(gv[i])


def prox_fixed_point_oracle(problem: EquilibriumProblem, lam: float, candidate: float, resolution: float = 1e-6):
    """Brute-force prox at `candidate`; returns ``(z, is_fixed)`` where
    is_fixed means |z - candidate| <= resolution."""
    res = brute_force_prox_oracle(ProxQuery(np.array([candidate]), lam, problem), resolution)
    z = float(res.minimizer[0])
    return z, abs(z - candidate) <= resolution


# --------------------------------------------------------------------------
# convex control families


def _set_or_whole(feasible_set, dim: int):
    return feasible_set if feasible_set is not None else WholeSpace(dim)


def build_linear_monotone(dim: int = 1, feasible_set=None) -> EquilibriumProblem:
    """f(x, y) = <x, y - x>; f(x, y) + f(y, x) = -|x - y|^2 <= 0.

    f(x, .) is linear, so gamma is nominal here; eta = 1/2 holds exactly.
    """
    fs = _set_or_whole(feasible_set, dim)

    def f(x, y):
        return float(np.dot(x, y - x))

    def f_scan(x, ys):
        return x[0] * (ys - x[0])

    def closed_form(w, lam):
        return fs.project(w - lam * w)

    def interval_lower_bound(w):
        # f(w, .) is linear, so its minimum over [lo, hi] sits at an endpoint
        w0 = float(w[0])
        return min(w0 * (fs.lo - w0), w0 * (fs.hi - w0))

    bounded = isinstance(fs, Interval) and fs.bracket is not None
    lower_bound = interval_lower_bound if bounded else None

    return EquilibriumProblem(
        f=f, feasible_set=fs, eta=0.5, gamma=1.0,
        known_solution=np.zeros(fs.dim), name="linear_monotone",
        f_scan=f_scan if fs.dim == 1 else None,
        closed_form_prox=closed_form, lower_bound=lower_bound,
    )


def build_quadratic(dim: int = 1, feasible_set=None) -> EquilibriumProblem:
    """f(x, y) = |y|^2/2 - |x|^2/2; f(x, .) is strongly convex with modulus 1."""
    fs = _set_or_whole(feasible_set, dim)

    def f(x, y):
        return 0.5 * float(np.dot(y, y)) - 0.5 * float(np.dot(x, x))

    def f_scan(x, ys):
        return 0.5 * ys**2 - 0.5 * x[0] ** 2

    def closed_form(w, lam):
        # the objective is isotropic, so projecting the free minimizer is exact
        return fs.project(w / (1.0 + lam))

    def lower_bound(w):
        return -0.5 * float(np.dot(w, w))

    solution = fs.project(np.zeros(fs.dim))
    return EquilibriumProblem(
        f=f, feasible_set=fs, eta=0.5, gamma=1.0,
        known_solution=solution, name="quadratic",
        f_scan=f_scan if fs.dim == 1 else None,
        closed_form_prox=closed_form, lower_bound=lower_bound,
    )


def build_zero(dim: int = 1, feasible_set=None) -> EquilibriumProblem:
    fs = _set_or_whole(feasible_set, dim)
    return EquilibriumProblem(
        f=lambda x, y: 0.0, feasible_set=fs, eta=0.5, gamma=1.0, name="zero",
        f_scan=(lambda x, ys: np.zeros_like(ys)) if fs.dim == 1 else None,
        closed_form_prox=lambda w, lam: fs.project(w),
        lower_bound=lambda w: 0.0,
    )


FAMILIES = {
    "max_type": build_max_type,
    "linear_monotone": build_linear_monotone,
    "quadratic": build_quadratic,
    "zero": build_zero,
}


# --------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    final: np.ndarray
    iterations: int
    wall_time: float
    stop_reason: str


def compare_methods(
    problem: EquilibriumProblem,
    configs: Union[Mapping[str, SolverConfig], Sequence[tuple]],
    x_init: Sequence,
    prox: Optional[ProxOptions] = None,
    jobs: int = 1,
) -> list:
    """Run every named config on the same problem and start; rows sorted by name."""
    items = list(configs.items()) if isinstance(configs, Mapping) else list(configs)

    def one(item):
        name, cfg = item
        result: RunResult = run(problem, cfg, x_init, prox=prox, keep_trace=False)
        return ComparisonRow(name, result.final, result.iterations, result.wall_time, result.stop_reason.value)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(item) for item in items]
    return sorted(rows, key=lambda r: r.method)


def benchmark_configs() -> dict:
    s = MAX_TYPE_SETUP
    common = dict(
        theta=s["theta"], rho=s["rho"], rho_k=s["rho_k"], lambda_k=s["lambda_k"],
        epsilon_step=s["epsilon_step"], epsilon_stop=s["epsilon_stop"],
    )
    return {
        "two_step": SolverConfig(beta=s["beta"], variant=Variant.TWO_STEP, **common),
        "one_step": SolverConfig(beta=0.0, variant=Variant.ONE_STEP, **common),
    }


def benchmark_problem(with_reference: bool = True) -> EquilibriumProblem:
    s = MAX_TYPE_SETUP
    problem = build_max_type(s["p"], s["q"], s["bracket"])
    if with_reference:
        x_star, _ = reference_minimizer(s["p"], s["q"], s["bracket"])
        problem = replace(problem, known_solution=np.array([x_star]))
    return problem


def reproduction_report(rows: Sequence[ComparisonRow], oracle_x: Optional[float] = None) -> str:
    """Text table of our runs next to the reported reference values."""
    lines = [f"{'method':<10} {'final':>22} {'iters':>6} {'stop':<24} {'reported final':>18} {'reported iters':>11}"]
    for r in rows:
        reported = REPORTED_RESULTS.get(r.method)
        pf = f"{reported['final']:.15g}" if reported else "-"
        pi = str(reported["iterations"]) if reported else "-"
        fin = " ".join(f"{v:.17g}" for v in np.atleast_1d(r.final))
        lines.append(f"{r.method:<10} {fin:>22} {r.iterations:>6} {r.stop_reason:<24} {pf:>18} {pi:>11}")
    if oracle_x is not None:
        lines.append(f"{'oracle':<10} {oracle_x:>22.17g} {'-':>6} {'reference minimizer':<24} {'-':>18} {'-':>11}")
    return "\n".join(lines)


def converged(row: ComparisonRow) -> bool:
    return row.stop_reason == StopReason.RESIDUAL.value
