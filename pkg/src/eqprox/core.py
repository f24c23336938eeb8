"""Problem model: points, feasible sets, bifunctions and norm identities.

Points are plain 1-D ``float64`` numpy arrays. Scalars are promoted to
arrays of length one so that the 1-D benchmark problems and n-dimensional
problems share a single code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np

from . import constants

Bifunction = Callable[[np.ndarray, np.ndarray], float]


class DimensionError(ValueError):
    """Raised when a point does not have the dimension of its problem."""


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Convert `x` to a finite 1-D float array, checking `dim` if given."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"a point must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError("a point needs at least one component")
    if dim is not None and arr.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point has non-finite components: {arr}")
    return arr


def _common_dim(*points: np.ndarray) -> int:
    dims = {p.size for p in points}
    if len(dims) != 1:
        raise DimensionError(f"points have mismatched dimensions {sorted(dims)}")
    return dims.pop()


# --------------------------------------------------------------------------
# feasible sets


@dataclass(frozen=True)
class WholeSpace:
    """C = R^dim."""

    dim: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def residual(self, x: np.ndarray) -> float:
        as_point(x, self.dim)
        return 0.0

    def project(self, x: np.ndarray) -> np.ndarray:
        return as_point(x, self.dim).copy()

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(scale=10.0, size=(n, self.dim))

    @property
    def bracket(self):
        return None


@dataclass(frozen=True)
class Interval:
    """C = [lo, hi] in one dimension.

    ``hi = inf`` is accepted only with ``allow_unbounded=True``; the grid
    prox then needs an explicit search bracket.
    """

    lo: float
    hi: float
    allow_unbounded: bool = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or not math.isfinite(lo):
            raise ValueError(f"invalid interval bounds ({lo}, {hi})")
        if not math.isfinite(hi) and not (hi > 0 and self.allow_unbounded):
            raise ValueError("an infinite upper bound requires allow_unbounded=True")
        if not lo < hi:
            raise ValueError(f"interval needs lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    dim = 1

    def residual(self, x: np.ndarray) -> float:
        v = as_point(x, 1)[0]
        return max(0.0, self.lo - v, v - self.hi)

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(as_point(x, 1), self.lo, self.hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if math.isfinite(self.hi):
            pts = rng.uniform(self.lo, self.hi, size=n)
        else:
            pts = self.lo + rng.exponential(scale=10.0, size=n)
        return pts.reshape(n, 1)

    @property
    def bracket(self):
        if math.isfinite(self.hi):
            return (self.lo, self.hi)
        return None


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """C = {x : A x = b}; consistency is checked by least squares."""

    A: Any
    b: Any

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape[0] != b.size:
            raise DimensionError(f"A has {A.shape[0]} rows but b has {b.size} entries")
        x_p, *_ = np.linalg.lstsq(A, b, rcond=None)
        if np.linalg.norm(A @ x_p - b) > constants.AFFINE_CONSISTENCY_TOL:
            raise ValueError("inconsistent affine system: A x = b has no solution")
        # orthonormal basis of ker A for sampling
        _, s, vt = np.linalg.svd(A)
        rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_particular", x_p)
        object.__setattr__(self, "_null", vt[rank:].T)
        object.__setattr__(self, "_pinv", np.linalg.pinv(A))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def residual(self, x: np.ndarray) -> float:
        x = as_point(x, self.dim)
        return float(np.linalg.norm(self.A @ x - self.b))

    def project(self, x: np.ndarray) -> np.ndarray:
        x = as_point(x, self.dim)
        return x - self._pinv @ (self.A @ x - self.b)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        k = self._null.shape[1]
        coeffs = rng.normal(scale=10.0, size=(n, k))
        return self._particular + coeffs @ self._null.T

    @property
    def bracket(self):
        return None


FeasibleSet = Union[WholeSpace, Interval, AffineSubspace]


def membership_residual(feasible_set: FeasibleSet, x) -> float:
    """Distance-like infeasibility of `x`: 0 on the set, positive off it."""
    return float(feasible_set.residual(as_point(x)))


# --------------------------------------------------------------------------
# problems


@dataclass(frozen=True, eq=False)
class EquilibriumProblem:
    """Find x in C with f(x, y) >= 0 for all y in C.

    Parameters
    ----------
    f : callable
        Bifunction ``f(x, y) -> float`` on points of the set's dimension.
    feasible_set : WholeSpace, Interval or AffineSubspace
    eta : float
        Lipschitz-type constant: f(x,z) - f(x,y) - f(y,z) <= eta (|x-y|^2 + |y-z|^2).
    gamma : float
        Strong quasiconvexity modulus of f(x, .).
    known_solution : array_like, optional
        A point of the solution set, used only by diagnostics.
    f_scan : callable, optional
        Vectorized ``f_scan(x, ys)`` for 1-D problems, evaluating f(x, y)
        for every scalar in the array `ys`. Used by grid searches.
    closed_form_prox : callable, optional
        ``closed_form_prox(w, lam) -> z`` returning a minimizer of
        f(w, .) + |. - w|^2 / (2 lam) over the feasible set.
    lower_bound : callable, optional
        ``lower_bound(w)`` with f(w, y) >= lower_bound(w) for all y in C.
        Lets the brute-force oracle shrink its scan window.
    breakpoints : tuple of float
        Abscissae where f(w, .) is not differentiable (1-D only).
    """

    f: Bifunction
    feasible_set: FeasibleSet
    eta: float
    gamma: float
    known_solution: Optional[np.ndarray] = None
    name: str = "custom"
    f_scan: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    closed_form_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    lower_bound: Optional[Callable[[np.ndarray], float]] = None
    breakpoints: tuple = ()
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.known_solution is not None:
            object.__setattr__(self, "known_solution", as_point(self.known_solution, self.dim))
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        self._check_diagonal()

    def _check_diagonal(self):
        rng = np.random.default_rng(self.seed)
        for x in self.feasible_set.sample(rng, constants.DIAGONAL_SAMPLES):
            v = float(self.f(x, x))
            if not abs(v) <= constants.DIAGONAL_TOL:
                raise ValueError(f"bifunction does not vanish on the diagonal: f(x, x) = {v} at x = {x}")

    @property
    def dim(self) -> int:
        return self.feasible_set.dim


def eval_bifunction(problem: EquilibriumProblem, x, y) -> float:
    """Return f(x, y) after checking both points against the problem dimension."""
    x = as_point(x, problem.dim)
    y = as_point(y, problem.dim)
    return float(problem.f(x, y))


# --------------------------------------------------------------------------
# norm identities used by the convergence diagnostics


def _sq(v: np.ndarray) -> float:
    return float(np.dot(v, v))


def identity_a(x, y, z, a: float, b: float) -> tuple[float, float]:
    """Both sides of the expansion of |(1+a)x - (a-b)y - b z|^2."""
    x, y, z = as_point(x), as_point(y), as_point(z)
    _common_dim(x, y, z)
    lhs = _sq((1 + a) * x - (a - b) * y - b * z)
    rhs = (
        (1 + a) * _sq(x)
        - (a - b) * _sq(y)
        - b * _sq(z)
        + (1 + a) * (a - b) * _sq(x - y)
        + b * (1 + a) * _sq(x - z)
        - b * (a - b) * _sq(y - z)
    )
    return lhs, rhs


def identity_b(x, y, z) -> tuple[float, float]:
    """<x - z, y - x> and its expression through three squared distances."""
    x, y, z = as_point(x), as_point(y), as_point(z)
    _common_dim(x, y, z)
    lhs = float(np.dot(x - z, y - x))
    rhs = 0.5 * _sq(z - y) - 0.5 * _sq(x - z) - 0.5 * _sq(y - x)
    return lhs, rhs


def identity_c(x, y, beta: float) -> tuple[float, float]:
    x, y = as_point(x), as_point(y)
    _common_dim(x, y)
    lhs = _sq(beta * x + (1 - beta) * y)
    rhs = beta * _sq(x) + (1 - beta) * _sq(y) - beta * (1 - beta) * _sq(x - y)
    return lhs, rhs


def identity_holds(lhs: float, rhs: float, tol: float = constants.IDENTITY_TOL) -> bool:
    return abs(lhs - rhs) <= tol * (1 + abs(lhs))
