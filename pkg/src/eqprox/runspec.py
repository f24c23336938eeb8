"""Experiment spec files.

A spec is an INI file::

    [problem]
    family = max_type          # max_type | linear_monotone | quadratic | zero
    p = 2
    q = 99
    lo = 0
    hi = 10000

    [config]
    variant = two_step         # two_step | one_step | plain | compare
    theta = 0.25
    beta = -0.0001
    rho = 0.4
    rho_k = 1.4                # a number, or a comma list held at its last value
    lambda_k = 0.2
    epsilon_step = 0.25
    epsilon_stop = 1e-13
    max_iter = 10000

    [init]
    x_minus1 = 3210            # comma-separated components in n dimensions
    x0 = 8297
    x1 = 8297

Optional sections: ``[prox]`` (method, coarse_n, refine_tol, resolution,
bracket_lo, bracket_hi), ``[validate]`` (horizon), ``[output]`` (trace,
format), ``[sweep]`` (comma lists for theta, beta, rho_k, lambda_k) and
any number of ``[method.<name>]`` sections overriding ``[config]`` keys
for comparisons. Unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import bench
from .core import EquilibriumProblem, Interval, WholeSpace
from .params import SolverConfig, Variant
from .prox import Method
from .solver import ProxOptions

PROBLEM_KEYS = {
    "max_type": {"family", "p", "q", "lo", "hi", "known_solution"},
    "linear_monotone": {"family", "dim", "set", "lo", "hi"},
    "quadratic": {"family", "dim", "set", "lo", "hi"},
    "zero": {"family", "dim", "set", "lo", "hi"},
}
CONFIG_REQUIRED = ("theta", "beta", "rho", "rho_k", "lambda_k", "epsilon_step", "epsilon_stop")
CONFIG_KEYS = set(CONFIG_REQUIRED) | {"max_iter", "variant"}
INIT_KEYS = ("x_minus1", "x0", "x1")
PROX_KEYS = {"method", "coarse_n", "refine_tol", "resolution", "bracket_lo", "bracket_hi"}
OUTPUT_KEYS = {"trace", "format"}
SWEEP_KEYS = ("theta", "beta", "rho_k", "lambda_k")
VALIDATE_KEYS = {"horizon"}
COMPARE = "compare"


class SpecError(ValueError):
    """Malformed spec file; the message names the section and key."""


@dataclass
class RunSpec:
    path: Optional[Path]
    family: str
    problem_params: dict
    config_raw: dict
    init: tuple
    prox: ProxOptions = field(default_factory=ProxOptions)
    methods: dict = field(default_factory=dict)
    sweep: Optional[dict] = None
    horizon: int = 1
    trace_path: Optional[str] = None
    trace_format: str = "csv"

    @property
    def is_compare(self) -> bool:
        return self.config_raw.get("variant") == COMPARE

    def config(self, overrides: Optional[dict] = None) -> SolverConfig:
        raw = dict(self.config_raw)
        raw.update(overrides or {})
        if raw.get("variant") == COMPARE:
            raw["variant"] = Variant.TWO_STEP.value
        return _make_config(raw, "config")

    def method_configs(self) -> dict:
        return {name: self.config(over) for name, over in sorted(self.methods.items())}

    def build_problem(self, seed: int = 0) -> EquilibriumProblem:
        return build_problem(self.family, self.problem_params, seed)


def _number(section: str, key: str, text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise SpecError(f"[{section}] {key}: expected a number, got {text!r}") from None
    if math.isnan(v):
        raise SpecError(f"[{section}] {key}: NaN is not allowed")
    return v


def _integer(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SpecError(f"[{section}] {key}: expected an integer, got {text!r}") from None


def _numbers(section: str, key: str, text: str) -> list:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    return [_number(section, key, p) for p in parts]


def _check_keys(section: str, items: dict, allowed: set) -> None:
    for key in items:
        if key not in allowed:
            raise SpecError(f"[{section}] unknown key {key!r}; allowed: {', '.join(sorted(allowed))}")


def _config_values(section: str, items: dict) -> dict:
    out = {}
    for key, text in items.items():
        if key == "variant":
            allowed = [v.value for v in Variant] + [COMPARE]
            if text not in allowed:
                raise SpecError(f"[{section}] variant: expected one of {allowed}, got {text!r}")
            out[key] = text
        elif key == "max_iter":
            out[key] = _integer(section, key, text)
        elif key in ("rho_k", "lambda_k"):
            vals = _numbers(section, key, text)
            if not vals:
                raise SpecError(f"[{section}] {key}: empty schedule")
            out[key] = vals[0] if len(vals) == 1 else vals
        else:
            out[key] = _number(section, key, text)
    return out


def _make_config(raw: dict, section: str) -> SolverConfig:
    try:
        return SolverConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"[{section}] invalid solver parameters: {exc}") from None


def parse_spec(text: str, path: Optional[Path] = None) -> RunSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path) if path else "<spec>")
    except configparser.Error as exc:
        raise SpecError(f"parse error: {exc}") from None

    known = {"problem", "config", "init", "prox", "output", "sweep", "validate"}
    for section in cp.sections():
        if section not in known and not section.startswith("method."):
            raise SpecError(f"unknown section [{section}]")
    for required in ("problem", "config", "init"):
        if not cp.has_section(required):
            raise SpecError(f"missing section [{required}]")

    problem = dict(cp["problem"])
    family = problem.get("family")
    if family not in PROBLEM_KEYS:
        raise SpecError(f"[problem] family: expected one of {sorted(PROBLEM_KEYS)}, got {family!r}")
    _check_keys("problem", problem, PROBLEM_KEYS[family])

    config_items = dict(cp["config"])
    _check_keys("config", config_items, CONFIG_KEYS)
    for key in CONFIG_REQUIRED:
        if key not in config_items:
            raise SpecError(f"[config] missing required key {key!r}")
    config_raw = _config_values("config", config_items)

    init_items = dict(cp["init"])
    _check_keys("init", init_items, set(INIT_KEYS))
    init = []
    for key in INIT_KEYS:
        if key not in init_items:
            raise SpecError(f"[init] missing required key {key!r}")
        pt = _numbers("init", key, init_items[key])
        if not pt:
            raise SpecError(f"[init] {key}: empty point")
        init.append(np.array(pt))

    spec = RunSpec(path, family, problem, config_raw, tuple(init))

    if cp.has_section("prox"):
        items = dict(cp["prox"])
        _check_keys("prox", items, PROX_KEYS)
        kw = {}
        if "method" in items:
            try:
                kw["method"] = Method(items["method"])
            except ValueError:
                raise SpecError(f"[prox] method: unknown method {items['method']!r}") from None
        if "coarse_n" in items:
            kw["coarse_n"] = _integer("prox", "coarse_n", items["coarse_n"])
        for key in ("refine_tol", "resolution"):
            if key in items:
                kw[key] = _number("prox", key, items[key])
        if ("bracket_lo" in items) != ("bracket_hi" in items):
            raise SpecError("[prox] bracket_lo and bracket_hi must be given together")
        if "bracket_lo" in items:
            kw["bracket"] = (_number("prox", "bracket_lo", items["bracket_lo"]),
                             _number("prox", "bracket_hi", items["bracket_hi"]))
        spec.prox = ProxOptions(**kw)

    if cp.has_section("validate"):
        items = dict(cp["validate"])
        _check_keys("validate", items, VALIDATE_KEYS)
        if "horizon" in items:
            spec.horizon = _integer("validate", "horizon", items["horizon"])

    if cp.has_section("output"):
        items = dict(cp["output"])
        _check_keys("output", items, OUTPUT_KEYS)
        spec.trace_path = items.get("trace") or None
        spec.trace_format = items.get("format", "csv")
        if spec.trace_format != "csv":
            raise SpecError(f"[output] format: only 'csv' is supported, got {spec.trace_format!r}")

    if cp.has_section("sweep"):
        items = dict(cp["sweep"])
        _check_keys("sweep", items, set(SWEEP_KEYS))
        spec.sweep = {key: _numbers("sweep", key, text) for key, text in items.items()}

    for section in cp.sections():
        if section.startswith("method."):
            name = section[len("method."):]
            if not name:
                raise SpecError(f"[{section}] method name is empty")
            items = dict(cp[section])
            _check_keys(section, items, CONFIG_KEYS)
            spec.methods[name] = _config_values(section, items)

    # fail early on bad parameter values
    spec.config()
    for name, over in spec.methods.items():
        raw = dict(spec.config_raw)
        raw.update(over)
        if raw.get("variant") == COMPARE:
            raw["variant"] = Variant.TWO_STEP.value
        _make_config(raw, f"method.{name}")
    return spec


def load_spec(path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from None
    return parse_spec(text, path)


def _feasible_set(params: dict, dim: int):
    kind = params.get("set", "whole")
    if kind == "whole":
        if "lo" in params or "hi" in params:
            raise SpecError("[problem] lo/hi need set = interval")
        return WholeSpace(dim)
    if kind == "interval":
        if dim != 1:
            raise SpecError("[problem] set = interval needs dim = 1")
        try:
            return Interval(_number("problem", "lo", params.get("lo", "nan")),
                            _number("problem", "hi", params.get("hi", "nan")))
        except SpecError:
            raise SpecError("[problem] set = interval needs numeric lo and hi") from None
        except ValueError as exc:
            raise SpecError(f"[problem] {exc}") from None
    raise SpecError(f"[problem] set: expected 'whole' or 'interval', got {kind!r}")


def build_problem(family: str, params: dict, seed: int = 0) -> EquilibriumProblem:
    if family == "max_type":
        p = _integer("problem", "p", params.get("p", "2"))
        q = _integer("problem", "q", params.get("q", "99"))
        bracket = (_number("problem", "lo", params.get("lo", "0")),
                   _number("problem", "hi", params.get("hi", "10000")))
        known = params.get("known_solution", "reference")
        try:
            problem = bench.build_max_type(p, q, bracket, seed=seed)
        except ValueError as exc:
            raise SpecError(f"[problem] {exc}") from None
        if known == "reference":
            x_star, _ = bench.reference_minimizer(p, q, bracket)
            problem = replace(problem, known_solution=np.array([x_star]))
        elif known != "none":
            problem = replace(problem, known_solution=np.array([_number("problem", "known_solution", known)]))
        return problem
    dim = _integer("problem", "dim", params.get("dim", "1"))
    if dim < 1:
        raise SpecError("[problem] dim must be >= 1")
    fs = _feasible_set(params, dim)
    builder = bench.FAMILIES[family]
    return replace(builder(dim, fs), seed=seed)


def reference_point(spec: RunSpec, problem: EquilibriumProblem):
    """The family's registered reference solution, if any."""
    if spec.family == "max_type":
        p, q = problem.params["p"], problem.params["q"]
        x_star, _ = bench.reference_minimizer(p, q, problem.params["bracket"])
        return np.array([x_star])
    return problem.known_solution


def sweep_grid(spec: RunSpec) -> list:
    """Parameter combinations in lexicographic order over (theta, beta, rho_k, lambda_k)."""
    if not spec.sweep:
        raise SpecError("[sweep] section missing or empty")
    axes = []
    for key in SWEEP_KEYS:
        if key in spec.sweep:
            vals = sorted(set(spec.sweep[key]))
            if not vals:
                raise SpecError(f"[sweep] {key}: empty value list")
        else:
            base = spec.config_raw[key]
            if isinstance(base, list):
                raise SpecError(f"[sweep] {key}: list schedules cannot be swept implicitly; give values")
            vals = [base]
        axes.append(vals)
    size = math.prod(len(a) for a in axes)
    if size > 10**5:
        raise SpecError(f"[sweep] grid has {size} points; the limit is 100000")
    return [dict(zip(SWEEP_KEYS, combo)) for combo in itertools.product(*axes)]
