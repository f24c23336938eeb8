import numpy as np
import pytest

from eqprox import bench
from eqprox.params import SolverConfig
from eqprox.prox import Method
from eqprox.solver import (
    IterationRecord,
    ProxOptions,
    StopReason,
    default_alpha,
    extrapolate,
    fejer_check,
    lyapunov_constants,
    lyapunov_sequence,
    lyapunov_terms,
    relax,
    residuals,
    run,
)


def linear_config(**kw):
    base = dict(theta=0.0, beta=0.0, rho=0.0, rho_k=1.0, lambda_k=0.2, epsilon_step=0.25, epsilon_stop=1e-10)
    base.update(kw)
    return SolverConfig(**base)


class TestSteps:
    def test_no_inertia(self):
        assert extrapolate([5.0], [1.0], [0.0], 0.0, 0.0)[0] == 5.0

    def test_benchmark_start(self):
        y = extrapolate([8297.0], [8297.0], [3210.0], 0.25, -0.0001)
        assert y[0] == pytest.approx(8296.4913, abs=1e-9)

    def test_inertia_terms_cancel(self):
        assert extrapolate([2.0], [1.0], [0.0], 0.5, -0.5)[0] == 2.0

    @pytest.mark.parametrize("rho_k,expected", [(1.0, 3.0), (0.0, 1.0), (1.4, 3.8)])
    def test_relax(self, rho_k, expected):
        assert relax([1.0], [3.0], rho_k)[0] == pytest.approx(expected)


class TestDiagnostics:
    def _record(self, y, x_next, rho_k=1.0, lam=0.2):
        y, x_next = np.array([y]), np.array([x_next])
        return IterationRecord(1, y, x_next, x_next, 0.0, rho_k, lam)

    def test_no_step_has_zero_slack(self):
        check = fejer_check(self._record(2.0, 2.0), [0.0], eta=0.5)
        assert check.slack_plain == 0.0 and check.slack_damped == 0.0 and check.holds_any

    def test_violation_detected(self):
        check = fejer_check(self._record(0.1, 50.0), [0.0], eta=0.5)
        assert not check.holds_any
        assert check.slack_plain < 0 and check.slack_damped < 0

    def test_needs_solution(self):
        with pytest.raises(ValueError):
            fejer_check(self._record(1.0, 1.0), None, eta=0.5)

    def test_lyapunov_collapse(self):
        # theta = beta = 0, alpha = 1: Gamma = |x_k - x^|^2 + |x_k - x_{k-1}|^2
        x_k, x_km1, x_km2, x_hat = (np.array([v]) for v in (3.0, 1.0, -4.0, 0.5))
        gamma, gamma_bar = lyapunov_terms(x_k, x_km1, x_km2, x_hat, 0.0, 0.0, default_alpha(1.0))
        assert gamma == pytest.approx(2.5**2 + 2.0**2)
        c1, _ = lyapunov_constants(0.0, 0.0, 1.0)
        assert gamma_bar == pytest.approx(gamma + c1 * 25.0)

    def test_sequence_matches_run(self):
        problem = bench.build_linear_monotone()
        res = run(problem, linear_config(theta=0.2, beta=-0.05), ([1.0], [0.9], [0.8]))
        seq = lyapunov_sequence(res.iterates, [0.0], 0.2, -0.05, lambda k: default_alpha(1.0))
        from_trace = [(r.diagnostics.gamma_k, r.diagnostics.gamma_bar_k) for r in res.trace]
        assert np.allclose(seq[: len(from_trace)], from_trace, rtol=0, atol=1e-15)

    def test_gamma_nonnegative_on_convex_run(self):
        problem = bench.build_linear_monotone()
        res = run(problem, linear_config(), ([1.0], [1.0], [1.0]))
        assert all(r.diagnostics.gamma_k >= 0 for r in res.trace)


class TestRun:
    def test_linear_convergence(self):
        res = run(bench.build_linear_monotone(), linear_config(epsilon_stop=1e-8), ([1.0], [1.0], [1.0]))
        assert res.converged
        # stops once 0.2 |x_k| < 1e-8
        assert res.iterations == int(np.ceil(np.log(5e-8) / np.log(0.8))) + 1
        r = residuals(res)
        assert np.all(np.diff(r) < 0)

    def test_stop_at_first_step(self):
        res = run(bench.build_linear_monotone(), linear_config(), ([0.0], [0.0], [0.0]))
        assert res.iterations == 1 and res.converged
        assert res.final[0] == 0.0

    def test_max_iterations(self):
        res = run(bench.build_max_type(), linear_config(max_iter=1), ([3210.0], [8297.0], [8297.0]))
        assert res.stop_reason is StopReason.MAX_ITER and res.iterations == 1

    def test_prox_failure_stops(self):
        problem = bench.build_quadratic()
        res = run(problem, linear_config(), ([1.0], [1.0], [1.0]), prox=ProxOptions(method=Method.GRID_REFINE))
        assert res.stop_reason is StopReason.PROX_FAILURE
        assert res.iterations == 0 and "k=1" in res.message

    def test_callback_sees_every_record(self):
        seen = []
        res = run(bench.build_quadratic(2), linear_config(), ([1, 1], [1, 1], [2, -1]), on_record=seen.append)
        assert [r.k for r in seen] == [r.k for r in res.trace]

    def test_no_solution_no_diagnostics(self):
        res = run(bench.build_zero(), linear_config(), ([0.0], [1.0], [2.0]))
        assert all(r.diagnostics is None for r in res.trace)

    def test_init_length(self):
        with pytest.raises(ValueError):
            run(bench.build_zero(), linear_config(), ([0.0], [1.0]))

    def test_list_schedule(self):
        cfg = linear_config(lambda_k=[0.1, 0.2, 0.5])
        res = run(bench.build_linear_monotone(), cfg, ([1.0], [1.0], [1.0]))
        assert [r.lambda_k for r in res.trace[:4]] == [0.1, 0.2, 0.5, 0.5]
