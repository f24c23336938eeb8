import json

import pytest

from eqprox import bench
from eqprox.params import (
    DEGENERATE,
    FAIL,
    PASS,
    VACUOUS,
    AlphaBounds,
    Schedule,
    SolverConfig,
    Variant,
    alpha_bounds,
    c4_value,
    validate_all,
    validate_c1,
    validate_c2,
    validate_c3,
    validate_c4,
)


class TestSchedule:
    def test_constant(self):
        s = Schedule(0.2)
        assert s.is_constant and s(1) == s(500) == 0.2

    def test_list_holds_last(self):
        s = Schedule([1.0, 1.2, 1.4])
        assert [s(k) for k in (1, 2, 3, 9)] == [1.0, 1.2, 1.4, 1.4]
        assert not s.is_constant

    def test_callable(self):
        assert Schedule(lambda k: 1.0 / k)(4) == 0.25

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            Schedule(1.0)(0)


class TestSolverConfig:
    def test_variants_force_weights(self):
        assert SolverConfig(theta=0.3, beta=-0.1, variant="one_step").beta == 0.0
        plain = SolverConfig(theta=0.3, beta=-0.1, variant=Variant.PLAIN)
        assert plain.theta == plain.beta == 0.0

    @pytest.mark.parametrize("kw", [dict(theta=0.5), dict(theta=-0.1), dict(beta=0.01), dict(max_iter=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)


class TestAlphaBounds:
    def test_no_relaxation_small_step(self):
        b = alpha_bounds(1.0, 1e-12, 0.5)
        assert b.alpha_max == 1.0 and b.alpha_min == pytest.approx(1.0)

    def test_benchmark_values(self):
        b = alpha_bounds(1.4, 0.2, 0.5)
        assert b.alpha_max == pytest.approx(0.4285714, abs=1e-7)
        assert b.alpha_min == pytest.approx(0.1428571, abs=1e-7)

    def test_rho_two(self):
        assert alpha_bounds(2.0, 0.1, 0.5).alpha_max == 0.0

    def test_nonpositive_inputs(self):
        with pytest.raises(ValueError):
            alpha_bounds(0.0, 0.2, 0.5)


class TestConditions:
    def test_c1_vacuous_lower_bound(self):
        (e,) = validate_c1(SolverConfig(lambda_k=0.2, epsilon_step=0.25), gamma=0.1, eta=0.5, horizon=1)
        assert e.status == PASS and e.checks["lower"] == VACUOUS

    def test_c1_step_above_epsilon(self):
        (e,) = validate_c1(SolverConfig(lambda_k=2.0, epsilon_step=0.25), gamma=9.0, eta=1.0, horizon=1)
        assert e.status == FAIL
        assert e.checks["lower"] == PASS and e.checks["lambda<eps"] == FAIL and e.checks["eps<=1/(4eta)"] == PASS

    def test_c1_boundary_is_strict(self):
        (e,) = validate_c1(SolverConfig(lambda_k=0.25, epsilon_step=0.25), gamma=0.1, eta=0.5, horizon=1)
        assert e.status == FAIL

    def test_c1_per_k_for_varying_schedule(self):
        entries = validate_c1(SolverConfig(lambda_k=[0.1, 0.3]), gamma=0.1, eta=0.5, horizon=3)
        assert [e.k for e in entries] == [1, 2, 3]
        assert [e.status for e in entries] == [PASS, FAIL, FAIL]

    @pytest.mark.parametrize("rho,rho_k,status", [(0.4, 1.4, PASS), (0.0, 1.0, PASS), (0.6, 1.0, FAIL)])
    def test_c2(self, rho, rho_k, status):
        (e,) = validate_c2(SolverConfig(rho=rho, rho_k=rho_k, epsilon_step=0.25), eta=0.5, horizon=1)
        assert e.status == status

    def test_c3_no_inertia(self):
        e = validate_c3(0.0, 0.0, AlphaBounds(alpha_max=1.0, alpha_min=0.5))
        assert e.status == PASS
        assert e.values["m1"] == -1.0 and e.values["m2"] == pytest.approx(-0.25)

    def test_c3_benchmark(self):
        e = validate_c3(0.25, -0.0001, alpha_bounds(1.4, 0.2, 0.5))
        assert e.status == FAIL
        assert e.values["m1"] == pytest.approx(2.75) and e.values["m2"] == pytest.approx(0.13)

    def test_c3_degenerate(self):
        assert validate_c3(0.1, 0.0, AlphaBounds(1.0, 0.0)).status == DEGENERATE

    def test_c4_no_inertia(self):
        assert c4_value(0.0, 0.0, AlphaBounds(1.0, 0.3)) == pytest.approx(-0.3)

    def test_c4_small_theta(self):
        # 0.0001*0.5 + 0.01*(1 + 2 - 1) - 0.5
        v = c4_value(0.01, 0.0, AlphaBounds(alpha_max=1.0, alpha_min=0.5))
        assert v == pytest.approx(-0.47995, abs=1e-12)
        assert validate_c4(0.01, 0.0, AlphaBounds(1.0, 0.5)).status == PASS


class TestValidateAll:
    def test_benchmark_report(self):
        report = validate_all(bench.build_max_type(), bench.benchmark_configs()["two_step"])
        assert report.summary_flags() == {"theta": PASS, "beta": PASS, "rho": PASS,
                                          "C1": PASS, "C2": PASS, "C3": FAIL, "C4": FAIL}
        assert not report.all_passed

    def test_convex_all_pass(self):
        cfg = SolverConfig(theta=0.0, beta=0.0, rho=0.0, rho_k=1.0, lambda_k=0.05, epsilon_step=0.25)
        assert validate_all(bench.build_quadratic(), cfg, horizon=3).all_passed

    def test_horizon_zero(self):
        report = validate_all(bench.build_quadratic(), SolverConfig(), horizon=0)
        assert {e.condition for e in report.entries} == {"theta", "beta", "rho"}

    def test_serializes(self):
        report = validate_all(bench.build_max_type(), bench.benchmark_configs()["one_step"])
        data = json.loads(report.to_json())
        assert data["all_passed"] is False
        assert "overall: FAIL" in report.to_text()
