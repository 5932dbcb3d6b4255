"""Tests for the brute-force oracles."""

import pytest

from src.experiments import gen_rayleigh, preset_canonical
from src.solvers.base import (
    DegenerateChannelError,
    DomainError,
    InfeasibleScenarioError,
    OracleRefusedError,
    VerificationError,
)
from src.solvers.boundary import RateProfile, solve_boundary_point
from src.solvers.canonicalize import to_canonical
from src.solvers.model import pu_rate
from src.solvers.oracle import (
    OracleComparison,
    boundary_cost,
    brute_boundary,
    brute_single_user,
    compare_boundary,
    compare_single_user,
)
from src.solvers.single_user import SingleUserProblem


class TestSingleUserOracle:
    def test_grid_too_small(self, improper_noise_problem):
        with pytest.raises(DomainError):
            brute_single_user(improper_noise_problem, grid_n=1)

    def test_infeasible_problem(self):
        prob = SingleUserProblem.from_improper_noise(1.0, 1.0, 1.0, 1.0, 1.0, 0.0)
        assert not brute_single_user(prob, grid_n=11).feasible

    def test_improper_noise_problem(self, improper_noise_problem):
        comparison = compare_single_user(improper_noise_problem, grid_n=201)
        assert comparison.passed
        assert comparison.oracle > 0.0


class TestBoundaryOracle:
    def test_refuses_many_users(self, make_scenario):
        scenario = make_scenario((1.0,) * 4, (1.0,) * 4)
        with pytest.raises(OracleRefusedError):
            brute_boundary(RateProfile.fairness(4), scenario, grid_n=3)

    def test_refuses_expensive_grid(self, make_scenario):
        scenario = make_scenario((1.0,) * 3, (1.0,) * 3)
        profile = RateProfile.fairness(3)
        assert boundary_cost(profile, 61) > 5e8
        with pytest.raises(OracleRefusedError) as excinfo:
            brute_boundary(profile, scenario, grid_n=61)
        assert excinfo.value.cost == pytest.approx(61.0**6)

    def test_single_user_reduces_to_single_user_oracle(self, make_scenario):
        scenario = make_scenario((1.0,), (100.0,))
        prob = SingleUserProblem(
            pu_snr=scenario.pu_snr,
            gain=1.0,
            budget=100.0,
            pu_rate_target=scenario.pu_rate_target,
        )
        bound = brute_boundary(RateProfile(alpha=(1.0,)), scenario, grid_n=51)
        assert bound == pytest.approx(brute_single_user(prob, grid_n=51).best_rate, rel=1e-12)

    def test_finer_grid_never_worse(self, preset_one):
        profile = RateProfile.fairness(2)
        coarse = brute_boundary(profile, preset_one, grid_n=11)
        fine = brute_boundary(profile, preset_one, grid_n=21)
        assert fine >= coarse - 1e-9

    def test_solver_dominates(self, preset_one, preset_two):
        for scenario in (preset_one, preset_two, preset_canonical(3)):
            for profile in (RateProfile.fairness(2), RateProfile(alpha=(0.3, 0.7))):
                comparison = compare_boundary(profile, scenario, grid_n=31)
                assert comparison.passed, comparison
                assert comparison.oracle > 0.0

    @pytest.mark.slow
    def test_fine_grid_on_preset_one(self, preset_one):
        profile = RateProfile.fairness(2)
        solver = solve_boundary_point(profile, preset_one).r
        oracle = brute_boundary(profile, preset_one, grid_n=61)
        assert solver >= oracle - 1e-6

    @pytest.mark.slow
    def test_fine_grid_on_presets_and_random_scenarios(self):
        scenarios = [preset_canonical(preset) for preset in (1, 2, 3)]
        for trial in range(50):
            phys = gen_rayleigh(2, 2, seed=61, trial=trial, pu_rate_fraction=0.8)
            try:
                scenarios.append(to_canonical(phys).scenario)
            except (DegenerateChannelError, InfeasibleScenarioError):
                continue
        assert len(scenarios) >= 45
        for scenario in scenarios:
            for profile in (RateProfile.fairness(2), RateProfile(alpha=(0.3, 0.7))):
                point = solve_boundary_point(profile, scenario)
                oracle = brute_boundary(profile, scenario, grid_n=61)
                assert point.r >= 0.98 * oracle - 1e-9, (scenario, profile)
                assert pu_rate(scenario, list(point.params)) >= scenario.pu_rate_target - 1e-8


class TestComparison:
    def test_require_passed(self):
        OracleComparison(solver=1.0, oracle=1.0 + 1e-9, grid_n=3, slack=1e-6).require_passed()
        failing = OracleComparison(solver=1.0, oracle=1.1, grid_n=3, slack=1e-6)
        assert not failing.passed
        with pytest.raises(VerificationError) as excinfo:
            failing.require_passed()
        assert excinfo.value.delta == pytest.approx(-0.1)
