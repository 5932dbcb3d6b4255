"""Tests for presets, channel generation and the Monte Carlo studies."""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import spearmanr

from src.experiments import (
    ExperimentConfig,
    gen_rayleigh,
    preset_canonical,
    preset_scenario,
    random_single_user_problem,
    run_experiment,
    run_manifest,
    sumrate_vs_budget,
    sumrate_vs_users,
)
from src.solvers.base import DomainError
from src.solvers.canonicalize import to_canonical
from src.solvers.single_user import SingleUserProblem, solve_p_in


class TestPresets:
    def test_published_gains(self):
        assert preset_canonical(1).interference_gains == (0.52, 0.89)
        assert preset_canonical(3, "swapped").interference_gains == (1.684, 0.028)

    def test_budgets_follow_the_gain_budget_product(self):
        scenario = preset_canonical(1)
        phys = preset_scenario(1)
        products = np.array(scenario.interference_gains) * np.array(scenario.budgets)
        assert np.allclose(products, 100.0 * np.abs(phys.su_cross) ** 2)
        assert scenario.budgets == pytest.approx((10.0, 10.0), rel=1e-2)

    def test_target_and_beta(self, preset_one):
        assert preset_one.pu_rate_target == pytest.approx(5.33, abs=5e-3)
        assert preset_one.beta == pytest.approx(0.94, abs=5e-3)

    def test_swapped_order(self):
        assert preset_scenario(2, "swapped").decode_order == (1, 2)
        assert preset_scenario(2).decode_order is None

    def test_unknown_preset_or_order(self):
        with pytest.raises(DomainError):
            preset_scenario(4)
        with pytest.raises(DomainError):
            preset_canonical(1, "reversed")


class TestRayleigh:
    def test_reproducible(self):
        a = gen_rayleigh(3, 4, seed=11, trial=5)
        b = gen_rayleigh(3, 4, seed=11, trial=5)
        assert np.array_equal(a.su_direct_matrix, b.su_direct_matrix)
        assert a.pu_direct == b.pu_direct

    def test_trials_are_independent_streams(self):
        a = gen_rayleigh(3, 4, seed=11, trial=0)
        b = gen_rayleigh(3, 4, seed=11, trial=1)
        assert not np.allclose(a.su_direct_matrix, b.su_direct_matrix)

    def test_zeroing_keeps_the_other_draws(self):
        plain = gen_rayleigh(2, 3, seed=3)
        zeroed = gen_rayleigh(2, 3, seed=3, zero_pu_cross=True)
        assert not np.any(zeroed.pu_to_bs)
        assert np.array_equal(plain.su_direct_matrix, zeroed.su_direct_matrix)

    def test_unit_variance(self):
        phys = gen_rayleigh(100, 1000, seed=2017)
        assert np.mean(np.abs(phys.su_direct_matrix) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_fewer_antennas_than_users(self):
        with pytest.raises(DomainError):
            gen_rayleigh(3, 2, seed=0)

    def test_random_single_user_problems_are_feasible(self):
        for trial in range(20):
            assert random_single_user_problem(5, trial).feasible


class TestExperimentConfig:
    def test_presets(self):
        fig7 = ExperimentConfig.fig7()
        assert fig7.num_users == fig7.num_antennas == 4
        assert fig7.alpha == (0.27, 0.13, 0.09, 0.51)
        assert len(fig7.budgets) == 9
        fig8 = ExperimentConfig.fig8()
        assert fig8.alpha is None
        assert fig8.zero_pu_cross
        assert fig8.budgets == (100.0,)

    def test_validation(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.fig7(num_users=4, num_antennas=3)
        with pytest.raises(ValidationError):
            ExperimentConfig.fig7(num_users=2, num_antennas=2)
        with pytest.raises(ValidationError):
            ExperimentConfig.fig8(user_counts=(0, 1))

    def test_manifest(self):
        config = ExperimentConfig.fig8(trials=3, seed=9)
        manifest = run_manifest(config, "fig8")
        assert manifest["experiment"] == "fig8"
        assert manifest["seed"] == 9
        assert manifest["config"]["trials"] == 3
        assert "git" in manifest and "version" in manifest


def _small_fig7(**overrides):
    values = dict(
        num_users=2, num_antennas=2, alpha=(0.5, 0.5), trials=2, budgets=(1.0, 100.0)
    )
    values.update(overrides)
    return ExperimentConfig.fig7(**values)


class TestSumRate:
    def test_budget_sweep(self):
        curve = sumrate_vs_budget(_small_fig7())
        assert [p.level for p in curve.points] == [1.0, 100.0]
        for point in curve.points:
            assert point.trials + point.infeasible_trials == 2
            assert point.igs_mean >= point.pgs_mean - 1e-8
        assert curve.points[1].igs_mean >= curve.points[0].igs_mean

    def test_deterministic(self):
        first = sumrate_vs_budget(_small_fig7(trials=1))
        second = sumrate_vs_budget(_small_fig7(trials=1))
        assert first.points == second.points

    def test_single_user_point_matches_closed_form(self):
        config = ExperimentConfig.fig8(trials=1, user_counts=(1,))
        curve = sumrate_vs_users(config)
        scenario = to_canonical(
            gen_rayleigh(1, 1, config.seed, zero_pu_cross=True, trial=0, pu_rate_fraction=0.8)
        ).scenario
        solution = solve_p_in(
            SingleUserProblem(
                pu_snr=scenario.pu_snr,
                gain=scenario.interference_gains[0],
                budget=100.0,
                pu_rate_target=scenario.pu_rate_target,
            )
        )
        assert curve.points[0].igs_mean == pytest.approx(solution.achieved_su_rate, abs=1e-6)

    def test_run_experiment_dispatch(self):
        curve = run_experiment(ExperimentConfig.fig8(trials=1, user_counts=(1, 2)))
        assert [p.num_users for p in curve.points] == [1, 2]
        assert all(p.igs_per_user <= p.igs_mean for p in curve.points)

    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self):
        serial = sumrate_vs_budget(_small_fig7(trials=4))
        parallel = sumrate_vs_budget(_small_fig7(trials=4, workers=2))
        assert serial.points == parallel.points

    @pytest.mark.slow
    def test_fairness_sum_rate_grows_with_users(self):
        curve = sumrate_vs_users(ExperimentConfig.fig8(trials=20, user_counts=(1, 2, 3)))
        for point in curve.points:
            assert point.igs_mean >= point.pgs_mean - 1e-8
            assert point.infeasible_trials == 0


@pytest.mark.slow
class TestPublishedTrends:
    def test_budget_sweep_gain_and_saturation(self):
        curve = sumrate_vs_budget(ExperimentConfig.fig7(trials=200))
        assert 2.0 <= curve.points[-1].ratio <= 4.0
        for before, after in zip(curve.points, curve.points[1:]):
            assert after.igs_mean >= before.igs_mean - 2.0 * after.igs_stderr
            assert after.pgs_mean >= before.pgs_mean - 2.0 * after.pgs_stderr

    def test_per_user_gap_grows_with_users(self):
        curve = sumrate_vs_users(ExperimentConfig.fig8(trials=200))
        gaps = [p.igs_per_user - p.pgs_per_user for p in curve.points]
        trend = spearmanr([p.num_users for p in curve.points], gaps)
        assert trend.statistic > 0.0
        assert trend.pvalue < 0.05
