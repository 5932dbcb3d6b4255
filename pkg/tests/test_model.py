"""Tests for the canonical-model rate formulas."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.solvers.base import DomainError
from src.solvers.model import (
    CanonicalScenario,
    NoiseState,
    SignalParams,
    align_phases,
    beta_of,
    circularity_of_aggregate,
    pu_capacity,
    pu_rate,
    pu_rate_improper_noise,
    pu_rate_value,
    su_rate,
    su_rate_value,
)


def _one_user(target: float = 0.0) -> CanonicalScenario:
    return CanonicalScenario(
        pu_snr=100.0, interference_gains=(1.0,), budgets=(100.0,), pu_rate_target=target
    )


class TestSuRate:
    def test_zero_power(self):
        assert su_rate(SignalParams(power=0.0, circularity=0.7)) == 0.0

    def test_proper_collapses_to_capacity(self):
        assert su_rate(SignalParams(power=5.0)) == pytest.approx(math.log2(6.0))

    def test_maximally_improper(self):
        assert su_rate(SignalParams(power=5.0, circularity=1.0)) == pytest.approx(
            0.5 * math.log2(11.0)
        )

    def test_phase_does_not_matter(self):
        a = su_rate(SignalParams(power=3.0, circularity=0.4, phase=0.0))
        b = su_rate(SignalParams(power=3.0, circularity=0.4, phase=2.0))
        assert a == b

    def test_invalid_values(self):
        with pytest.raises(DomainError):
            su_rate_value(-1.0, 0.0)
        with pytest.raises(DomainError):
            su_rate_value(1.0, 1.5)
        with pytest.raises(ValidationError):
            SignalParams(power=1.0, circularity=1.2)

    @given(
        p=st.floats(min_value=0.01, max_value=100.0),
        c=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_increasing_in_power(self, p, c):
        assert su_rate_value(p * 1.1, c) > su_rate_value(p, c)

    @given(
        p=st.floats(min_value=0.01, max_value=100.0),
        c=st.floats(min_value=0.0, max_value=0.9),
    )
    def test_decreasing_in_circularity(self, p, c):
        assert su_rate_value(p, c + 0.1) < su_rate_value(p, c)


class TestPuRate:
    def test_interference_free(self):
        scenario = CanonicalScenario(
            pu_snr=100.0, interference_gains=(), budgets=(), pu_rate_target=0.0
        )
        assert pu_rate(scenario, []) == pytest.approx(math.log2(101.0))

    def test_proper_interference(self):
        rate = pu_rate(_one_user(), [SignalParams(power=10.0)])
        assert rate == pytest.approx(math.log2(111.0 / 11.0))

    def test_improper_interference(self):
        rate = pu_rate(_one_user(), [SignalParams(power=10.0, circularity=1.0)])
        assert rate == pytest.approx(0.5 * math.log2((111.0**2 - 100.0) / (11.0**2 - 100.0)))

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            pu_rate(_one_user(), [])

    @settings(max_examples=50)
    @given(
        x=st.floats(min_value=0.0, max_value=50.0),
        c=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_decreasing_in_interference_power(self, x, c):
        base = pu_rate_value(100.0, x, x * c)
        more = pu_rate_value(100.0, x + 1.0, x * c)
        assert more < base

    @settings(max_examples=50)
    @given(x=st.floats(min_value=0.5, max_value=50.0), c=st.floats(min_value=0.0, max_value=0.9))
    def test_increasing_in_complementary(self, x, c):
        assert pu_rate_value(100.0, x, x * (c + 0.1)) > pu_rate_value(100.0, x, x * c)


class TestImproperNoise:
    def test_proper_noise_matches_pu_rate(self):
        params = SignalParams(power=10.0)
        assert pu_rate_improper_noise(100.0, 1.0, params, NoiseState.proper()) == pytest.approx(
            pu_rate(_one_user(), [params])
        )

    def test_zero_gain(self):
        noise = NoiseState(total_variance=6.0, complementary_magnitude=2.5)
        rate = pu_rate_improper_noise(100.0, 0.0, SignalParams(power=7.0, circularity=0.3), noise)
        assert rate == pytest.approx(0.5 * math.log2((106.0**2 - 2.5**2) / (6.0**2 - 2.5**2)))

    def test_improper_noise_direct_evaluation(self):
        noise = NoiseState(total_variance=6.0, complementary_magnitude=2.5)
        rate = pu_rate_improper_noise(100.0, 1.0, SignalParams(power=10.0, circularity=0.5), noise)
        variance, comp = 16.0, 2.5 + 5.0
        expected = 0.5 * math.log2(((100.0 + variance) ** 2 - comp**2) / (variance**2 - comp**2))
        assert rate == pytest.approx(expected)

    def test_negative_gain(self):
        with pytest.raises(DomainError):
            pu_rate_improper_noise(100.0, -1.0, SignalParams(power=1.0), NoiseState.proper())

    def test_noise_state_validation(self):
        with pytest.raises(ValidationError):
            NoiseState(total_variance=2.0, complementary_magnitude=1.5)
        with pytest.raises(ValidationError):
            NoiseState(total_variance=0.5)

    def test_noise_decomposition(self):
        noise = NoiseState(total_variance=6.0, complementary_magnitude=2.5)
        assert noise.improper_power == pytest.approx(5.0)
        assert noise.improper_circularity == pytest.approx(0.5)
        assert NoiseState.proper().improper_circularity == 0.0

    def test_plus_interference(self):
        noise = NoiseState.proper().plus_interference(4.0, 2.0)
        assert noise.total_variance == pytest.approx(5.0)
        assert noise.complementary_magnitude == pytest.approx(2.0)


class TestPhases:
    def test_already_aligned(self):
        params = [SignalParams(power=1.0, circularity=0.5), SignalParams(power=2.0)]
        assert align_phases(params) == params

    def test_alignment_never_hurts_the_pu(self):
        scenario = CanonicalScenario(
            pu_snr=100.0, interference_gains=(0.5, 0.9), budgets=(10.0, 10.0), pu_rate_target=0.0
        )
        params = [
            SignalParams(power=3.0, circularity=0.8, phase=0.3),
            SignalParams(power=5.0, circularity=0.6, phase=-1.1),
        ]
        aligned = align_phases(params)
        assert all(s.phase == 0.0 for s in aligned)
        assert pu_rate(scenario, aligned) >= pu_rate(scenario, params)

    def test_aligned_phase_is_best_on_a_grid(self):
        scenario = CanonicalScenario(
            pu_snr=100.0, interference_gains=(0.5, 0.9), budgets=(10.0, 10.0), pu_rate_target=0.0
        )
        first = SignalParams(power=3.0, circularity=0.8)
        rates = [
            pu_rate(scenario, [first, SignalParams(power=5.0, circularity=0.6, phase=phi)])
            for phi in np.linspace(-math.pi + 1e-9, math.pi, 73)
        ]
        aligned = pu_rate(scenario, [first, SignalParams(power=5.0, circularity=0.6)])
        assert aligned >= max(rates) - 1e-12

    def test_single_user_rotation(self):
        scenario = _one_user()
        a = pu_rate(scenario, [SignalParams(power=4.0, circularity=0.7, phase=1.0)])
        b = pu_rate(scenario, align_phases([SignalParams(power=4.0, circularity=0.7, phase=1.0)]))
        assert a == pytest.approx(b)


class TestScenario:
    def test_beta(self):
        assert beta_of(100.0, 0.0) == -math.inf
        assert beta_of(3.0, 1.0) == pytest.approx(0.0)
        assert pu_capacity(3.0) == pytest.approx(2.0)

    def test_target_above_capacity(self):
        with pytest.raises(ValidationError):
            CanonicalScenario(
                pu_snr=3.0, interference_gains=(1.0,), budgets=(1.0,), pu_rate_target=2.1
            )

    def test_mismatched_lengths(self):
        with pytest.raises(ValidationError):
            CanonicalScenario(
                pu_snr=3.0, interference_gains=(1.0, 1.0), budgets=(1.0,), pu_rate_target=1.0
            )

    def test_with_budgets(self):
        scenario = _one_user().with_budgets([3.0])
        assert scenario.budgets == (3.0,)

    def test_aggregate_circularity(self):
        assert circularity_of_aggregate([SignalParams(power=0.0)], [1.0]) == 0.0
        params = [SignalParams(power=1.0, circularity=1.0), SignalParams(power=2.0, circularity=1.0)]
        assert circularity_of_aggregate(params, [1.0, 1.0]) == pytest.approx(1.0)
        mixed = [SignalParams(power=1.0, circularity=1.0), SignalParams(power=1.0)]
        assert circularity_of_aggregate(mixed, [1.0, 1.0]) == pytest.approx(0.5)
