"""Tests for the ZF-SIC reduction to the canonical model."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.experiments import gen_rayleigh, preset_scenario
from src.solvers.base import DegenerateChannelError, DomainError, InfeasibleScenarioError
from src.solvers.canonicalize import (
    PhysicalScenario,
    capacity_fraction_target,
    qr_decompose,
    to_canonical,
)


def _invariant(phys: PhysicalScenario) -> np.ndarray:
    """a_k P_k expected for any normalization: P'_k |g_k|^2 / sigma^2."""
    return np.array(phys.su_budgets) * np.abs(phys.su_cross) ** 2 / phys.pu_noise_var


class TestQr:
    def test_identity(self):
        Q, R = qr_decompose(np.eye(2))
        assert np.allclose(Q, np.eye(2))
        assert np.allclose(R, np.eye(2))

    def test_diagonal_with_phase(self):
        H = np.array([[2.0, 0.0], [0.0, 3.0j]])
        Q, R = qr_decompose(H)
        assert np.allclose(np.diag(R), [2.0, 3.0])
        assert np.allclose(Q, np.diag([1.0, 1.0j]))
        assert np.allclose(Q @ R, H)

    def test_random_reconstruction(self, rng):
        H = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        Q, R = qr_decompose(H)
        assert np.linalg.norm(H - Q @ R) <= 1e-10 * np.linalg.norm(H)
        assert np.allclose(Q.conj().T @ Q, np.eye(3))
        assert np.all(np.diag(R).real > 0.0)
        assert np.allclose(np.diag(R).imag, 0.0)
        assert np.allclose(np.tril(R, -1), 0.0)

    def test_rank_deficient(self):
        H = np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex)
        with pytest.raises(DegenerateChannelError) as excinfo:
            qr_decompose(H)
        assert excinfo.value.column == 1


class TestToCanonical:
    def test_preset_one_target_and_beta(self, preset_one_physical):
        scenario = to_canonical(preset_one_physical).scenario
        assert scenario.pu_rate_target == pytest.approx(5.33, abs=5e-3)
        assert scenario.beta == pytest.approx(0.94, abs=5e-3)

    @pytest.mark.parametrize("preset_id", [1, 2, 3])
    @pytest.mark.parametrize("order", ["default", "swapped"])
    def test_gain_budget_product_is_normalization_free(self, preset_id, order):
        phys = preset_scenario(preset_id, order)
        scenario = to_canonical(phys).scenario
        products = np.array(scenario.interference_gains) * np.array(scenario.budgets)
        assert np.allclose(products, _invariant(phys), rtol=1e-10)

    def test_decoding_order_changes_gains(self, preset_one_physical):
        default = to_canonical(preset_one_physical)
        swapped = to_canonical(preset_one_physical.with_decode_order((1, 2)))
        assert default.column_order == (1, 0)
        assert swapped.column_order == (0, 1)
        assert not np.allclose(
            default.scenario.interference_gains, swapped.scenario.interference_gains
        )

    @pytest.mark.parametrize(
        "order, expected", [("default", (1.41, 0.09)), ("swapped", (1.684, 0.028))]
    )
    def test_preset_three_published_gains(self, order, expected):
        scenario = to_canonical(preset_scenario(3, order)).scenario
        assert scenario.interference_gains == pytest.approx(expected, abs=0.02)
        assert scenario.pu_rate_target == pytest.approx(5.326, abs=5e-3)
        assert scenario.beta == pytest.approx(0.938, abs=5e-3)

    def test_scaling_the_channel_matrix(self, preset_one_physical):
        base = to_canonical(preset_one_physical).scenario
        scaled_phys = preset_one_physical.model_copy(
            update={"su_direct_matrix": 2.0 * preset_one_physical.su_direct_matrix}
        )
        scaled = to_canonical(scaled_phys).scenario
        assert np.allclose(np.array(scaled.interference_gains) * 4.0, base.interference_gains)
        assert np.allclose(np.array(scaled.budgets) / 4.0, base.budgets)

    def test_zero_pu_cross_leaves_base_station_noise(self):
        phys = gen_rayleigh(3, 4, seed=7, zero_pu_cross=True)
        result = to_canonical(phys)
        assert result.per_user_noise == pytest.approx((1.0, 1.0, 1.0))

    def test_ignore_pu_at_bs(self, preset_one_physical):
        result = to_canonical(preset_one_physical, ignore_pu_at_bs=True)
        assert result.per_user_noise == pytest.approx((1.0, 1.0))

    def test_diagonal_gains_follow_user_indexing(self, preset_one_physical):
        result = to_canonical(preset_one_physical)
        # column 0 holds user 2 under the default order
        assert result.diagonal_gains[1] == pytest.approx(
            np.linalg.norm(preset_one_physical.su_direct_matrix[:, 1])
        )

    def test_target_above_capacity(self, preset_one_physical):
        phys = preset_one_physical.model_copy(update={"pu_rate_target": 7.0})
        with pytest.raises(InfeasibleScenarioError) as excinfo:
            to_canonical(phys)
        assert excinfo.value.max_rate == pytest.approx(6.658, abs=1e-3)

    def test_fewer_antennas_than_users(self):
        with pytest.raises(ValidationError):
            PhysicalScenario(
                pu_direct=1.0,
                pu_power=10.0,
                su_cross=[0.1, 0.2],
                su_direct_matrix=[[1.0, 1.0j]],
                pu_to_bs=[0.1],
                su_budgets=(1.0, 1.0),
                pu_rate_target=1.0,
            )

    def test_decode_order_must_be_permutation(self, preset_one_physical):
        with pytest.raises(ValidationError):
            preset_one_physical.with_decode_order((1, 1))

    def test_capacity_fraction(self):
        assert capacity_fraction_target(3.0, 1.0, 1.0, 0.5) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            capacity_fraction_target(3.0, 1.0, 1.0, 0.0)
