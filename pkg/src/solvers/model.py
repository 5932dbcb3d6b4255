"""Canonical-domain types and the rate formulas every solver evaluates.

All rates are in bits per complex symbol (b/s/Hz).  Signals of the
secondary users are described by their power, circularity coefficient and
the phase of their complementary variance; the primary user (PU) always
transmits a proper Gaussian signal.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base import DomainError, half_log2_ratio, log2_clamped

logger = logging.getLogger(__name__)

# Slack allowed when validating p~_N <= p_N - 1 and R <= log2(1+p)
_VALIDATION_SLACK = 1e-12


class SignalParams(BaseModel):
    """Transmit parameters of one secondary user in canonical SNR units."""

    model_config = ConfigDict(frozen=True)

    power: float = Field(ge=0.0)
    circularity: float = Field(default=0.0, ge=0.0, le=1.0)
    phase: float = Field(default=0.0, gt=-math.pi, le=math.pi)

    @property
    def complementary_variance(self) -> complex:
        """p~ = p c e^{j phi}."""
        return self.power * self.circularity * complex(math.cos(self.phase), math.sin(self.phase))


def beta_of(pu_snr: float, pu_rate_target: float) -> float:
    """Normalized PU rate margin 1 - p/(2^{2R} - 1); -inf for a zero target."""
    denominator = 2.0 ** (2.0 * pu_rate_target) - 1.0
    if denominator <= 0.0:
        return -math.inf
    return 1.0 - pu_snr / denominator


def pu_capacity(pu_snr: float) -> float:
    """Interference-free rate of the primary link."""
    return math.log2(1.0 + pu_snr)


class CanonicalScenario(BaseModel):
    """Unit-noise, unit-gain model: PU SNR, interference gains, SU budgets, PU target."""

    model_config = ConfigDict(frozen=True)

    pu_snr: float = Field(ge=0.0)
    interference_gains: Tuple[float, ...]
    budgets: Tuple[float, ...]
    pu_rate_target: float = Field(ge=0.0)

    @field_validator("interference_gains")
    @classmethod
    def validate_gains(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        """Interference gains must be finite and nonnegative."""
        if any(not math.isfinite(a) or a < 0 for a in v):
            raise ValueError("interference gains must be finite and >= 0")
        return v

    @field_validator("budgets")
    @classmethod
    def validate_budgets(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        """Power budgets must be positive."""
        if any(not P > 0 for P in v):
            raise ValueError("power budgets must be > 0")
        return v

    @model_validator(mode="after")
    def validate_consistency(self) -> "CanonicalScenario":
        """Lengths must agree and the PU target must be attainable without interference."""
        if len(self.interference_gains) != len(self.budgets):
            raise ValueError(
                f"{len(self.interference_gains)} interference gains but "
                f"{len(self.budgets)} budgets"
            )
        if self.pu_rate_target > pu_capacity(self.pu_snr) + _VALIDATION_SLACK:
            raise ValueError(
                f"PU rate target {self.pu_rate_target:.6g} exceeds its capacity "
                f"{pu_capacity(self.pu_snr):.6g}"
            )
        return self

    @property
    def num_users(self) -> int:
        return len(self.budgets)

    @property
    def beta(self) -> float:
        return beta_of(self.pu_snr, self.pu_rate_target)

    def with_budgets(self, budgets: Sequence[float]) -> "CanonicalScenario":
        """Copy of the scenario with new power budgets."""
        return self.model_copy(update={"budgets": tuple(float(P) for P in budgets)})


class NoiseState(BaseModel):
    """Equivalent noise at the primary receiver, rho = (p_N, p~_N).

    The noise splits into a proper unit-variance part and an improper part of
    power p_I = p_N - 1 with circularity c_I = p~_N / p_I.
    """

    model_config = ConfigDict(frozen=True)

    total_variance: float = Field(default=1.0, ge=1.0)
    complementary_magnitude: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def validate_complementary(self) -> "NoiseState":
        """The improper part must itself be a valid variance pair."""
        limit = self.total_variance - 1.0
        if self.complementary_magnitude > limit + _VALIDATION_SLACK * max(1.0, limit):
            raise ValueError(
                f"complementary magnitude {self.complementary_magnitude:.6g} exceeds "
                f"p_N - 1 = {limit:.6g}"
            )
        return self

    @classmethod
    def proper(cls) -> "NoiseState":
        return cls()

    @property
    def improper_power(self) -> float:
        return self.total_variance - 1.0

    @property
    def improper_circularity(self) -> float:
        # 0/0 at p_N = 1 is taken as proper
        p_i = self.improper_power
        if p_i <= 0.0:
            return 0.0
        return min(self.complementary_magnitude / p_i, 1.0)

    def plus_interference(self, power: float, complementary: float) -> "NoiseState":
        """Fold a fixed (phase-aligned) interferer into the noise."""
        total = self.total_variance + power
        comp = self.complementary_magnitude + complementary
        return NoiseState(
            total_variance=total, complementary_magnitude=min(comp, total - 1.0)
        )


def su_rate_value(power: ArrayLike, circularity: ArrayLike) -> np.ndarray:
    """Vectorized SU rate 0.5*log2{1 + p[p(1-c^2) + 2]}."""
    p = np.asarray(power, dtype=float)
    c = np.asarray(circularity, dtype=float)
    if np.any(p < 0) or np.any(c < 0) or np.any(c > 1):
        raise DomainError("SU rate needs power >= 0 and circularity in [0, 1]")
    return 0.5 * log2_clamped(1.0 + p * (p * (1.0 - c * c) + 2.0))


def su_rate(params: SignalParams) -> float:
    """Rate of one SU under proper unit noise; independent of the phase."""
    return float(su_rate_value(params.power, params.circularity))


def _pu_rate_aggregate(
    pu_snr: ArrayLike, variance: ArrayLike, complementary: ArrayLike
) -> np.ndarray:
    """PU rate given total noise-plus-interference variance and |complementary variance|."""
    v = np.asarray(variance, dtype=float)
    t2 = np.asarray(complementary, dtype=float) ** 2
    numerator = (np.asarray(pu_snr, dtype=float) + v) ** 2 - t2
    return half_log2_ratio(numerator, v * v - t2)


def pu_rate_value(
    pu_snr: ArrayLike, interference: ArrayLike, complementary: ArrayLike
) -> np.ndarray:
    """Vectorized PU rate under proper unit noise.

    Args:
        pu_snr: PU SNR p
        interference: aggregate interference power sum(a_k p_k)
        complementary: |sum(a_k p_k c_k e^{j phi_k})|
    """
    return _pu_rate_aggregate(pu_snr, 1.0 + np.asarray(interference, dtype=float), complementary)


def pu_rate(scenario: CanonicalScenario, all_params: Sequence[SignalParams]) -> float:
    """PU rate with the secondary users transmitting ``all_params``."""
    if len(all_params) != scenario.num_users:
        raise DomainError(
            f"expected {scenario.num_users} signal parameter sets, got {len(all_params)}"
        )
    interference = 0.0
    complementary = 0j
    for a, params in zip(scenario.interference_gains, all_params):
        interference += a * params.power
        complementary += a * params.complementary_variance
    return float(pu_rate_value(scenario.pu_snr, interference, abs(complementary)))


def pu_rate_improper_noise_value(
    pu_snr: ArrayLike,
    gain: ArrayLike,
    power: ArrayLike,
    circularity: ArrayLike,
    noise_variance: ArrayLike,
    noise_complementary: ArrayLike,
) -> np.ndarray:
    """Vectorized PU rate with a single phase-aligned SU and improper noise."""
    interference = np.asarray(gain, dtype=float) * np.asarray(power, dtype=float)
    variance = np.asarray(noise_variance, dtype=float) + interference
    complementary = np.asarray(noise_complementary, dtype=float) + interference * np.asarray(
        circularity, dtype=float
    )
    return _pu_rate_aggregate(pu_snr, variance, complementary)


def pu_rate_improper_noise(
    pu_snr: float, gain: float, params: SignalParams, noise: NoiseState
) -> float:
    """PU rate with one SU of gain ``gain`` and improper noise ``noise``.

    The noise complementary variance sits at phase 0; the SU phase is applied
    relative to it.
    """
    if gain < 0:
        raise DomainError(f"interference gain must be >= 0, got {gain}")
    interference = gain * params.power
    complementary = abs(noise.complementary_magnitude + gain * params.complementary_variance)
    return float(
        _pu_rate_aggregate(pu_snr, noise.total_variance + interference, complementary)
    )


def align_phases(all_params: Sequence[SignalParams], phase: float = 0.0) -> list[SignalParams]:
    """Give every SU the same complementary-variance phase (0 by convention)."""
    return [params.model_copy(update={"phase": phase}) for params in all_params]


def circularity_of_aggregate(
    all_params: Sequence[SignalParams], gains: Sequence[float]
) -> float:
    """Circularity coefficient of the aggregate interference at the PU receiver."""
    interference = sum(a * s.power for a, s in zip(gains, all_params))
    if interference <= 0.0:
        return 0.0
    complementary = sum(a * s.complementary_variance for a, s in zip(gains, all_params))
    return min(abs(complementary) / interference, 1.0)
