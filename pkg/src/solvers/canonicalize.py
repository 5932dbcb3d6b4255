"""Reduction of a physical scenario to the canonical unit-noise model.

The secondary base station applies zero-forcing successive interference
cancellation (ZF-SIC): the columns of H are arranged in decoding order (reversed user
indexes unless stated otherwise), the reordered matrix is QR-decomposed and
the received vector is rotated by Q^H.  After equalization every SU sees a scalar
channel r_k and noise sigma_k^2 (base-station noise plus PU leakage), which
leads to the canonical model with unit direct gains.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base import DegenerateChannelError, DomainError, InfeasibleScenarioError
from .model import CanonicalScenario, pu_capacity

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-12


def _as_complex_array(value: object, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=complex)
    if array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-D complex array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class PhysicalScenario(BaseModel):
    """Channels, powers and noise levels of the original (non-normalized) system.

    ``decode_order`` lists the 1-based user columns of H in the order they
    enter the QR; ``None`` means reversed user indexes (K, ..., 1).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pu_direct: complex
    pu_power: float = Field(gt=0.0)
    su_cross: np.ndarray
    su_direct_matrix: np.ndarray
    pu_to_bs: np.ndarray
    su_budgets: Tuple[float, ...]
    pu_noise_var: float = Field(default=1.0, gt=0.0)
    bs_noise_var: float = Field(default=1.0, gt=0.0)
    pu_rate_target: float = Field(ge=0.0)
    decode_order: Optional[Tuple[int, ...]] = None

    @field_validator("su_cross", "pu_to_bs", mode="before")
    @classmethod
    def validate_vector(cls, v: object) -> np.ndarray:
        return _as_complex_array(v, 1)

    @field_validator("su_direct_matrix", mode="before")
    @classmethod
    def validate_matrix(cls, v: object) -> np.ndarray:
        return _as_complex_array(v, 2)

    @field_validator("su_budgets")
    @classmethod
    def validate_budgets(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not P > 0 for P in v):
            raise ValueError("SU power budgets must be > 0")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self) -> "PhysicalScenario":
        """Shapes must agree, N >= K, and the decode order must be a permutation."""
        n_antennas, n_users = self.su_direct_matrix.shape
        if n_antennas < n_users:
            raise ValueError(
                f"base station needs at least as many antennas as users (N={n_antennas}, K={n_users})"
            )
        if len(self.su_cross) != n_users:
            raise ValueError(f"su_cross has {len(self.su_cross)} entries, expected {n_users}")
        if len(self.su_budgets) != n_users:
            raise ValueError(f"su_budgets has {len(self.su_budgets)} entries, expected {n_users}")
        if len(self.pu_to_bs) != n_antennas:
            raise ValueError(f"pu_to_bs has {len(self.pu_to_bs)} entries, expected {n_antennas}")
        if self.decode_order is not None and sorted(self.decode_order) != list(
            range(1, n_users + 1)
        ):
            raise ValueError(f"decode_order {self.decode_order} is not a permutation of 1..{n_users}")
        return self

    @property
    def num_users(self) -> int:
        return int(self.su_direct_matrix.shape[1])

    @property
    def num_antennas(self) -> int:
        return int(self.su_direct_matrix.shape[0])

    @property
    def effective_decode_order(self) -> Tuple[int, ...]:
        if self.decode_order is None:
            return tuple(range(self.num_users, 0, -1))
        return self.decode_order

    def with_decode_order(self, order: Optional[Sequence[int]]) -> "PhysicalScenario":
        """Validated copy with another decoding order."""
        values = {name: getattr(self, name) for name in type(self).model_fields}
        values["decode_order"] = None if order is None else tuple(int(k) for k in order)
        return type(self).model_validate(values)


class CanonicalizationResult(BaseModel):
    """Canonical scenario plus the ZF-SIC factors it was derived from.

    ``zf_q``/``zf_r`` are in column order ``column_order`` (0-based user
    indexes); ``per_user_noise`` and the canonical scenario use the original
    user indexing.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scenario: CanonicalScenario
    zf_q: np.ndarray
    zf_r: np.ndarray
    per_user_noise: Tuple[float, ...]
    column_order: Tuple[int, ...]

    @property
    def diagonal_gains(self) -> Tuple[float, ...]:
        """|r_k| per user, original indexing."""
        gains = [0.0] * len(self.column_order)
        for position, user in enumerate(self.column_order):
            gains[user] = float(abs(self.zf_r[position, position]))
        return tuple(gains)


def qr_decompose(
    H: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL
) -> Tuple[np.ndarray, np.ndarray]:
    """Thin QR decomposition with a real positive diagonal in R.

    Raises:
        DegenerateChannelError: if some |r_kk| falls below rank_tol * ||H||_F
    """
    H = np.asarray(H, dtype=complex)
    Q, R = np.linalg.qr(H, mode="reduced")
    diagonal = np.diag(R)
    magnitudes = np.abs(diagonal)
    threshold = rank_tol * np.linalg.norm(H)
    weak = np.flatnonzero(magnitudes < threshold)
    if weak.size or not np.any(magnitudes):
        column = int(weak[0]) if weak.size else 0
        raise DegenerateChannelError(
            f"channel matrix is rank deficient at column {column} "
            f"(|r_kk| = {magnitudes[column]:.3e})",
            column=column,
        )
    phases = diagonal / magnitudes
    # H = (Q D)(D^H R) for any unit-modulus diagonal D
    Q = Q * phases[np.newaxis, :]
    R = np.conj(phases)[:, np.newaxis] * R
    R[np.diag_indices_from(R)] = magnitudes
    return Q, R


def to_canonical(
    phys: PhysicalScenario,
    rank_tol: float = DEFAULT_RANK_TOL,
    ignore_pu_at_bs: bool = False,
) -> CanonicalizationResult:
    """Map a physical scenario onto the canonical model.

    Args:
        phys: validated physical scenario
        rank_tol: relative tolerance for the rank check of H
        ignore_pu_at_bs: treat the PU-to-BS channel g as zero

    Raises:
        InfeasibleScenarioError: if the PU rate target exceeds the PU capacity
        DegenerateChannelError: if H is rank deficient
    """
    pu_snr = phys.pu_power * abs(phys.pu_direct) ** 2 / phys.pu_noise_var
    capacity = pu_capacity(pu_snr)
    if phys.pu_rate_target > capacity + 1e-12:
        raise InfeasibleScenarioError(
            f"PU rate target {phys.pu_rate_target:.6g} b/s/Hz exceeds the PU capacity "
            f"{capacity:.6g} b/s/Hz",
            max_rate=capacity,
        )

    column_order = tuple(k - 1 for k in phys.effective_decode_order)
    Q, R = qr_decompose(phys.su_direct_matrix[:, list(column_order)], rank_tol)

    if ignore_pu_at_bs:
        pu_leak = np.zeros(phys.num_users)
    else:
        pu_leak = np.abs(Q.conj().T @ phys.pu_to_bs) ** 2
    gains = [0.0] * phys.num_users
    budgets = [0.0] * phys.num_users
    noise = [0.0] * phys.num_users
    for position, user in enumerate(column_order):
        r2 = float(R[position, position].real) ** 2
        sigma2 = phys.pu_power * float(pu_leak[position]) + phys.bs_noise_var
        noise[user] = sigma2
        gains[user] = sigma2 * abs(phys.su_cross[user]) ** 2 / (phys.pu_noise_var * r2)
        budgets[user] = phys.su_budgets[user] * r2 / sigma2

    scenario = CanonicalScenario(
        pu_snr=pu_snr,
        interference_gains=tuple(gains),
        budgets=tuple(budgets),
        pu_rate_target=min(phys.pu_rate_target, capacity),
    )
    logger.debug(
        f"Canonicalized K={phys.num_users}: p={pu_snr:.4g}, a={scenario.interference_gains}, "
        f"beta={scenario.beta:.4g}"
    )
    return CanonicalizationResult(
        scenario=scenario,
        zf_q=Q,
        zf_r=R,
        per_user_noise=tuple(noise),
        column_order=column_order,
    )


def capacity_fraction_target(
    pu_power: float, pu_direct: complex, pu_noise_var: float, fraction: float
) -> float:
    """PU rate target set as a fraction of its interference-free capacity."""
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"capacity fraction must lie in (0, 1], got {fraction}")
    return fraction * math.log2(1.0 + pu_power * abs(pu_direct) ** 2 / pu_noise_var)
