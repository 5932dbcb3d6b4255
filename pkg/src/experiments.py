"""Scenario presets, Rayleigh channel generation and Monte Carlo sum-rate studies.

Randomness comes from numpy's counter-based Philox generator.  Trial ``i``
of a run seeded with ``seed`` draws from
``Generator(Philox(SeedSequence(seed, spawn_key=(i,))))``, so every trial
is reproducible on its own and results do not depend on how trials are
distributed over worker processes.
"""

import logging
import math
import subprocess
from functools import partial
from importlib import metadata
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .solvers.base import (
    DegenerateChannelError,
    DomainError,
    InfeasibleScenarioError,
    map_ordered,
)
from .solvers.boundary import RateProfile, solve_boundary_point
from .solvers.canonicalize import PhysicalScenario, capacity_fraction_target, to_canonical
from .solvers.model import CanonicalScenario, NoiseState, SignalParams, pu_rate_improper_noise
from .solvers.single_user import SingleUserProblem

logger = logging.getLogger(__name__)

PRESET_PU_POWER = 100.0
PRESET_SU_POWER = 100.0
PRESET_CAPACITY_FRACTION = 0.8

# Channels of the three two-user presets: H columns, h, (g_1, g_2), g
_PRESET_CHANNELS: Dict[int, Dict[str, Any]] = {
    1: {
        "H": [[2.6366 - 0.3382j, -2.8824 - 0.1728j], [-1.4428 + 1.0861j, -1.7887 + 2.0730j]],
        "h": -0.8815 + 0.4721j,
        "su_cross": [0.0533 + 0.2217j, 0.2221 + 0.1991j],
        "pu_to_bs": [0.0533 + 0.2217j, 0.2221 + 0.1991j],
    },
    2: {
        "H": [[0.1599 - 0.9812j, 1.0563 + 0.8070j], [-0.5172 + 0.4742j, 1.1759 + 0.9756j]],
        "h": 0.9445 + 0.3284j,
        "su_cross": [0.2908 + 0.1358j, 0.3279 + 0.1532j],
        "pu_to_bs": [-0.3209 - 0.0052j, -0.1427 - 0.3326j],
    },
    3: {
        "H": [[2.1257 - 3.0397j, -0.4956 + 0.9835j], [0.5401 - 0.9356j, 2.1329 - 0.6720j]],
        "h": 0.8292 + 0.5589j,
        "su_cross": [-0.0869 + 0.3653j, 0.0301 + 0.0900j],
        "pu_to_bs": [1.1379 + 0.7371j, 0.2219 - 0.2120j],
    },
}

# Published canonical interference gains under the default (2, 1) and swapped (1, 2) orders
_PRESET_GAINS: Dict[int, Dict[str, Tuple[float, float]]] = {
    1: {"default": (0.52, 0.89), "swapped": (0.788, 0.592)},
    2: {"default": (1.03, 1.31), "swapped": (1.829, 0.995)},
    3: {"default": (1.41, 0.09), "swapped": (1.684, 0.028)},
}

PresetOrder = Literal["default", "swapped"]


def _preset(preset_id: int) -> Dict[str, Any]:
    try:
        return _PRESET_CHANNELS[preset_id]
    except KeyError:
        raise DomainError(f"unknown preset scenario {preset_id}; choose 1, 2 or 3") from None


def _decode_order(order: str) -> Optional[Tuple[int, ...]]:
    if order == "default":
        return None
    if order == "swapped":
        return (1, 2)
    raise DomainError(f"unknown decoding order '{order}'; choose 'default' or 'swapped'")


def preset_scenario(preset_id: int, order: PresetOrder = "default") -> PhysicalScenario:
    """One of the three published two-user channel sets.

    p' = P'_1 = P'_2 = 100, unit noise, PU target at 80% of its capacity.
    ``default`` orders the columns of H as (2, 1), ``swapped`` as (1, 2).
    """
    preset = _preset(preset_id)
    target = capacity_fraction_target(PRESET_PU_POWER, preset["h"], 1.0, PRESET_CAPACITY_FRACTION)
    return PhysicalScenario(
        pu_direct=preset["h"],
        pu_power=PRESET_PU_POWER,
        su_cross=preset["su_cross"],
        su_direct_matrix=preset["H"],
        pu_to_bs=preset["pu_to_bs"],
        su_budgets=(PRESET_SU_POWER, PRESET_SU_POWER),
        pu_noise_var=1.0,
        bs_noise_var=1.0,
        pu_rate_target=target,
        decode_order=_decode_order(order),
    )


def preset_canonical(preset_id: int, order: PresetOrder = "default") -> CanonicalScenario:
    """Canonical preset carrying the published (a_1, a_2).

    Budgets follow from a_k P_k = P'_k |g_k|^2 / sigma^2, which holds for any
    ZF-SIC normalization.
    """
    preset = _preset(preset_id)
    _decode_order(order)
    gains = _PRESET_GAINS[preset_id][order]
    pu_snr = PRESET_PU_POWER * abs(preset["h"]) ** 2
    budgets = tuple(
        PRESET_SU_POWER * abs(g) ** 2 / a for g, a in zip(preset["su_cross"], gains)
    )
    return CanonicalScenario(
        pu_snr=pu_snr,
        interference_gains=gains,
        budgets=budgets,
        pu_rate_target=PRESET_CAPACITY_FRACTION * math.log2(1.0 + pu_snr),
    )


def trial_generator(seed: int, trial: int) -> Generator:
    """Independent Philox stream for one Monte Carlo trial."""
    return Generator(Philox(SeedSequence(seed, spawn_key=(trial,))))


def _proper_gaussian(rng: Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def gen_rayleigh(
    num_users: int,
    num_antennas: int,
    seed: int,
    zero_pu_cross: bool = False,
    trial: int = 0,
    pu_power: float = PRESET_PU_POWER,
    su_power: float = PRESET_SU_POWER,
    pu_rate_fraction: float = 0.6,
) -> PhysicalScenario:
    """Scenario with i.i.d. unit-variance proper complex Gaussian channels.

    Draw order is h, (g_1..g_K), H (column-major by antenna), g; with
    ``zero_pu_cross`` g is drawn and then zeroed so the streams stay aligned.
    """
    if num_antennas < num_users:
        raise DomainError(f"need N >= K, got N={num_antennas}, K={num_users}")
    rng = trial_generator(seed, trial)
    h = complex(_proper_gaussian(rng, (1,))[0])
    su_cross = _proper_gaussian(rng, (num_users,))
    H = _proper_gaussian(rng, (num_antennas, num_users))
    g = _proper_gaussian(rng, (num_antennas,))
    if zero_pu_cross:
        g = np.zeros(num_antennas, dtype=complex)
    return PhysicalScenario(
        pu_direct=h,
        pu_power=pu_power,
        su_cross=su_cross,
        su_direct_matrix=H,
        pu_to_bs=g,
        su_budgets=tuple([su_power] * num_users),
        pu_rate_target=capacity_fraction_target(pu_power, h, 1.0, pu_rate_fraction),
    )


class ExperimentConfig(BaseModel):
    """Monte Carlo study description."""

    model_config = ConfigDict(frozen=True)

    name: Literal["fig7", "fig8"] = "fig7"
    num_users: int = Field(default=4, ge=1)
    num_antennas: int = Field(default=4, ge=1)
    trials: int = Field(default=200, ge=1)
    seed: int = Field(default=2017, ge=0)
    pu_rate_fraction: float = Field(default=0.6, gt=0.0, le=1.0)
    pu_power: float = Field(default=PRESET_PU_POWER, gt=0.0)
    budgets: Tuple[float, ...] = tuple(float(b) for b in np.logspace(0.0, 4.0, 9))
    user_counts: Tuple[int, ...] = (1, 2, 3, 4, 5)
    alpha: Optional[Tuple[float, ...]] = (0.27, 0.13, 0.09, 0.51)
    zero_pu_cross: bool = False
    bisection_tol: float = Field(default=1e-8, gt=0.0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_shape(self) -> "ExperimentConfig":
        if self.num_antennas < self.num_users:
            raise ValueError(
                f"num_antennas ({self.num_antennas}) must be >= num_users ({self.num_users})"
            )
        if self.alpha is not None and self.name == "fig7" and len(self.alpha) != self.num_users:
            raise ValueError(f"alpha has {len(self.alpha)} weights for {self.num_users} users")
        if not self.budgets or not self.user_counts:
            raise ValueError("budgets and user counts must not be empty")
        if any(b <= 0 for b in self.budgets):
            raise ValueError("budgets must be > 0")
        if any(k < 1 for k in self.user_counts):
            raise ValueError("user counts must be >= 1")
        return self

    @classmethod
    def fig7(cls, **overrides: Any) -> "ExperimentConfig":
        """Sum rate against a common SU budget, K = N = 4, PU at 60% of capacity."""
        return cls(name="fig7", **overrides)

    @classmethod
    def fig8(cls, **overrides: Any) -> "ExperimentConfig":
        """Fairness-point sum rate against K = N, g = 0."""
        values: Dict[str, Any] = {
            "name": "fig8",
            "alpha": None,
            "zero_pu_cross": True,
            "pu_rate_fraction": PRESET_CAPACITY_FRACTION,
            "budgets": (PRESET_SU_POWER,),
        }
        values.update(overrides)
        return cls(**values)


class CurvePoint(BaseModel):
    """Averages at one sweep level (a budget or a user count)."""

    model_config = ConfigDict(frozen=True)

    level: float
    num_users: int
    trials: int
    infeasible_trials: int
    igs_mean: float
    igs_stderr: float
    pgs_mean: float
    pgs_stderr: float

    @property
    def igs_per_user(self) -> float:
        return self.igs_mean / self.num_users

    @property
    def pgs_per_user(self) -> float:
        return self.pgs_mean / self.num_users

    @property
    def ratio(self) -> float:
        return self.igs_mean / self.pgs_mean if self.pgs_mean > 0.0 else math.inf


class SumRateCurve(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    points: Tuple[CurvePoint, ...]


def _mean_stderr(values: List[float]) -> Tuple[float, float]:
    if not values:
        return math.nan, math.nan
    array = np.asarray(values, dtype=float)
    if array.size < 2:
        return float(array.mean()), 0.0
    return float(array.mean()), float(array.std(ddof=1) / math.sqrt(array.size))


def _canonical_trial(
    config: ExperimentConfig, num_users: int, trial: int
) -> Optional[CanonicalScenario]:
    phys = gen_rayleigh(
        num_users,
        num_users if config.name == "fig8" else config.num_antennas,
        config.seed,
        zero_pu_cross=config.zero_pu_cross,
        trial=trial,
        pu_power=config.pu_power,
        pu_rate_fraction=config.pu_rate_fraction,
    )
    try:
        return to_canonical(phys).scenario
    except (DegenerateChannelError, InfeasibleScenarioError) as e:
        logger.warning(f"Trial {trial} (K={num_users}) skipped: {e}")
        return None


def _solve_pair(
    scenario: CanonicalScenario, profile: RateProfile, tol: float
) -> Tuple[float, float]:
    igs = solve_boundary_point(profile, scenario, tol=tol, mode="igs")
    pgs = solve_boundary_point(profile, scenario, tol=tol, mode="pgs")
    return igs.r, pgs.r


def _budget_trial(trial: int, config: ExperimentConfig) -> Optional[List[Tuple[float, float]]]:
    scenario = _canonical_trial(config, config.num_users, trial)
    if scenario is None:
        return None
    alpha = config.alpha or tuple([1.0 / config.num_users] * config.num_users)
    profile = RateProfile.from_weights(alpha)
    return [
        _solve_pair(
            scenario.with_budgets([budget] * config.num_users), profile, config.bisection_tol
        )
        for budget in config.budgets
    ]


def _users_trial(trial: int, config: ExperimentConfig) -> List[Optional[Tuple[float, float]]]:
    budget = config.budgets[0]
    results: List[Optional[Tuple[float, float]]] = []
    for num_users in config.user_counts:
        scenario = _canonical_trial(config, num_users, trial)
        if scenario is None:
            results.append(None)
            continue
        scenario = scenario.with_budgets([budget] * num_users)
        results.append(
            _solve_pair(scenario, RateProfile.fairness(num_users), config.bisection_tol)
        )
    return results


def _curve_point(
    level: float, num_users: int, samples: List[Optional[Tuple[float, float]]]
) -> CurvePoint:
    solved = [s for s in samples if s is not None]
    igs_mean, igs_stderr = _mean_stderr([s[0] for s in solved])
    pgs_mean, pgs_stderr = _mean_stderr([s[1] for s in solved])
    return CurvePoint(
        level=level,
        num_users=num_users,
        trials=len(solved),
        infeasible_trials=len(samples) - len(solved),
        igs_mean=igs_mean,
        igs_stderr=igs_stderr,
        pgs_mean=pgs_mean,
        pgs_stderr=pgs_stderr,
    )


def sumrate_vs_budget(config: ExperimentConfig) -> SumRateCurve:
    """Average IGS and PGS sum rate at one rate profile, per common SU budget."""
    logger.info(
        f"Running sum rate vs budget: K={config.num_users}, N={config.num_antennas}, "
        f"{config.trials} trial(s), {len(config.budgets)} budget level(s)"
    )
    per_trial = map_ordered(
        partial(_budget_trial, config=config), range(config.trials), config.workers
    )
    points = []
    for index, budget in enumerate(config.budgets):
        samples = [None if t is None else t[index] for t in per_trial]
        points.append(_curve_point(budget, config.num_users, samples))
    return SumRateCurve(config=config, points=tuple(points))


def sumrate_vs_users(config: ExperimentConfig) -> SumRateCurve:
    """Average fairness-point IGS and PGS sum rate, per number of users (N = K)."""
    logger.info(
        f"Running sum rate vs users: K in {list(config.user_counts)}, {config.trials} trial(s)"
    )
    per_trial = map_ordered(
        partial(_users_trial, config=config), range(config.trials), config.workers
    )
    points = [
        _curve_point(float(num_users), num_users, [t[index] for t in per_trial])
        for index, num_users in enumerate(config.user_counts)
    ]
    return SumRateCurve(config=config, points=tuple(points))


def run_experiment(config: ExperimentConfig) -> SumRateCurve:
    if config.name == "fig7":
        return sumrate_vs_budget(config)
    return sumrate_vs_users(config)


def _git_describe() -> str:
    try:
        completed = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            check=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return completed.stdout.strip() or "unknown"


def _package_version() -> str:
    try:
        return metadata.version("igs-smac")
    except metadata.PackageNotFoundError:
        return "unknown"


def run_manifest(config: ExperimentConfig, name: str) -> Dict[str, Any]:
    """Provenance record written next to experiment outputs."""
    return {
        "experiment": name,
        "seed": config.seed,
        "rng": "numpy Philox, SeedSequence(seed, spawn_key=(trial,))",
        "git": _git_describe(),
        "version": _package_version(),
        "config": config.model_dump(mode="json"),
    }


def random_single_user_problem(seed: int, trial: int = 0) -> SingleUserProblem:
    """Feasible single-user problem with log-uniform SNRs and improper PU noise.

    The PU target is a random share in [0.3, 0.95] of the rate the PU gets
    with the SU silent.
    """
    rng = trial_generator(seed, trial)
    pu_snr = 10.0 ** rng.uniform(0.0, 2.0)
    gain = 10.0 ** rng.uniform(-1.5, 0.5)
    budget = 10.0 ** rng.uniform(0.0, 2.0)
    improper_power = 10.0 ** rng.uniform(-1.0, 1.0) if rng.uniform() < 0.75 else 0.0
    improper_circularity = rng.uniform(0.0, 1.0)
    share = rng.uniform(0.3, 0.95)
    noise = NoiseState(
        total_variance=1.0 + improper_power,
        complementary_magnitude=improper_power * improper_circularity,
    )
    silent = pu_rate_improper_noise(pu_snr, gain, SignalParams(power=0.0), noise)
    return SingleUserProblem(
        pu_snr=pu_snr,
        gain=gain,
        budget=budget,
        pu_rate_target=share * silent,
        noise=noise,
    )
