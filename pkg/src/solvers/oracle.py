"""Brute-force grid searches used to check the closed-form solvers.

Nothing here reuses the optimization logic of ``single_user`` or
``boundary``; rates are evaluated through ``model`` only.
"""

import itertools
import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from .base import DomainError, OracleRefusedError, VerificationError
from .boundary import RateProfile, solve_boundary_point
from .model import (
    CanonicalScenario,
    pu_rate_improper_noise_value,
    pu_rate_value,
    su_rate_value,
)
from .single_user import SingleUserProblem, solve_p_in

logger = logging.getLogger(__name__)

MAX_BOUNDARY_USERS = 3
DEFAULT_MAX_COST = 5e8
# Absolute rate slack when checking solver >= oracle
DEFAULT_SLACK = 1e-6


class SingleUserOracleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    feasible: bool
    best_rate: float
    best_p: Optional[float] = None
    best_c: Optional[float] = None


class OracleComparison(BaseModel):
    """Solver value against the grid-search lower bound."""

    model_config = ConfigDict(frozen=True)

    solver: float
    oracle: float
    grid_n: int
    slack: float

    @property
    def delta(self) -> float:
        return self.solver - self.oracle

    @property
    def passed(self) -> bool:
        return self.delta >= -self.slack

    def require_passed(self) -> None:
        if not self.passed:
            raise VerificationError(
                f"solver value {self.solver:.10g} is below the grid oracle {self.oracle:.10g} "
                f"(delta {self.delta:.3g}, slack {self.slack:.3g}, grid {self.grid_n})",
                delta=self.delta,
            )


def _grid(budget: float, grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    power, circularity = np.meshgrid(
        np.linspace(0.0, budget, grid_n), np.linspace(0.0, 1.0, grid_n), indexing="ij"
    )
    return power.ravel(), circularity.ravel()


def brute_single_user(prob: SingleUserProblem, grid_n: int = 201) -> SingleUserOracleResult:
    """Best SU rate over a grid_n x grid_n grid of (p, c) meeting the PU target."""
    if grid_n < 2:
        raise DomainError(f"grid_n must be >= 2, got {grid_n}")
    power, circularity = _grid(prob.budget, grid_n)
    pu = pu_rate_improper_noise_value(
        prob.pu_snr,
        prob.gain,
        power,
        circularity,
        prob.noise.total_variance,
        prob.noise.complementary_magnitude,
    )
    feasible = pu >= prob.pu_rate_target
    if not np.any(feasible):
        return SingleUserOracleResult(feasible=False, best_rate=0.0)
    rates = np.where(feasible, su_rate_value(power, circularity), -np.inf)
    best = int(np.argmax(rates))
    return SingleUserOracleResult(
        feasible=True,
        best_rate=float(rates[best]),
        best_p=float(power[best]),
        best_c=float(circularity[best]),
    )


def boundary_cost(profile: RateProfile, grid_n: int) -> float:
    """Number of rate evaluations brute_boundary would perform."""
    return float(grid_n) ** (2 * len(profile.active_users))


def brute_boundary(
    profile: RateProfile,
    scenario: CanonicalScenario,
    grid_n: int = 61,
    max_cost: float = DEFAULT_MAX_COST,
) -> float:
    """Lower bound on r: max over gridded (p_k, c_k) meeting the PU target of min_k R_k/alpha_k.

    All users share the complementary-variance phase.  Users with alpha_k = 0
    stay silent.

    Raises:
        OracleRefusedError: for K > 3 or when the grid would be too large
    """
    cost = boundary_cost(profile, grid_n)
    if scenario.num_users > MAX_BOUNDARY_USERS:
        raise OracleRefusedError(
            f"brute-force boundary search is limited to K <= {MAX_BOUNDARY_USERS} "
            f"(K={scenario.num_users} would need ~{cost:.3g} evaluations)",
            cost=cost,
        )
    if cost > max_cost:
        raise OracleRefusedError(
            f"brute-force boundary search needs ~{cost:.3g} evaluations (limit {max_cost:.3g})",
            cost=cost,
        )

    interference: List[np.ndarray] = []
    complementary: List[np.ndarray] = []
    objective: List[np.ndarray] = []
    for k in range(scenario.num_users):
        alpha = profile.alpha[k]
        if alpha > 0.0:
            power, circularity = _grid(scenario.budgets[k], grid_n)
            score = su_rate_value(power, circularity) / alpha
        else:
            power, circularity = np.zeros(1), np.zeros(1)
            score = np.full(1, np.inf)
        a = scenario.interference_gains[k]
        interference.append(a * power)
        complementary.append(a * power * circularity)
        objective.append(score)

    best = 0.0
    head = range(scenario.num_users - 1)
    for combo in itertools.product(*[range(len(objective[k])) for k in head]):
        s = sum((interference[k][i] for k, i in zip(head, combo)), 0.0)
        t = sum((complementary[k][i] for k, i in zip(head, combo)), 0.0)
        floor = min((objective[k][i] for k, i in zip(head, combo)), default=np.inf)
        pu = pu_rate_value(scenario.pu_snr, s + interference[-1], t + complementary[-1])
        combined = np.minimum(objective[-1], floor)
        feasible = pu >= scenario.pu_rate_target
        if np.any(feasible):
            candidate = float(np.max(combined[feasible]))
            if math.isfinite(candidate) and candidate > best:
                best = candidate
    return best


def compare_single_user(
    prob: SingleUserProblem, grid_n: int = 201, slack: float = DEFAULT_SLACK
) -> OracleComparison:
    solution = solve_p_in(prob)
    oracle = brute_single_user(prob, grid_n)
    return OracleComparison(
        solver=solution.achieved_su_rate, oracle=oracle.best_rate, grid_n=grid_n, slack=slack
    )


def compare_boundary(
    profile: RateProfile,
    scenario: CanonicalScenario,
    grid_n: int = 61,
    slack: float = DEFAULT_SLACK,
    tol: float = 1e-8,
) -> OracleComparison:
    point = solve_boundary_point(profile, scenario, tol=tol)
    oracle = brute_boundary(profile, scenario, grid_n)
    logger.debug(f"Boundary oracle alpha={profile.alpha}: solver {point.r:.6g}, grid {oracle:.6g}")
    return OracleComparison(solver=point.r, oracle=oracle, grid_n=grid_n, slack=slack)
