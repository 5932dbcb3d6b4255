"""Rate-region boundary of the secondary MAC under the PU rate constraint.

A boundary point is found with the rate-profile approach: for weights
alpha the largest r with R_k >= alpha_k r for every SU is located by
bisection, each step being a feasibility problem.

Feasibility works on the aggregate interference seen by the PU.  With
every SU rate tight and tau = t(c)/sum(a_k), kappa = tau c / (1 + tau), the
per-user parameters are

    p_k + 1 = 2^{alpha_k r} / sqrt(1 - kappa^2)
    c_k     = 2^{alpha_k r} kappa G / (2^{alpha_k r} G - 1),  G = 1/sqrt(1 - kappa^2)

so kappa (increasing in c) orders when a user runs out of power or
reaches maximal impropriety.  Saturated users are frozen and folded into an
equivalent improper noise at the PU receiver, and the reduced problem is
solved again as a single aggregate user.
"""

import logging
import math
from functools import partial
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.optimize import brentq
from scipy.spatial import ConvexHull

from ..logging_utils import log_bisection_result, log_solver_step
from .base import RESIDUAL_TOL, ROOT_XTOL, DomainError, InfeasibleScenarioError, map_ordered
from .model import (
    CanonicalScenario,
    NoiseState,
    SignalParams,
    beta_of,
    circularity_of_aggregate,
    pu_rate,
    su_rate,
)
from .single_user import SingleUserProblem, constant_term, interference_limit, solve_p_in

logger = logging.getLogger(__name__)

SignalingMode = Literal["igs", "pgs"]

DEFAULT_BISECTION_TOL = 1e-8
DEFAULT_BISECTION_MAX_ITER = 60
DEFAULT_FIXED_USER_TOL = 1e-9
ACTIVATION_SCAN_POINTS = 64
# Relative power margin below which a proper user counts as budget-saturated
_SATURATION_MARGIN = 1e-7


class RateProfile(BaseModel):
    """Direction alpha (nonnegative, summing to one) along which the boundary is searched."""

    model_config = ConfigDict(frozen=True)

    alpha: Tuple[float, ...]

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("rate profile needs at least one weight")
        if any(not a >= 0.0 for a in v):
            raise ValueError("rate profile weights must be >= 0")
        if abs(sum(v) - 1.0) > 1e-12:
            raise ValueError(f"rate profile weights sum to {sum(v)!r}, expected 1")
        return v

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "RateProfile":
        total = float(sum(weights))
        if not total > 0.0:
            raise DomainError("rate profile weights must have a positive sum")
        return cls(alpha=tuple(float(w) / total for w in weights))

    @classmethod
    def fairness(cls, num_users: int) -> "RateProfile":
        return cls(alpha=tuple([1.0 / num_users] * num_users))

    @classmethod
    def two_user(cls, alpha_1: float) -> "RateProfile":
        return cls(alpha=(float(alpha_1), 1.0 - float(alpha_1)))

    @property
    def active_users(self) -> Tuple[int, ...]:
        return tuple(k for k, a in enumerate(self.alpha) if a > 0.0)


class FixedUser(BaseModel):
    """A user frozen during the feasibility search, with why it was frozen."""

    model_config = ConfigDict(frozen=True)

    user: int
    params: SignalParams
    kind: Literal["budget", "power", "circularity"]
    rule_agrees: Optional[bool] = None


class Activation(BaseModel):
    """First user to saturate its power or circularity as c grows, and where."""

    model_config = ConfigDict(frozen=True)

    user: Optional[int]
    c: float
    kind: Literal["power", "circularity", "none"]
    rule_agrees: Optional[bool] = None


class BoundaryPoint(BaseModel):
    """Solution of the rate-profile problem at its largest feasible r."""

    model_config = ConfigDict(frozen=True)

    r: float = Field(ge=0.0)
    alpha: Tuple[float, ...]
    params: Tuple[SignalParams, ...]
    aggregate_c: float
    active_users: Tuple[int, ...]
    saturated_users: Tuple[int, ...]
    improper_users: Tuple[int, ...]
    fixed_users: Tuple[FixedUser, ...] = ()
    noise: NoiseState
    igs_required: bool
    mode: SignalingMode = "igs"
    iterations: int = 0

    @property
    def rates(self) -> Tuple[float, ...]:
        return tuple(su_rate(s) for s in self.params)

    @property
    def sum_rate(self) -> float:
        return float(sum(self.rates))

    @property
    def powers(self) -> Tuple[float, ...]:
        return tuple(s.power for s in self.params)

    @property
    def circularities(self) -> Tuple[float, ...]:
        return tuple(s.circularity for s in self.params)


class Feasible(BaseModel):
    model_config = ConfigDict(frozen=True)

    point: BoundaryPoint


class Infeasible(BaseModel):
    model_config = ConfigDict(frozen=True)

    reason: str
    user: Optional[int] = None


FeasibilityResult = Union[Feasible, Infeasible]


class ModeComparison(BaseModel):
    """IGS against PGS along one rate profile."""

    model_config = ConfigDict(frozen=True)

    alpha: Tuple[float, ...]
    r_igs: float
    r_pgs: float
    relative_gain: float


def tolerable_interference(
    c: Union[float, Sequence[float], np.ndarray],
    noise: NoiseState,
    pu_snr: float,
    pu_rate_target: float,
) -> np.ndarray:
    """t(c; rho): aggregate interference power the PU tolerates at circularity c."""
    return interference_limit(
        c,
        pu_snr,
        beta_of(pu_snr, pu_rate_target),
        noise.improper_power,
        noise.improper_circularity,
    )


def igs_required(
    scenario: CanonicalScenario,
    improper_users: Sequence[int],
    active_users: Sequence[int],
) -> bool:
    """sum_{K_a} a_k >= sum_{K \\ K_a} a_k P_k + beta, with K_a nonempty."""
    a = scenario.interference_gains
    improper = set(improper_users)
    if not improper:
        return False
    lhs = sum(a[k] for k in improper)
    rhs = sum(a[k] * scenario.budgets[k] for k in active_users if k not in improper)
    return lhs >= rhs + scenario.beta


def pu_constraint_binding(
    scenario: CanonicalScenario,
    saturated_users: Sequence[int],
    improper_users: Sequence[int],
) -> bool:
    """Whether the PU rate constraint can limit the users in ``improper_users``.

    False when they could all transmit their full budget properly on top of
    the saturated users.
    """
    if not improper_users or scenario.pu_rate_target == 0.0:
        return False
    a, budgets = scenario.interference_gains, scenario.budgets
    frozen = NoiseState.proper().plus_interference(
        sum(a[k] * budgets[k] for k in saturated_users), 0.0
    )
    try:
        t_proper = float(
            tolerable_interference(0.0, frozen, scenario.pu_snr, scenario.pu_rate_target)
        )
    except InfeasibleScenarioError:
        return True
    return t_proper < sum(a[k] * budgets[k] for k in improper_users)


def igs_required_high_budget(scenario: CanonicalScenario, active_users: Sequence[int]) -> bool:
    """With unconstrained budgets IGS pays off iff sum_K a_k >= beta."""
    return sum(scenario.interference_gains[k] for k in active_users) >= scenario.beta


def _kappa(c: np.ndarray, t: np.ndarray, gain_sum: float) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        tau = t / gain_sum
        return np.where(np.isinf(tau), c, tau * c / (1.0 + tau))


def _user_arrays(
    users: Sequence[int], r: float, profile: RateProfile, scenario: CanonicalScenario
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    alpha = np.array([profile.alpha[k] for k in users])
    gains = np.array([scenario.interference_gains[k] for k in users])
    budgets = np.array([scenario.budgets[k] for k in users])
    return 2.0 ** (alpha * r), gains, budgets


def user_params_from_c(
    c: float,
    r: float,
    profile: RateProfile,
    improper_users: Sequence[int],
    noise: NoiseState,
    scenario: CanonicalScenario,
) -> List[SignalParams]:
    """Per-user (p_k, c_k) meeting R_k = alpha_k r when the aggregate circularity is c.

    Returned in the order of ``improper_users``.
    """
    users = list(improper_users)
    if not users:
        return []
    x, gains, _ = _user_arrays(users, r, profile, scenario)
    gain_sum = float(gains.sum())
    if gain_sum <= 0.0:
        raise DomainError("aggregate interference gain of the improper users is zero")
    t = tolerable_interference(c, noise, scenario.pu_snr, scenario.pu_rate_target)
    kappa = float(_kappa(np.asarray(c, dtype=float), t, gain_sum))
    if kappa >= 1.0:
        raise DomainError(f"aggregate circularity {c} leaves no finite power allocation")
    g = 1.0 / math.sqrt(1.0 - kappa * kappa)
    power = x * g - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        circularity = np.where(power > 0.0, x * kappa * g / power, 0.0)
    return [
        SignalParams(power=max(float(p), 0.0), circularity=float(np.clip(cc, 0.0, 1.0)))
        for p, cc in zip(power, circularity)
    ]


def aggregate_load(
    c: float,
    r: float,
    profile: RateProfile,
    improper_users: Sequence[int],
    noise: NoiseState,
    scenario: CanonicalScenario,
) -> float:
    """sum_k 2^{alpha_k r} a_k / (sum_k a_k S(c)); the PU constraint holds iff this is <= 1."""
    x, gains, _ = _user_arrays(improper_users, r, profile, scenario)
    gain_sum = float(gains.sum())
    t = float(tolerable_interference(c, noise, scenario.pu_snr, scenario.pu_rate_target))
    if math.isinf(t):
        return 0.0
    tau = t / gain_sum
    kappa = tau * c / (1.0 + tau)
    supply = (1.0 + tau) * math.sqrt(max(1.0 - kappa * kappa, 0.0))
    return float(np.dot(x, gains)) / (gain_sum * supply)


def next_activation(
    r: float,
    profile: RateProfile,
    improper_users: Sequence[int],
    noise: NoiseState,
    scenario: CanonicalScenario,
    scan_points: int = ACTIVATION_SCAN_POINTS,
) -> Activation:
    """Smallest aggregate circularity c' at which some user saturates.

    Power saturation comes first for argmin (P_k + 1)/2^{alpha_k r};
    circularity saturation for argmin alpha_k.  ``rule_agrees`` records
    whether argmin (P_k - 1)/2^{alpha_k r} picks the same user.
    """
    users = list(improper_users)
    if not users:
        raise DomainError("next_activation needs at least one improper user")
    x, gains, budgets = _user_arrays(users, r, profile, scenario)
    kappa_power = np.sqrt(np.clip(1.0 - (x / (budgets + 1.0)) ** 2, 0.0, 1.0))
    u = x**-2.0
    kappa_circularity = (1.0 - u) / (1.0 + u)

    i_power = int(np.argmin(kappa_power))
    i_circ = int(np.argmin(kappa_circularity))
    rule_agrees: Optional[bool]
    if kappa_power[i_power] <= kappa_circularity[i_circ]:
        kind: Literal["power", "circularity"] = "power"
        index, target = i_power, float(kappa_power[i_power])
        rule_agrees = int(np.argmin((budgets - 1.0) / x)) == i_power
    else:
        kind = "circularity"
        index, target = i_circ, float(kappa_circularity[i_circ])
        rule_agrees = None

    gain_sum = float(gains.sum())

    def excess(c: float) -> float:
        t = tolerable_interference(c, noise, scenario.pu_snr, scenario.pu_rate_target)
        return float(_kappa(np.asarray(c, dtype=float), t, gain_sum)) - target

    if target <= 0.0:
        return Activation(user=users[index], c=0.0, kind=kind, rule_agrees=rule_agrees)
    grid = np.linspace(0.0, 1.0, scan_points)
    t_grid = tolerable_interference(grid, noise, scenario.pu_snr, scenario.pu_rate_target)
    values = _kappa(grid, t_grid, gain_sum) - target
    if values[-1] < 0.0:
        return Activation(user=None, c=1.0, kind="none", rule_agrees=None)
    upper = int(np.argmax(values >= 0.0))
    if values[upper] == 0.0:
        c_prime = float(grid[upper])
    else:
        c_prime = float(brentq(excess, grid[upper - 1], grid[upper], xtol=ROOT_XTOL))
    return Activation(user=users[index], c=c_prime, kind=kind, rule_agrees=rule_agrees)


def _pu_satisfied(noise: NoiseState, scenario: CanonicalScenario) -> bool:
    if scenario.pu_rate_target == 0.0:
        return True
    C = constant_term(
        scenario.pu_snr, scenario.beta, noise.improper_power, noise.improper_circularity
    )
    return C <= 1e-12 * (1.0 + scenario.pu_snr + noise.improper_power) ** 2


def _build_point(
    r: float,
    profile: RateProfile,
    scenario: CanonicalScenario,
    params: Sequence[SignalParams],
    noise: NoiseState,
    fixed: Sequence[FixedUser],
    mode: SignalingMode,
    iterations: int,
) -> BoundaryPoint:
    active = profile.active_users
    saturated = tuple(
        k
        for k in active
        if params[k].circularity == 0.0
        and params[k].power >= scenario.budgets[k] * (1.0 - _SATURATION_MARGIN)
    )
    improper = tuple(k for k in active if k not in saturated)
    return BoundaryPoint(
        r=r,
        alpha=profile.alpha,
        params=tuple(params),
        aggregate_c=circularity_of_aggregate(params, scenario.interference_gains),
        active_users=active,
        saturated_users=saturated,
        improper_users=improper,
        fixed_users=tuple(fixed),
        noise=noise,
        igs_required=igs_required(scenario, improper, active)
        and pu_constraint_binding(scenario, saturated, improper),
        mode=mode,
        iterations=iterations,
    )


def _clip_to_budget(params: SignalParams, budget: float) -> SignalParams:
    if params.power <= budget:
        return params
    return params.model_copy(update={"power": budget})


def solve_feasibility(
    r: float,
    profile: RateProfile,
    scenario: CanonicalScenario,
    tol: float = DEFAULT_FIXED_USER_TOL,
    mode: SignalingMode = "igs",
) -> FeasibilityResult:
    """Decide whether every SU can reach alpha_k r without breaking the PU target.

    Users whose budget exactly supports alpha_k r are fixed at (P_k, 0) up
    front.  The remaining users are handled as one aggregate SU: its optimal
    circularity is compared with the first saturation point c'; if it lies
    beyond c', the saturating user is frozen there and folded into the PU
    noise, and the reduced problem is solved again.
    """
    K = scenario.num_users
    if len(profile.alpha) != K:
        raise DomainError(f"rate profile has {len(profile.alpha)} weights for {K} users")
    params: List[SignalParams] = [SignalParams(power=0.0)] * K
    noise = NoiseState.proper()
    active = profile.active_users
    if r <= 0.0:
        return Feasible(point=_build_point(0.0, profile, scenario, params, noise, [], mode, 0))

    gains, budgets, alpha = scenario.interference_gains, scenario.budgets, profile.alpha
    for k in active:
        cap = math.log2(1.0 + budgets[k])
        if cap < alpha[k] * r - tol:
            return Infeasible(
                reason=f"user {k + 1} needs {alpha[k] * r:.6g} b/s/Hz but its budget allows {cap:.6g}",
                user=k,
            )

    fixed: List[FixedUser] = []
    saturated = [k for k in active if abs(math.log2(1.0 + budgets[k]) - alpha[k] * r) <= tol]
    for k in saturated:
        params[k] = SignalParams(power=budgets[k])
        noise = noise.plus_interference(gains[k] * budgets[k], 0.0)
        fixed.append(FixedUser(user=k, params=params[k], kind="budget"))

    improper: List[int] = []
    for k in active:
        if k in saturated:
            continue
        if gains[k] == 0.0:
            # invisible to the PU: proper at the rate-tight power
            params[k] = SignalParams(power=min(2.0 ** (alpha[k] * r) - 1.0, budgets[k]))
        else:
            improper.append(k)

    t_proper = float(
        tolerable_interference(0.0, NoiseState.proper(), scenario.pu_snr, scenario.pu_rate_target)
    )
    if sum(gains[k] * budgets[k] for k in active) <= t_proper:
        for k in improper:
            params[k] = SignalParams(power=min(2.0 ** (alpha[k] * r) - 1.0, budgets[k]))
        return Feasible(point=_build_point(r, profile, scenario, params, noise, fixed, mode, 0))

    iterations = 0
    while improper:
        if not _pu_satisfied(noise, scenario):
            return Infeasible(reason="frozen users alone violate the PU rate target")
        iterations += 1
        if mode == "igs":
            aggregate = SingleUserProblem(
                pu_snr=scenario.pu_snr,
                gain=sum(gains[k] for k in improper),
                budget=sum(budgets[k] for k in improper),
                pu_rate_target=scenario.pu_rate_target,
                noise=noise,
            )
            c_star = solve_p_in(aggregate).c_star
        else:
            c_star = 0.0
        activation = next_activation(r, profile, improper, noise, scenario)
        log_solver_step(
            "feasibility",
            r=r,
            iteration=iterations,
            users=improper,
            c_star=c_star,
            c_prime=activation.c,
            kind=activation.kind,
        )

        if c_star <= activation.c or activation.user is None:
            load = aggregate_load(c_star, r, profile, improper, noise, scenario)
            if load > 1.0 + 1e-12:
                return Infeasible(reason=f"PU rate target violated (aggregate load {load:.6g})")
            tight = user_params_from_c(c_star, r, profile, improper, noise, scenario)
            for k, s in zip(improper, tight):
                params[k] = _clip_to_budget(s, budgets[k])
            improper = []
            break

        k_prime = activation.user
        frozen = user_params_from_c(activation.c, r, profile, improper, noise, scenario)[
            improper.index(k_prime)
        ]
        frozen = _clip_to_budget(frozen, budgets[k_prime])
        params[k_prime] = frozen
        interference = gains[k_prime] * frozen.power
        noise = noise.plus_interference(interference, interference * frozen.circularity)
        fixed.append(
            FixedUser(
                user=k_prime,
                params=frozen,
                kind="power" if activation.kind == "power" else "circularity",
                rule_agrees=activation.rule_agrees,
            )
        )
        improper.remove(k_prime)

    if not _pu_satisfied(noise, scenario):
        return Infeasible(reason="frozen users alone violate the PU rate target")
    achieved = pu_rate(scenario, params)
    if achieved < scenario.pu_rate_target - RESIDUAL_TOL:
        return Infeasible(
            reason=f"PU rate {achieved:.10g} below target {scenario.pu_rate_target:.10g}"
        )
    return Feasible(
        point=_build_point(r, profile, scenario, params, noise, fixed, mode, iterations)
    )


def solve_boundary_point(
    profile: RateProfile,
    scenario: CanonicalScenario,
    tol: float = DEFAULT_BISECTION_TOL,
    mode: SignalingMode = "igs",
    max_iter: int = DEFAULT_BISECTION_MAX_ITER,
    fixed_user_tol: float = DEFAULT_FIXED_USER_TOL,
) -> BoundaryPoint:
    """Largest r feasible along ``profile``, found by bisection on [0, min_k log2(1+P_k)/alpha_k]."""
    active = profile.active_users
    if not active:
        raise DomainError("rate profile has no active user")
    upper = min(math.log2(1.0 + scenario.budgets[k]) / profile.alpha[k] for k in active)

    top = solve_feasibility(upper, profile, scenario, fixed_user_tol, mode)
    if isinstance(top, Feasible):
        log_bisection_result("rate profile", 0, upper, upper, True)
        return top.point

    lower = 0.0
    base = solve_feasibility(0.0, profile, scenario, fixed_user_tol, mode)
    assert isinstance(base, Feasible)
    best = base.point
    iterations = 0
    while upper - lower > tol and iterations < max_iter:
        middle = 0.5 * (lower + upper)
        result = solve_feasibility(middle, profile, scenario, fixed_user_tol, mode)
        if isinstance(result, Feasible):
            lower, best = middle, result.point
        else:
            upper = middle
        iterations += 1
    log_bisection_result("rate profile", iterations, lower, upper, upper - lower <= tol)
    return best


def _solve_profile(
    profile: RateProfile,
    scenario: CanonicalScenario,
    mode: SignalingMode,
    tol: float,
    max_iter: int,
) -> BoundaryPoint:
    return solve_boundary_point(profile, scenario, tol=tol, mode=mode, max_iter=max_iter)


def two_user_profiles(n_points: int) -> List[RateProfile]:
    if n_points < 2:
        raise DomainError(f"a boundary sweep needs at least 2 points, got {n_points}")
    return [RateProfile.two_user(a) for a in np.linspace(0.0, 1.0, n_points)]


def sweep_region(
    scenario: CanonicalScenario,
    n_points: int,
    mode: SignalingMode = "igs",
    tol: float = DEFAULT_BISECTION_TOL,
    max_iter: int = DEFAULT_BISECTION_MAX_ITER,
    workers: int = 1,
) -> List[BoundaryPoint]:
    """Two-user boundary over alpha_1 in {0, 1/(n-1), ..., 1}, sorted by R_1."""
    if scenario.num_users != 2:
        raise DomainError(f"boundary sweeps are two-user only, got K={scenario.num_users}")
    solve = partial(_solve_profile, scenario=scenario, mode=mode, tol=tol, max_iter=max_iter)
    points = map_ordered(solve, two_user_profiles(n_points), workers)
    logger.debug(f"Swept {len(points)} {mode.upper()} boundary points")
    return sorted(points, key=lambda point: point.rates[0])


def region_points(points: Sequence[BoundaryPoint]) -> List[Tuple[float, float]]:
    """(R_1, R_2) pairs of a two-user sweep."""
    return [(point.rates[0], point.rates[1]) for point in points]


def _pareto_front(points: np.ndarray) -> np.ndarray:
    keep = []
    for i, (x, y) in enumerate(points):
        dominated = np.any(
            (points[:, 0] >= x) & (points[:, 1] >= y) & ((points[:, 0] > x) | (points[:, 1] > y))
        )
        if not dominated:
            keep.append(i)
    front = points[keep]
    return front[np.lexsort((-front[:, 1], front[:, 0]))]


def time_sharing_hull(
    region_a: Sequence[Tuple[float, float]], region_b: Sequence[Tuple[float, float]]
) -> List[Tuple[float, float]]:
    """Upper-right frontier of the convex hull of two sampled two-user regions."""
    union = np.unique(
        np.vstack([np.asarray(region_a, dtype=float).reshape(-1, 2),
                   np.asarray(region_b, dtype=float).reshape(-1, 2),
                   np.zeros((1, 2))]),
        axis=0,
    )
    try:
        vertices = union[ConvexHull(union).vertices]
    except (RuntimeError, ValueError):
        # fewer than three affinely independent points
        vertices = union
    front = _pareto_front(vertices)
    return [(float(x), float(y)) for x, y in front if x > 0.0 or y > 0.0]


def compare_modes(
    igs_points: Sequence[BoundaryPoint], pgs_points: Sequence[BoundaryPoint]
) -> List[ModeComparison]:
    """Match IGS and PGS points solved along the same profiles, in IGS order."""
    pgs_by_alpha = {point.alpha: point for point in pgs_points}
    comparisons = []
    for igs in igs_points:
        pgs = pgs_by_alpha.get(igs.alpha)
        if pgs is None:
            raise DomainError(f"no PGS point solved along alpha={igs.alpha}")
        comparisons.append(
            ModeComparison(
                alpha=igs.alpha,
                r_igs=igs.r,
                r_pgs=pgs.r,
                relative_gain=igs.r / pgs.r - 1.0 if pgs.r > 0.0 else 0.0,
            )
        )
    return comparisons

