"""Single SU against a rate-protected PU whose receiver sees improper noise.

The PU rate constraint, written at equality in terms of the interference
power x = a_S p_S seen by the PU, is the quadratic

    x^2 (1 - c^2) + 2x [beta + p_I (1 - c c_I)] + C = 0,
    C = 1 + 2 p_I + p_I^2 (1 - c_I^2) - (1 - beta)(p + 2 + 2 p_I),

whose nonnegative root t(c) is the tolerable interference power.  The
largest admissible SU power is q(c) = t(c) / a_S.  The SU rate along q(c)
is unimodal in c, so the optimal circularity is the smaller of the point
where the budget starts to bind (c_B) and the point where the rate stops
increasing (c_R).
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import bisect

from ..logging_utils import log_solver_step
from .base import RESIDUAL_TOL, ROOT_XTOL, InfeasibleScenarioError
from .model import (
    NoiseState,
    SignalParams,
    beta_of,
    pu_capacity,
    pu_rate_improper_noise,
    su_rate,
    su_rate_value,
)

logger = logging.getLogger(__name__)

# Relative slack on the constant term before a problem is declared infeasible
_FEASIBILITY_SLACK = 1e-12


def constant_term(
    pu_snr: float, beta: float, improper_power: float, improper_circularity: float
) -> float:
    """Constant C of the rate-constraint quadratic; C <= 0 iff R(0, 0) >= target."""
    p_i, c_i = improper_power, improper_circularity
    return 1.0 + 2.0 * p_i + p_i * p_i * (1.0 - c_i * c_i) - (1.0 - beta) * (
        pu_snr + 2.0 + 2.0 * p_i
    )


def _checked_constant(
    pu_snr: float, beta: float, improper_power: float, improper_circularity: float
) -> float:
    C = constant_term(pu_snr, beta, improper_power, improper_circularity)
    scale = (1.0 + pu_snr + improper_power) ** 2
    if C > _FEASIBILITY_SLACK * scale:
        raise InfeasibleScenarioError(
            f"PU rate target unattainable even without SU interference (C = {C:.6g} > 0)"
        )
    return min(C, 0.0)


def interference_limit(
    c: ArrayLike,
    pu_snr: float,
    beta: float,
    improper_power: float = 0.0,
    improper_circularity: float = 0.0,
) -> np.ndarray:
    """Tolerable interference power t(c) at the PU receiver (vectorized over c).

    Returns +inf where the PU constraint cannot bind (zero rate target, or
    maximally improper interference with a nonpositive linear term).

    Raises:
        InfeasibleScenarioError: if the target is missed with no interference
    """
    c = np.asarray(c, dtype=float)
    if not math.isfinite(beta):
        return np.full(c.shape, math.inf)
    C = _checked_constant(pu_snr, beta, improper_power, improper_circularity)
    A = 1.0 - c * c
    B = 2.0 * (beta + improper_power * (1.0 - c * improper_circularity))
    sqrt_d = np.sqrt(np.maximum(B * B - 4.0 * A * C, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(
            B > 0.0,
            -2.0 * C / (B + sqrt_d),
            np.where(A > 0.0, (-B + sqrt_d) / (2.0 * A), math.inf),
        )
    return np.maximum(root, 0.0)


class SingleUserProblem(BaseModel):
    """Problem P_IN: one SU of gain a_S and budget P_S, PU noise state rho."""

    model_config = ConfigDict(frozen=True)

    pu_snr: float = Field(ge=0.0)
    gain: float = Field(ge=0.0)
    budget: float = Field(gt=0.0)
    pu_rate_target: float = Field(ge=0.0)
    noise: NoiseState = Field(default_factory=NoiseState.proper)

    @classmethod
    def from_improper_noise(
        cls,
        pu_snr: float,
        gain: float,
        budget: float,
        pu_rate_target: float,
        improper_power: float = 0.0,
        improper_circularity: float = 0.0,
    ) -> "SingleUserProblem":
        """Build the problem from (p_I, c_I) instead of (p_N, p~_N)."""
        noise = NoiseState(
            total_variance=1.0 + improper_power,
            complementary_magnitude=improper_power * improper_circularity,
        )
        return cls(
            pu_snr=pu_snr,
            gain=gain,
            budget=budget,
            pu_rate_target=pu_rate_target,
            noise=noise,
        )

    @property
    def beta(self) -> float:
        return beta_of(self.pu_snr, self.pu_rate_target)

    @property
    def improper_power(self) -> float:
        return self.noise.improper_power

    @property
    def improper_circularity(self) -> float:
        return self.noise.improper_circularity

    @property
    def constant(self) -> float:
        return constant_term(
            self.pu_snr, self.beta, self.improper_power, self.improper_circularity
        )

    @property
    def constraint_inactive(self) -> bool:
        """The PU rate constraint can never bind."""
        return self.gain == 0.0 or self.pu_rate_target == 0.0

    @property
    def feasible(self) -> bool:
        if self.pu_rate_target == 0.0:
            return True
        scale = (1.0 + self.pu_snr + self.improper_power) ** 2
        return self.constant <= _FEASIBILITY_SLACK * scale

    @property
    def effective_pu_snr(self) -> float:
        """p_bar = p 2^R / (2^{2R} - 1)."""
        denominator = 2.0 ** (2.0 * self.pu_rate_target) - 1.0
        if denominator <= 0.0:
            return math.inf
        return self.pu_snr * 2.0**self.pu_rate_target / denominator

    def require_feasible(self) -> None:
        if not self.feasible:
            raise InfeasibleScenarioError(
                f"PU rate target {self.pu_rate_target:.6g} b/s/Hz cannot be met: "
                f"PU rate without SU interference is "
                f"{pu_rate_improper_noise(self.pu_snr, 0.0, SignalParams(power=0.0), self.noise):.6g}",
                max_rate=pu_capacity(self.pu_snr),
            )


class SingleUserSolution(BaseModel):
    """Optimal (p*, c*) of P_IN together with the two thresholds and xi."""

    model_config = ConfigDict(frozen=True)

    c_star: float
    p_star: float
    c_b: float
    c_r: float
    xi: float
    achieved_su_rate: float
    achieved_pu_rate: float
    constraint_active: bool = True

    @property
    def improper(self) -> bool:
        return self.c_star > 0.0

    @property
    def params(self) -> SignalParams:
        return SignalParams(power=self.p_star, circularity=self.c_star)


def q_of_c(prob: SingleUserProblem, c_s: ArrayLike) -> np.ndarray:
    """Largest SU power keeping the PU exactly at its target, given circularity c_s.

    +inf when a_S = 0 (the constraint never binds).
    """
    prob.require_feasible()
    c = np.asarray(c_s, dtype=float)
    if prob.gain == 0.0:
        return np.full(c.shape, math.inf)
    t = interference_limit(
        c, prob.pu_snr, prob.beta, prob.improper_power, prob.improper_circularity
    )
    return t / prob.gain


def q_at_maximal_impropriety(prob: SingleUserProblem) -> float:
    """q(1) through p_bar: [p_bar^2 - m (p_I(1+c_I) + beta)] / (2 a_S m), m = p_I(1-c_I) + beta."""
    m = prob.improper_power * (1.0 - prob.improper_circularity) + prob.beta
    if prob.gain == 0.0 or m <= 0.0:
        return math.inf
    numerator = prob.effective_pu_snr**2 - m * (
        prob.improper_power * (1.0 + prob.improper_circularity) + prob.beta
    )
    return max(numerator, 0.0) / (2.0 * prob.gain * m)


def rate_derivative_indicator(prob: SingleUserProblem, c_s: float) -> float:
    """Expression whose sign is that of dR_S/dc along p_S = q(c).

    a_S q c (1 - (p_I + beta)/a_S) + p_I c_I (1 + q).
    """
    q = float(q_of_c(prob, c_s))
    slope = prob.gain - prob.beta - prob.improper_power
    offset = prob.improper_power * prob.improper_circularity
    if math.isinf(q):
        lead = c_s * slope + offset
        return math.copysign(math.inf, lead) if lead != 0.0 else 0.0
    return q * c_s * slope + offset * (1.0 + q)


def rate_derivative_sign(prob: SingleUserProblem, c_s: float) -> int:
    """-1, 0 or +1: whether the SU rate along q(c) decreases, is flat or increases at c_s."""
    value = rate_derivative_indicator(prob, c_s)
    return int(np.sign(value))


def xi(prob: SingleUserProblem) -> float:
    """Gain threshold above which maximally improper signaling is rate-optimal.

    Reduces to beta for proper noise and to p_I + beta for c_I = 0; NaN when
    the closed form degenerates (0/0).
    """
    if not math.isfinite(prob.beta):
        return -math.inf
    p_i, c_i = prob.improper_power, prob.improper_circularity
    m = p_i * (1.0 - c_i) + prob.beta
    if p_i * c_i == 0.0:
        return m
    N = -min(prob.constant, 0.0)
    denominator = prob.effective_pu_snr**2 - m * m
    if m <= 0.0:
        return m * N / denominator if denominator > 0.0 else 0.0
    if denominator <= 0.0:
        logger.debug(f"xi denominator {denominator:.3e} <= 0; c_R falls back to root finding")
        return math.nan
    return m * N / denominator


def c_b(prob: SingleUserProblem) -> float:
    """Largest circularity at which q(c) does not exceed max(P_S, q(0))."""
    prob.require_feasible()
    if prob.constraint_inactive:
        return 0.0
    q0, q1 = q_of_c(prob, [0.0, 1.0])
    if prob.budget <= q0:
        return 0.0
    if q1 <= prob.budget:
        return 1.0
    # Equality at p_S = P_S: T^2 c^2 + 2 T p_I c_I c - K = 0 with T = a_S P_S
    T = prob.gain * prob.budget
    K = T * T + 2.0 * T * (prob.beta + prob.improper_power) + min(prob.constant, 0.0)
    b = 2.0 * T * prob.improper_power * prob.improper_circularity
    root = 2.0 * K / (b + math.sqrt(b * b + 4.0 * T * T * K))
    return float(np.clip(root, 0.0, 1.0))


def _c_r_candidates(prob: SingleUserProblem) -> List[float]:
    """Roots in (w/g, 1] of the second-order equation obtained with q = w/(g c - w)."""
    a = prob.gain
    w = prob.improper_power * prob.improper_circularity
    s = prob.beta + prob.improper_power
    g = s - a
    C = min(prob.constant, 0.0)
    coefficients = [
        -a * a * w * w - 2.0 * a * w * w * g + C * g * g,
        2.0 * a * w * s * g + 2.0 * a * w**3 - 2.0 * C * g * w,
        a * a * w * w - 2.0 * a * w * w * s + C * w * w,
    ]
    roots = np.roots(coefficients)
    lower = w / g
    return sorted(
        float(r.real)
        for r in roots
        if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and lower < r.real <= 1.0 + 1e-12
    )


def _c_r_by_bisection(prob: SingleUserProblem) -> float:
    return float(
        bisect(lambda c: rate_derivative_indicator(prob, c), 0.0, 1.0, xtol=ROOT_XTOL)
    )


def c_r(prob: SingleUserProblem) -> float:
    """Largest circularity up to which the SU rate along q(c) is nondecreasing."""
    prob.require_feasible()
    if prob.constraint_inactive:
        return 0.0
    threshold = xi(prob)
    m = prob.improper_power * (1.0 - prob.improper_circularity) + prob.beta
    if m <= 0.0 or (not math.isnan(threshold) and prob.gain >= threshold):
        return 1.0
    if prob.improper_power * prob.improper_circularity == 0.0:
        return 0.0
    if rate_derivative_indicator(prob, 1.0) >= 0.0:
        return 1.0

    best: Optional[Tuple[float, float]] = None
    for candidate in _c_r_candidates(prob):
        c = min(candidate, 1.0)
        q = float(q_of_c(prob, c))
        scale = max(1.0, abs(q * c * (prob.gain - prob.beta - prob.improper_power)), q)
        residual = abs(rate_derivative_indicator(prob, c)) / scale
        if residual <= RESIDUAL_TOL and (best is None or residual < best[1]):
            best = (c, residual)
    if best is not None:
        return best[0]
    log_solver_step("c_r", fallback="bisection", gain=prob.gain, xi=threshold)
    return _c_r_by_bisection(prob)


def solve_p_in(prob: SingleUserProblem) -> SingleUserSolution:
    """Optimal circularity c* = min(c_B, c_R) and power p* = min(q(c*), P_S).

    Raises:
        InfeasibleScenarioError: if the PU target is missed with the SU silent
    """
    prob.require_feasible()
    threshold = xi(prob)
    if prob.constraint_inactive:
        c_star, p_star, cb, cr = 0.0, prob.budget, 0.0, 0.0
        active = False
    else:
        cb, cr = c_b(prob), c_r(prob)
        c_star = min(cb, cr)
        p_star = min(float(q_of_c(prob, c_star)), prob.budget)
        active = True
    params = SignalParams(power=p_star, circularity=c_star)
    solution = SingleUserSolution(
        c_star=c_star,
        p_star=p_star,
        c_b=cb,
        c_r=cr,
        xi=threshold,
        achieved_su_rate=su_rate(params),
        achieved_pu_rate=pu_rate_improper_noise(prob.pu_snr, prob.gain, params, prob.noise),
        constraint_active=active,
    )
    log_solver_step(
        "single_user", c_b=cb, c_r=cr, xi=threshold, c_star=c_star, p_star=p_star
    )
    return solution


def normalized_rate_curve(prob: SingleUserProblem, n: int = 201) -> List[Tuple[float, float]]:
    """SU rate with p_S = min(q(c), P_S), normalized by the proper-signaling rate."""
    c = np.linspace(0.0, 1.0, n)
    power = np.minimum(q_of_c(prob, c), prob.budget)
    rates = su_rate_value(power, c)
    if rates[0] <= 0.0:
        return [(float(ci), 0.0) for ci in c]
    return [(float(ci), float(ri)) for ci, ri in zip(c, rates / rates[0])]
