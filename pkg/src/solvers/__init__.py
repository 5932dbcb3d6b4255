"""Closed-form IGS solvers, rate-region boundaries and brute-force oracles."""

from .base import (
    ConfigurationError,
    DegenerateChannelError,
    DomainError,
    IgsError,
    InfeasibleScenarioError,
    OracleRefusedError,
    ScenarioFormatError,
    VerificationError,
)
from .boundary import BoundaryPoint, RateProfile, solve_boundary_point, sweep_region
from .canonicalize import CanonicalizationResult, PhysicalScenario, to_canonical
from .model import CanonicalScenario, NoiseState, SignalParams
from .single_user import SingleUserProblem, SingleUserSolution, solve_p_in

__all__ = [
    "BoundaryPoint",
    "CanonicalScenario",
    "CanonicalizationResult",
    "ConfigurationError",
    "DegenerateChannelError",
    "DomainError",
    "IgsError",
    "InfeasibleScenarioError",
    "NoiseState",
    "OracleRefusedError",
    "PhysicalScenario",
    "RateProfile",
    "ScenarioFormatError",
    "SignalParams",
    "SingleUserProblem",
    "SingleUserSolution",
    "VerificationError",
    "solve_boundary_point",
    "solve_p_in",
    "sweep_region",
    "to_canonical",
]
