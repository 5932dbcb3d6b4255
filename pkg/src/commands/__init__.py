"""Command classes behind the igs-smac subcommands."""

from .base import CommandOutput
from .experiment_commands import ExperimentCommands
from .scenario_commands import ScenarioCommands
from .solver_commands import SolverCommands

__all__ = ["CommandOutput", "ExperimentCommands", "ScenarioCommands", "SolverCommands"]
