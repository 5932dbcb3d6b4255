"""Monte Carlo experiment command."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from ..experiments import ExperimentConfig, SumRateCurve, run_experiment, run_manifest
from ..logging_utils import log_command_call
from ..output import Series, Table, to_jsonable
from ..solvers.base import ConfigurationError
from .base import BaseCommands, CommandOutput, parse_floats

logger = logging.getLogger(__name__)

CURVE_COLUMNS = (
    "level",
    "num_users",
    "trials",
    "infeasible_trials",
    "igs_mean",
    "igs_stderr",
    "pgs_mean",
    "pgs_stderr",
    "igs_per_user",
    "pgs_per_user",
)


def manifest_path(out: Union[str, Path]) -> Path:
    """``results/fig7.csv`` -> ``results/fig7.manifest.json``."""
    out = Path(out)
    return out.with_name(f"{out.stem}.manifest.json")


class ExperimentCommands(BaseCommands):
    """Sum-rate studies over random Rayleigh channels."""

    def _experiment_config(self, name: str, **overrides: Any) -> ExperimentConfig:
        values = {key: value for key, value in overrides.items() if value is not None}
        values.setdefault("trials", self.config.trials)
        values.setdefault("seed", self.config.seed)
        values.setdefault("workers", self.config.workers)
        values.setdefault("bisection_tol", self.config.bisection_tol)
        try:
            if name == "fig7":
                return ExperimentConfig.fig7(**values)
            if name == "fig8":
                return ExperimentConfig.fig8(**values)
        except ValidationError as e:
            details = e.errors()[0]
            raise ConfigurationError(f"Invalid experiment option: {details['msg']}") from e
        raise ConfigurationError(f"unknown experiment '{name}'; choose fig7 or fig8")

    @log_command_call
    def experiment(
        self,
        name: str,
        budgets: Optional[str] = None,
        users: Optional[str] = None,
        alpha: Optional[str] = None,
        fraction: Optional[float] = None,
        out: Optional[Union[str, Path]] = None,
    ) -> CommandOutput:
        """
        Run a named Monte Carlo study.

        Args:
            name: 'fig7' (sum rate vs budget) or 'fig8' (sum rate vs number of users)
            budgets: Comma-separated SU budgets (fig7 sweep, or the fixed fig8 budget)
            users: User counts for fig8, as '1-6' or '1,2,4'
            alpha: Rate profile for fig7
            fraction: PU target as a share of its capacity
            out: Output path; the run manifest is written next to it

        Returns:
            Curve table plus the manifest as an extra file
        """
        overrides: Dict[str, Any] = {"pu_rate_fraction": fraction}
        if budgets is not None:
            overrides["budgets"] = parse_floats(budgets, "--budgets")
        if users is not None:
            overrides["user_counts"] = parse_user_counts(users)
        if alpha is not None:
            weights = parse_floats(alpha, "--alpha")
            overrides["alpha"] = weights
            overrides["num_users"] = len(weights)
            overrides["num_antennas"] = len(weights)
        config = self._experiment_config(name, **overrides)
        curve = run_experiment(config)

        manifest = run_manifest(config, name)
        flags = {
            "name": name,
            "budgets": budgets,
            "users": users,
            "alpha": alpha,
            "fraction": fraction,
            "seed": config.seed,
            "trials": config.trials,
        }
        header = self._header(
            "experiment",
            flags,
            git=manifest["git"],
            level="SU budget (canonical)" if name == "fig7" else "number of users K",
        )
        table = curve_table(curve, header)
        xlabel = "SU power budget" if name == "fig7" else "number of users K"
        series = [
            Series(label="IGS", x=_levels(curve), y=tuple(p.igs_mean for p in curve.points)),
            Series(
                label="PGS",
                x=_levels(curve),
                y=tuple(p.pgs_mean for p in curve.points),
                style="--",
            ),
        ]
        text = self._render(table, series, xlabel, "average sum rate (bit/s/Hz)")
        extra = {}
        if out is not None:
            extra[str(manifest_path(out))] = json.dumps(to_jsonable(manifest), indent=2) + "\n"
        return CommandOutput(text=text, extra_files=extra)


def _levels(curve: SumRateCurve) -> tuple:
    return tuple(p.level for p in curve.points)


def curve_table(curve: SumRateCurve, header: Dict[str, Any]) -> Table:
    rows = [
        (
            p.level,
            p.num_users,
            p.trials,
            p.infeasible_trials,
            p.igs_mean,
            p.igs_stderr,
            p.pgs_mean,
            p.pgs_stderr,
            p.igs_per_user,
            p.pgs_per_user,
        )
        for p in curve.points
    ]
    return Table(columns=CURVE_COLUMNS, rows=rows, header=header)


def parse_user_counts(text: str) -> tuple:
    """'1-6' -> (1, ..., 6); '1,2,4' -> (1, 2, 4)."""
    try:
        if "-" in text:
            first, last = (int(part) for part in text.split("-", 1))
            return tuple(range(first, last + 1))
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ConfigurationError(f"--users must look like '1-6' or '1,2,4', got '{text}'") from None
