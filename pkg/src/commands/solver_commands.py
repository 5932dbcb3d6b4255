"""Commands wrapping the single-user solver, the boundary solver and the oracles."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..experiments import gen_rayleigh, preset_canonical, random_single_user_problem
from ..logging_utils import log_command_call
from ..output import Series, Table
from ..solvers.base import DomainError, OracleRefusedError
from ..solvers.boundary import (
    BoundaryPoint,
    RateProfile,
    SignalingMode,
    compare_modes,
    igs_required_high_budget,
    region_points,
    solve_boundary_point,
    sweep_region,
    time_sharing_hull,
)
from ..solvers.canonicalize import to_canonical
from ..solvers.model import CanonicalScenario
from ..solvers.oracle import (
    MAX_BOUNDARY_USERS,
    OracleComparison,
    compare_boundary,
    compare_single_user,
)
from ..solvers.single_user import SingleUserProblem, normalized_rate_curve, solve_p_in
from .base import BaseCommands, CommandOutput, parse_floats

logger = logging.getLogger(__name__)


def point_columns(num_users: int) -> Tuple[str, ...]:
    """mode, alpha_k, r, R_k, c, p_k, c_k, igs_required, then sum_rate and relative_gain."""
    users = range(1, num_users + 1)
    return (
        ("mode",)
        + tuple(f"alpha_{k}" for k in users)
        + ("r",)
        + tuple(f"R_{k}" for k in users)
        + ("c",)
        + tuple(f"p_{k}" for k in users)
        + tuple(f"c_{k}" for k in users)
        + ("igs_required", "sum_rate", "relative_gain")
    )


def _point_row(
    mode: str, point: BoundaryPoint, relative_gain: Optional[float] = None
) -> Tuple[Any, ...]:
    return (
        (mode,)
        + point.alpha
        + (point.r,)
        + point.rates
        + (point.aggregate_c,)
        + point.powers
        + point.circularities
        + (point.igs_required, point.sum_rate, relative_gain)
    )


def _hull_row(label: str, r1: float, r2: float) -> Tuple[Any, ...]:
    return (label, None, None, None, r1, r2) + (None,) * 5 + (None, r1 + r2, None)


class SolverCommands(BaseCommands):
    """Single-user optimum, rate-region boundary and oracle checks."""

    @log_command_call
    def single_user(
        self,
        pu_snr: float,
        gain: float,
        budget: float,
        pu_rate_target: Optional[float] = None,
        pu_rate_fraction: Optional[float] = None,
        improper_power: float = 0.0,
        improper_circularity: float = 0.0,
        sweep_c: Optional[int] = None,
    ) -> CommandOutput:
        """
        Solve the single-user problem and report thresholds and rates.

        Args:
            pu_snr: PU signal-to-noise ratio p
            gain: SU-to-PU interference gain a_S
            budget: SU power budget P_S
            pu_rate_target: PU rate target in bit/s/Hz
            pu_rate_fraction: Target as a share of the PU capacity (instead of pu_rate_target)
            improper_power: Improper noise power p_I seen by the PU
            improper_circularity: Circularity c_I of that noise
            sweep_c: Emit the normalized rate curve on this many circularity points

        Returns:
            Report with c_B, c_R, xi, c*, p* and the achieved rates
        """
        if (pu_rate_target is None) == (pu_rate_fraction is None):
            raise DomainError("give exactly one of --target or --fraction")
        if pu_rate_target is None:
            if not 0.0 < pu_rate_fraction <= 1.0:  # type: ignore[operator]
                raise DomainError(f"fraction must lie in (0, 1], got {pu_rate_fraction}")
            pu_rate_target = pu_rate_fraction * math.log2(1.0 + pu_snr)  # type: ignore[operator]
        try:
            prob = SingleUserProblem.from_improper_noise(
                pu_snr, gain, budget, pu_rate_target, improper_power, improper_circularity
            )
        except ValueError as e:
            raise DomainError(str(e)) from e
        solution = solve_p_in(prob)

        flags = {
            "p": pu_snr,
            "a": gain,
            "budget": budget,
            "target": pu_rate_target,
            "p_i": improper_power,
            "c_i": improper_circularity,
            "sweep_c": sweep_c,
        }
        header = self._header("single-user", flags, beta=prob.beta)

        if sweep_c is not None:
            if sweep_c < 2:
                raise DomainError(f"--sweep-c needs at least 2 points, got {sweep_c}")
            curve = normalized_rate_curve(prob, sweep_c)
            header.update({"c_star": solution.c_star, "c_b": solution.c_b, "c_r": solution.c_r})
            table = Table(columns=("c", "normalized_rate"), rows=curve, header=header)
            series = [
                Series(
                    label="R(c)/R(0)",
                    x=tuple(c for c, _ in curve),
                    y=tuple(v for _, v in curve),
                )
            ]
            return CommandOutput(
                text=self._render(table, series, "circularity c", "normalized SU rate")
            )

        report: Dict[str, Any] = solution.model_dump()
        report.update(
            {
                "beta": prob.beta,
                "improper": solution.improper,
                "effective_pu_snr": prob.effective_pu_snr,
            }
        )
        if not solution.constraint_active:
            header["note"] = "PU constraint inactive; the SU transmits properly at full budget"
        table = Table(
            columns=("quantity", "value"),
            rows=[(key, value) for key, value in report.items()],
            header=header,
        )
        return CommandOutput(text=self._render(table, payload=report))

    def _hull_regions(
        self,
        scenario_path: Optional[Union[str, Path]],
        preset: Optional[int],
    ) -> Tuple[CanonicalScenario, CanonicalScenario]:
        if preset is not None and scenario_path is None:
            return preset_canonical(preset, "default"), preset_canonical(preset, "swapped")
        phys = self._physical(scenario_path, preset, None)
        if phys.num_users != 2:
            raise DomainError(f"--hull needs a two-user scenario, got K={phys.num_users}")
        first = self._canonicalize(phys.with_decode_order(None)).scenario
        second = self._canonicalize(phys.with_decode_order((1, 2))).scenario
        return first, second

    @log_command_call
    def boundary(
        self,
        scenario_path: Optional[Union[str, Path]] = None,
        preset: Optional[int] = None,
        order: Optional[str] = None,
        alpha: Optional[str] = None,
        sweep: Optional[int] = None,
        mode: str = "igs",
        hull: bool = False,
    ) -> CommandOutput:
        """
        Solve one boundary point or sweep a two-user boundary.

        Args:
            scenario_path: Scenario JSON file
            preset: Published two-user scenario id (1-3)
            order: Decoding order ('default', 'swapped' or e.g. '2,1')
            alpha: Comma-separated rate profile for a single point
            sweep: Number of profiles on a two-user sweep
            mode: 'igs', 'pgs' or 'both'
            hull: Also combine both decoding orders by time sharing

        Returns:
            One row per boundary point (and hull vertices when requested)
        """
        if mode not in ("igs", "pgs", "both"):
            raise DomainError(f"mode must be igs, pgs or both, got '{mode}'")
        if (alpha is None) == (sweep is None):
            raise DomainError("give exactly one of --alpha or --sweep")
        modes: List[SignalingMode] = ["igs", "pgs"] if mode == "both" else [mode]  # type: ignore[list-item]
        scenario = self._canonical(scenario_path, preset, order)
        flags = {
            "scenario": scenario_path,
            "preset": preset,
            "order": order,
            "alpha": alpha,
            "sweep": sweep,
            "mode": mode,
            "hull": hull,
        }
        header = self._header(
            "boundary",
            flags,
            beta=scenario.beta,
            pu_rate_target=scenario.pu_rate_target,
            igs_high_budget=igs_required_high_budget(scenario, tuple(range(scenario.num_users))),
        )
        columns = point_columns(scenario.num_users)

        if alpha is not None:
            if hull:
                raise DomainError("--hull applies to sweeps only")
            profile = RateProfile.from_weights(parse_floats(alpha, "--alpha"))
            if len(profile.alpha) != scenario.num_users:
                raise DomainError(
                    f"--alpha has {len(profile.alpha)} weights for {scenario.num_users} users"
                )
            points = {
                m: solve_boundary_point(
                    profile,
                    scenario,
                    tol=self.config.bisection_tol,
                    mode=m,
                    max_iter=self.config.bisection_max_iter,
                    fixed_user_tol=self.config.fixed_user_tol,
                )
                for m in modes
            }
            gains = self._relative_gains({m: [p] for m, p in points.items()})
            table = Table(
                columns=columns,
                rows=[
                    _point_row(m, p, gains.get(p.alpha) if m == "igs" else None)
                    for m, p in points.items()
                ],
                header=header,
            )
            payload: Dict[str, Any] = {
                m: dict(p.model_dump(), rates=p.rates, sum_rate=p.sum_rate)
                for m, p in points.items()
            }
            if gains:
                payload["relative_gain"] = gains[profile.alpha]
            return CommandOutput(text=self._render(table, payload=payload))

        swept: Dict[str, List[BoundaryPoint]] = {
            m: sweep_region(
                scenario,
                sweep,  # type: ignore[arg-type]
                mode=m,
                tol=self.config.bisection_tol,
                max_iter=self.config.bisection_max_iter,
                workers=self.config.workers,
            )
            for m in modes
        }
        gains = self._relative_gains(swept)
        regions: Dict[str, List[Tuple[float, float]]] = {
            m: region_points(points_list) for m, points_list in swept.items()
        }
        rows: List[Tuple[Any, ...]] = [
            _point_row(m, p, gains.get(p.alpha) if m == "igs" else None)
            for m, points_list in swept.items()
            for p in points_list
        ]

        if hull:
            first, second = self._hull_regions(scenario_path, preset)
            for m in modes:
                sweeps = [
                    region_points(
                        sweep_region(
                            s,
                            sweep,  # type: ignore[arg-type]
                            mode=m,
                            tol=self.config.bisection_tol,
                            max_iter=self.config.bisection_max_iter,
                            workers=self.config.workers,
                        )
                    )
                    for s in (first, second)
                ]
                vertices = time_sharing_hull(sweeps[0], sweeps[1])
                regions[f"{m}-hull"] = vertices
                rows.extend(_hull_row(f"{m}-hull", r1, r2) for r1, r2 in vertices)

        table = Table(columns=columns, rows=rows, header=header)
        series = [
            Series(
                label=label.upper(),
                x=tuple(r1 for r1, _ in region),
                y=tuple(r2 for _, r2 in region),
                style="--" if label.endswith("hull") else "-",
            )
            for label, region in regions.items()
        ]
        return CommandOutput(
            text=self._render(table, series, "R1 (bit/s/Hz)", "R2 (bit/s/Hz)", payload=regions)
        )

    @staticmethod
    def _relative_gains(
        solved: Mapping[str, Sequence[BoundaryPoint]]
    ) -> Dict[Tuple[float, ...], float]:
        """IGS-over-PGS gain per alpha when both modes were solved."""
        if "igs" not in solved or "pgs" not in solved:
            return {}
        return {c.alpha: c.relative_gain for c in compare_modes(solved["igs"], solved["pgs"])}

    @log_command_call
    def verify(
        self,
        scenario_path: Optional[Union[str, Path]] = None,
        preset: Optional[int] = None,
        order: Optional[str] = None,
        alpha: Optional[str] = None,
        random_seed: Optional[int] = None,
        users: int = 1,
        count: int = 10,
        grid: Optional[int] = None,
    ) -> CommandOutput:
        """
        Compare the closed-form solvers with brute-force grid searches.

        Args:
            scenario_path: Scenario JSON file (boundary check)
            preset: Published two-user scenario id (boundary check)
            order: Decoding order for file/preset scenarios
            alpha: Rate profile (default: equal shares)
            random_seed: Seed for a batch of random problems instead of a scenario
            users: K for random problems (1 checks the single-user solver)
            count: Number of random problems
            grid: Grid points per dimension (default 201 single-user, 61 boundary)

        Returns:
            One row per comparison; ``ok`` is False if any solver value falls
            below its oracle by more than the slack
        """
        from_scenario = scenario_path is not None or preset is not None
        if from_scenario == (random_seed is not None):
            raise DomainError("give either --scenario/--preset or --random")
        if count < 1:
            raise DomainError(f"--count must be >= 1, got {count}")

        comparisons: List[Tuple[str, OracleComparison]] = []
        if from_scenario:
            scenario = self._canonical(scenario_path, preset, order)
            comparisons.append(("boundary", self._compare_boundary(scenario, alpha, grid)))
        elif users == 1:
            n = grid or 201
            for trial in range(count):
                prob = random_single_user_problem(random_seed, trial)  # type: ignore[arg-type]
                comparisons.append((f"single-user#{trial}", compare_single_user(prob, n)))
        else:
            for trial in range(count):
                phys = gen_rayleigh(users, users, random_seed, trial=trial)  # type: ignore[arg-type]
                scenario = to_canonical(phys, rank_tol=self.config.rank_tol).scenario
                comparisons.append(
                    (f"boundary#{trial}", self._compare_boundary(scenario, alpha, grid))
                )

        rows = [(label, c.solver, c.oracle, c.delta, c.grid_n, c.passed) for label, c in comparisons]
        failed = [label for label, c in comparisons if not c.passed]
        flags = {
            "scenario": scenario_path,
            "preset": preset,
            "order": order,
            "alpha": alpha,
            "random": random_seed,
            "users": users if random_seed is not None else None,
            "count": count if random_seed is not None else None,
            "grid": grid,
        }
        header = self._header("verify", flags, failures=len(failed))
        table = Table(
            columns=("check", "solver", "oracle", "delta", "grid_n", "passed"),
            rows=rows,
            header=header,
        )
        if failed:
            logger.error(f"Solver below oracle in {len(failed)} check(s): {', '.join(failed)}")
        return CommandOutput(text=self._render(table), ok=not failed)

    def _compare_boundary(
        self, scenario: CanonicalScenario, alpha: Optional[str], grid: Optional[int]
    ) -> OracleComparison:
        if scenario.num_users > MAX_BOUNDARY_USERS:
            raise OracleRefusedError(
                f"brute-force boundary search is limited to K <= {MAX_BOUNDARY_USERS}, got K={scenario.num_users}"
            )
        if alpha is None:
            profile = RateProfile.fairness(scenario.num_users)
        else:
            profile = RateProfile.from_weights(parse_floats(alpha, "--alpha"))
        return compare_boundary(
            profile, scenario, grid_n=grid or 61, tol=self.config.bisection_tol
        )

