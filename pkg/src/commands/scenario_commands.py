"""Commands that inspect scenarios."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..experiments import preset_canonical
from ..logging_utils import log_command_call
from ..output import Table
from ..scenario_io import scenario_json
from ..solvers.model import pu_capacity
from .base import BaseCommands, CommandOutput

logger = logging.getLogger(__name__)


class ScenarioCommands(BaseCommands):
    """Canonical-model reports."""

    @log_command_call
    def canonical(
        self,
        scenario_path: Optional[Union[str, Path]] = None,
        preset: Optional[int] = None,
        order: Optional[str] = None,
        save_scenario: Optional[Union[str, Path]] = None,
    ) -> CommandOutput:
        """
        Reduce a physical scenario to canonical form and report it.

        Args:
            scenario_path: Scenario JSON file
            preset: Published two-user scenario id (1-3) instead of a file
            order: 'default', 'swapped' or an explicit 1-based decoding order
            save_scenario: Also write the physical scenario, decoding order included, here

        Returns:
            Report with p, a_k, P_k, beta, the PU target and QR diagnostics
        """
        phys = self._physical(scenario_path, preset, order)
        result = self._canonicalize(phys)
        scenario = result.scenario

        reordered = phys.su_direct_matrix[:, list(result.column_order)]
        orthogonality = float(
            np.linalg.norm(result.zf_q.conj().T @ result.zf_q - np.eye(phys.num_users))
        )
        reconstruction = float(np.linalg.norm(result.zf_q @ result.zf_r - reordered))

        report: Dict[str, Any] = {
            "pu_snr": scenario.pu_snr,
            "pu_capacity": pu_capacity(scenario.pu_snr),
            "pu_rate_target": scenario.pu_rate_target,
            "beta": scenario.beta,
            "decode_order": list(phys.effective_decode_order),
            "interference_gains": list(scenario.interference_gains),
            "budgets": list(scenario.budgets),
            "per_user_noise": list(result.per_user_noise),
            "diagonal_gains": list(result.diagonal_gains),
            "qr_orthogonality_error": orthogonality,
            "qr_reconstruction_error": reconstruction,
        }
        if preset is not None and order in (None, "default", "swapped"):
            published = preset_canonical(preset, "swapped" if order == "swapped" else "default")
            report["published_interference_gains"] = list(published.interference_gains)

        flags = {
            "scenario": scenario_path,
            "preset": preset,
            "order": order,
            "save_scenario": save_scenario,
        }
        header = self._header("canonical", flags, beta=scenario.beta)
        rows = [
            (
                k + 1,
                scenario.interference_gains[k],
                scenario.budgets[k],
                result.per_user_noise[k],
                result.diagonal_gains[k],
                scenario.interference_gains[k] * scenario.budgets[k],
            )
            for k in range(scenario.num_users)
        ]
        header.update(
            {
                "pu_snr": scenario.pu_snr,
                "pu_rate_target": scenario.pu_rate_target,
                "decode_order": " ".join(str(k) for k in phys.effective_decode_order),
                "qr_errors": f"{orthogonality:.3g} {reconstruction:.3g}",
            }
        )
        table = Table(
            columns=("user", "a", "P", "sigma2", "r_abs", "a_times_P"),
            rows=rows,
            header=header,
        )
        if not math.isfinite(scenario.beta):
            logger.info("PU rate target is zero; the interference constraint is inactive")
        extra = {} if save_scenario is None else {str(save_scenario): scenario_json(phys)}
        return CommandOutput(text=self._render(table, payload=report), extra_files=extra)
