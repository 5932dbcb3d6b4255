"""Shared pieces of the command classes."""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict

from ..config import Config
from ..experiments import preset_canonical, preset_scenario
from ..output import (
    Series,
    Table,
    header_from_flags,
    render_json,
    render_svg,
    render_table,
    table_to_json,
)
from ..scenario_io import load_scenario
from ..solvers.base import DomainError
from ..solvers.canonicalize import CanonicalizationResult, PhysicalScenario, to_canonical
from ..solvers.model import CanonicalScenario

logger = logging.getLogger(__name__)


class CommandOutput(BaseModel):
    """Rendered command result; ``ok`` is False for a failed verification."""

    model_config = ConfigDict(frozen=True)

    text: str
    ok: bool = True
    extra_files: Dict[str, str] = {}


def parse_order(order: Optional[str], num_users: int) -> Optional[Tuple[int, ...]]:
    """'default' (user K first), 'swapped' (user 1 first) or a list like '2,1,3'."""
    if order is None or order == "default":
        return None
    if order == "swapped":
        return tuple(range(1, num_users + 1))
    try:
        return tuple(int(part) for part in order.split(","))
    except ValueError:
        raise DomainError(f"invalid decoding order '{order}'") from None


def parse_floats(text: str, name: str) -> Tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise DomainError(f"{name} must be a comma-separated list of numbers, got '{text}'") from None


class BaseCommands:
    """Config holder plus scenario loading and rendering helpers."""

    def __init__(self, config: Config):
        """Initialize commands with configuration."""
        self.config = config

    def _physical(
        self, scenario_path: Optional[Union[str, Path]], preset: Optional[int], order: Optional[str]
    ) -> PhysicalScenario:
        if (scenario_path is None) == (preset is None):
            raise DomainError("give exactly one of --scenario or --preset")
        if preset is not None:
            phys = preset_scenario(preset)
        else:
            phys = load_scenario(scenario_path)  # type: ignore[arg-type]
        if order is not None:
            phys = phys.with_decode_order(parse_order(order, phys.num_users))
        return phys

    def _canonicalize(self, phys: PhysicalScenario) -> CanonicalizationResult:
        return to_canonical(phys, rank_tol=self.config.rank_tol)

    def _canonical(
        self, scenario_path: Optional[Union[str, Path]], preset: Optional[int], order: Optional[str]
    ) -> CanonicalScenario:
        """Preset ids map to the published canonical gains; files are canonicalized."""
        if preset is not None and scenario_path is None and order in (None, "default", "swapped"):
            return preset_canonical(preset, "swapped" if order == "swapped" else "default")
        return self._canonicalize(self._physical(scenario_path, preset, order)).scenario

    def _render(
        self,
        table: Table,
        series: Sequence[Series] = (),
        xlabel: str = "",
        ylabel: str = "",
        payload: Any = None,
    ) -> str:
        fmt = self.config.output_format
        if fmt == "json":
            if payload is None:
                return table_to_json(table)
            return render_json(payload, table.header)
        if fmt == "svg":
            if not series:
                raise DomainError("this command has nothing to plot; use --format csv or json")
            return render_svg(series, xlabel, ylabel, title=str(table.header.get("flags", "")))
        return render_table(table)

    @staticmethod
    def _header(command: str, flags: Mapping[str, Any], **extra: Any) -> Dict[str, Any]:
        header = header_from_flags(command, flags)
        header.update(extra)
        return header
