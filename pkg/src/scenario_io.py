"""Scenario JSON reader and writer.

Complex numbers are stored as ``[re, im]`` pairs (a plain number is real);
the channel matrix is a list of rows, one per base-station antenna.  Field
names follow ``PhysicalScenario``.  Instead of ``pu_rate_target`` a file may
give ``pu_rate_fraction``, a share of the PU capacity in (0, 1].
"""

import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    ValidationError,
    ValidationInfo,
    field_validator,
    model_validator,
)

from .solvers.base import DomainError, ScenarioFormatError
from .solvers.canonicalize import PhysicalScenario, capacity_fraction_target

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ComplexPair = Tuple[float, float]


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _as_pair(value: Any, where: str) -> ComplexPair:
    if _is_number(value):
        return (float(value), 0.0)
    if isinstance(value, list) and len(value) == 2 and all(_is_number(x) for x in value):
        return (float(value[0]), float(value[1]))
    raise ValueError(f"{where}: expected a complex number as [re, im], got {value!r}")


def _as_pairs(value: Any, where: str) -> List[ComplexPair]:
    if not isinstance(value, list):
        raise ValueError(f"{where}: expected a list of [re, im] pairs")
    return [_as_pair(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _pair(z: complex) -> ComplexPair:
    return (float(z.real), float(z.imag))


class ScenarioFile(BaseModel):
    """On-disk form of a scenario."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    pu_direct: ComplexPair
    pu_power: float
    su_cross: List[ComplexPair]
    su_direct_matrix: List[List[ComplexPair]]
    pu_to_bs: List[ComplexPair]
    su_budgets: List[float]
    pu_noise_var: float = 1.0
    bs_noise_var: float = 1.0
    pu_rate_target: Optional[float] = None
    pu_rate_fraction: Optional[float] = None
    decode_order: Optional[List[int]] = None

    @field_validator("pu_direct", mode="before")
    @classmethod
    def validate_scalar(cls, v: Any) -> ComplexPair:
        return _as_pair(v, "pu_direct")

    @field_validator("su_cross", "pu_to_bs", mode="before")
    @classmethod
    def validate_vector(cls, v: Any, info: ValidationInfo) -> List[ComplexPair]:
        return _as_pairs(v, str(info.field_name))

    @field_validator("su_direct_matrix", mode="before")
    @classmethod
    def validate_matrix(cls, v: Any) -> List[List[ComplexPair]]:
        if not isinstance(v, list) or not v:
            raise ValueError("expected a non-empty list of rows")
        rows = [_as_pairs(row, f"row {i}") for i, row in enumerate(v)]
        if len({len(row) for row in rows}) != 1:
            raise ValueError("rows have different lengths")
        return rows

    @model_validator(mode="after")
    def validate_target(self) -> "ScenarioFile":
        if self.pu_rate_target is None and self.pu_rate_fraction is None:
            raise ValueError("give either pu_rate_target or pu_rate_fraction")
        if self.pu_rate_target is not None and self.pu_rate_fraction is not None:
            raise ValueError("give only one of pu_rate_target and pu_rate_fraction")
        return self

    def to_physical(self) -> PhysicalScenario:
        pu_direct = complex(*self.pu_direct)
        target = self.pu_rate_target
        if target is None:
            fraction = float(self.pu_rate_fraction)  # type: ignore[arg-type]
            target = capacity_fraction_target(self.pu_power, pu_direct, self.pu_noise_var, fraction)
        return PhysicalScenario(
            pu_direct=pu_direct,
            pu_power=self.pu_power,
            su_cross=[complex(*z) for z in self.su_cross],
            su_direct_matrix=[[complex(*z) for z in row] for row in self.su_direct_matrix],
            pu_to_bs=[complex(*z) for z in self.pu_to_bs],
            su_budgets=tuple(self.su_budgets),
            pu_noise_var=self.pu_noise_var,
            bs_noise_var=self.bs_noise_var,
            pu_rate_target=target,
            decode_order=None if self.decode_order is None else tuple(self.decode_order),
        )

    @classmethod
    def from_physical(cls, phys: PhysicalScenario) -> "ScenarioFile":
        return cls(
            pu_direct=_pair(phys.pu_direct),
            pu_power=phys.pu_power,
            su_cross=[_pair(z) for z in phys.su_cross],
            su_direct_matrix=[[_pair(z) for z in row] for row in phys.su_direct_matrix],
            pu_to_bs=[_pair(z) for z in phys.pu_to_bs],
            su_budgets=list(phys.su_budgets),
            pu_noise_var=phys.pu_noise_var,
            bs_noise_var=phys.bs_noise_var,
            pu_rate_target=phys.pu_rate_target,
            decode_order=None if phys.decode_order is None else list(phys.decode_order),
        )


def _describe(error: ValidationError) -> str:
    messages = []
    for details in error.errors():
        location = ".".join(str(part) for part in details.get("loc", ()))
        message = details.get("msg", "invalid value")
        messages.append(f"{location}: {message}" if location else message)
    return "; ".join(messages)


def parse_scenario(text: str, source: str = "<string>") -> PhysicalScenario:
    """Build a PhysicalScenario from JSON text.

    Raises:
        ScenarioFormatError: malformed JSON, missing or unknown fields, invalid values
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{source}: {e.msg}", line=e.lineno, column=e.colno) from e
    try:
        scenario = ScenarioFile.model_validate(data).to_physical()
    except ValidationError as e:
        raise ScenarioFormatError(f"{source}: {_describe(e)}") from e
    except DomainError as e:
        raise ScenarioFormatError(f"{source}: {e}") from e

    logger.debug(
        f"Loaded scenario from {source}: K={scenario.num_users}, N={scenario.num_antennas}"
    )
    return scenario


def load_scenario(path: PathLike) -> PhysicalScenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioFormatError(f"cannot read scenario file {path}: {e.strerror}") from e
    return parse_scenario(text, source=str(path))


def scenario_to_dict(phys: PhysicalScenario) -> dict:
    """JSON-ready mapping; fields left at ``None`` are omitted."""
    return ScenarioFile.from_physical(phys).model_dump(mode="json", exclude_none=True)


def scenario_json(phys: PhysicalScenario) -> str:
    """Scenario file text that parse_scenario reads back unchanged."""
    return json.dumps(scenario_to_dict(phys), indent=2) + "\n"
