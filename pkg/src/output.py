"""CSV, JSON and SVG renderers for command results.

Every output is self-describing: CSV starts with ``#`` comment lines, JSON
carries a ``meta`` object, SVG plots carry a title.  Renderers return text;
``write_output`` sends it to a file or stdout.
"""

import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .solvers.base import ConfigurationError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".10g"


class Table(BaseModel):
    """Rows of scalars plus header metadata."""

    model_config = ConfigDict(frozen=True)

    columns: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = Field(default_factory=list)
    header: Dict[str, Any] = Field(default_factory=dict)


class Series(BaseModel):
    """One polyline of a plot."""

    model_config = ConfigDict(frozen=True)

    label: str
    x: Tuple[float, ...]
    y: Tuple[float, ...]
    style: str = "-"


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(v) for v in value)
    if value is None:
        return ""
    return str(value)


def render_table(table: Table) -> str:
    buffer = io.StringIO()
    for key, value in table.header.items():
        buffer.write(f"# {key}: {_cell(value)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    return value


def render_json(payload: Any, meta: Optional[Mapping[str, Any]] = None) -> str:
    document = {"meta": to_jsonable(dict(meta or {})), "data": to_jsonable(payload)}
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def table_to_json(table: Table) -> str:
    records = [dict(zip(table.columns, row)) for row in table.rows]
    return render_json(records, table.header)


def render_svg(
    series: Sequence[Series],
    xlabel: str,
    ylabel: str,
    title: str = "",
    equal_axes: bool = False,
) -> str:
    """Line plot as SVG text (needs the ``plot`` extra)."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise ConfigurationError(
            "SVG output needs matplotlib; install with `pip install igs-smac[plot]`"
        ) from e

    plt.rcParams["svg.hashsalt"] = "igs-smac"
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        for s in series:
            ax.plot(s.x, s.y, s.style, label=s.label, linewidth=1.2, markersize=3)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title, fontsize=9)
        if equal_axes:
            ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlim(left=0.0)
        ax.set_ylim(bottom=0.0)
        ax.spines["right"].set_visible(False)
        ax.spines["top"].set_visible(False)
        ax.grid(True, linewidth=0.3)
        if len(series) > 1:
            ax.legend(fontsize=8, frameon=False)
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", bbox_inches="tight", metadata={"Date": None})
    finally:
        plt.close(fig)
    return buffer.getvalue()


def write_output(text: str, path: Optional[Union[str, Path]] = None) -> None:
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {len(text)} characters to {path}")


def header_from_flags(command: str, flags: Mapping[str, Any]) -> Dict[str, Any]:
    """Standard header: command, the exact flag set and rate units."""
    shown: List[str] = []
    for key, value in flags.items():
        if value is None or value is False:
            continue
        option = "--" + key.replace("_", "-")
        shown.append(option if value is True else f"{option} {_cell(value)}")
    return {"command": command, "flags": " ".join(shown), "units": "rates in bit/s/Hz"}
