"""Tests for the output renderers."""

import json
import math

import numpy as np
import pytest

from src.output import (
    Series,
    Table,
    header_from_flags,
    render_json,
    render_svg,
    render_table,
    table_to_json,
    to_jsonable,
    write_output,
)


def _table() -> Table:
    return Table(
        columns=("alpha", "r", "ok"),
        rows=[((0.5, 0.5), 1.25, True), ((1.0, 0.0), math.nan, False)],
        header={"command": "boundary", "units": "rates in bit/s/Hz"},
    )


def test_csv_has_comment_header():
    lines = render_table(_table()).splitlines()
    assert lines[0] == "# command: boundary"
    assert lines[1] == "# units: rates in bit/s/Hz"
    assert lines[2] == "alpha,r,ok"
    assert lines[3] == "0.5 0.5,1.25,1"
    assert lines[4] == "1 0,nan,0"


def test_json_is_strict():
    document = json.loads(table_to_json(_table()))
    assert document["meta"]["command"] == "boundary"
    assert document["data"][0]["alpha"] == [0.5, 0.5]
    assert document["data"][1]["r"] is None


def test_to_jsonable():
    assert to_jsonable(np.array([1.0, np.inf])) == [1.0, None]
    assert to_jsonable(1 + 2j) == [1.0, 2.0]
    assert to_jsonable({"k": np.int64(3), "b": np.bool_(True)}) == {"k": 3, "b": True}
    assert json.loads(render_json([math.inf]))["data"] == [None]


def test_header_from_flags():
    header = header_from_flags("boundary", {"preset": 1, "sweep": 5, "hull": True, "alpha": None})
    assert header["flags"] == "--preset 1 --sweep 5 --hull"
    assert header["command"] == "boundary"


def test_write_output_creates_directories(tmp_path):
    path = tmp_path / "results" / "curve.csv"
    write_output("a,b\n", path)
    assert path.read_text() == "a,b\n"


def test_write_output_to_stdout(capsys):
    write_output("x\n", "-")
    assert capsys.readouterr().out == "x\n"


def test_svg_is_deterministic():
    pytest.importorskip("matplotlib")
    series = [Series(label="IGS", x=(0.0, 1.0, 2.0), y=(2.0, 1.5, 0.0))]
    first = render_svg(series, "R1", "R2", title="--preset 1")
    second = render_svg(series, "R1", "R2", title="--preset 1")
    assert first.lstrip().startswith("<?xml")
    assert first == second

