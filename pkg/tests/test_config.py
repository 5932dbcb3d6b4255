"""Tests for environment-driven configuration."""

import logging

import pytest

from src.config import Config, load_config, setup_logging
from src.solvers.base import ConfigurationError


def test_defaults():
    config = load_config({})
    assert config.workers == 1
    assert config.bisection_tol == 1e-8
    assert config.seed == 2017
    assert config.output_format == "csv"


def test_environment_values():
    config = load_config(
        {
            "IGS_WORKERS": "4",
            "IGS_SEED": " 7 ",
            "IGS_OUTPUT_FORMAT": "JSON",
            "IGS_LOG_LEVEL": "debug",
            "IGS_TRIALS": "",
        }
    )
    assert config.workers == 4
    assert config.seed == 7
    assert config.output_format == "json"
    assert config.log_level == "DEBUG"
    assert config.trials == 200


@pytest.mark.parametrize(
    "environ",
    [
        {"IGS_WORKERS": "four"},
        {"IGS_WORKERS": "0"},
        {"IGS_LOG_LEVEL": "LOUD"},
        {"IGS_BISECTION_TOL": "0.5"},
        {"IGS_OUTPUT_FORMAT": "xml"},
    ],
)
def test_invalid_values(environ):
    with pytest.raises(ConfigurationError):
        load_config(environ)


def test_overrides():
    config = Config().with_overrides(seed=None, workers=3)
    assert config.seed == 2017
    assert config.workers == 3
    with pytest.raises(ConfigurationError):
        Config().with_overrides(bisection_tol=-1.0)


def test_setup_logging():
    setup_logging(Config(log_level="WARNING"))
    assert logging.getLogger().level == logging.WARNING
