"""Configuration module for igs-smac."""

import os
import sys
import logging
from typing import Any, Callable, Dict, Literal, Optional, Tuple
from pydantic import BaseModel, Field, ValidationError, field_validator
from dotenv import load_dotenv

from .solvers.base import ConfigurationError

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

OutputFormat = Literal["csv", "json", "svg"]


class Config(BaseModel):
    """Solver and experiment settings shared by every command."""

    log_level: str = Field(default="INFO")
    workers: int = Field(default=1, ge=1, le=256)
    bisection_tol: float = Field(default=1e-8, gt=0.0, le=1e-2)
    bisection_max_iter: int = Field(default=60, ge=1, le=200)
    rank_tol: float = Field(default=1e-12, gt=0.0, lt=1.0)
    fixed_user_tol: float = Field(default=1e-9, gt=0.0, lt=1.0)
    seed: int = Field(default=2017, ge=0)
    trials: int = Field(default=200, ge=1)
    output_format: OutputFormat = Field(default="csv")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Log level must be one of: {', '.join(valid_levels)}")
        return v_upper

    @field_validator("output_format", mode="before")
    @classmethod
    def normalize_format(cls, v: Any) -> Any:
        return v.lower() if isinstance(v, str) else v

    def with_overrides(self, **overrides: Any) -> "Config":
        """Copy with CLI flag values applied; ``None`` means "not given"."""
        values = self.model_dump()
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return Config(**values)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid option: {_first_error(e)}") from e


# Environment variable -> (field, parser)
_ENV_FIELDS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "IGS_LOG_LEVEL": ("log_level", str),
    "IGS_WORKERS": ("workers", int),
    "IGS_BISECTION_TOL": ("bisection_tol", float),
    "IGS_BISECTION_MAX_ITER": ("bisection_max_iter", int),
    "IGS_RANK_TOL": ("rank_tol", float),
    "IGS_FIXED_USER_TOL": ("fixed_user_tol", float),
    "IGS_SEED": ("seed", int),
    "IGS_TRIALS": ("trials", int),
    "IGS_OUTPUT_FORMAT": ("output_format", str),
}


def _first_error(error: ValidationError) -> str:
    details = error.errors()[0]
    location = ".".join(str(part) for part in details.get("loc", ()))
    return f"{location}: {details.get('msg', 'invalid value')}" if location else details["msg"]


def load_config(environ: Optional[Dict[str, str]] = None) -> Config:
    """
    Load configuration from environment variables.

    Args:
        environ: Mapping to read instead of ``os.environ`` (tests)

    Returns:
        Configured Config object

    Raises:
        ConfigurationError: If a variable cannot be parsed or is out of range
    """
    env = os.environ if environ is None else environ
    values: Dict[str, Any] = {}

    for name, (field, parse) in _ENV_FIELDS.items():
        raw = env.get(name)
        if raw is None or raw.strip() == "":
            continue
        try:
            values[field] = parse(raw.strip())
        except ValueError:
            raise ConfigurationError(
                f"Environment variable {name}={raw!r} is not a valid {parse.__name__}"
            ) from None

    try:
        config = Config(**values)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {_first_error(e)}") from e

    logger.debug(f"Configuration loaded: {config.model_dump()}")
    return config


# Configure logging
def setup_logging(config: Config) -> None:
    """Set up logging on stderr so stdout stays machine-readable."""
    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
        force=True,
    )
