import json
import logging
import os
import sys
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from .errors import ConfigError

load_dotenv()

SUBCOMMANDS = (
    "places", "reduce", "lpoly", "race", "density", "sympower",
    "ulmer", "ulmer-scan", "limitlaw", "twists", "schema",
)


class Config:
    # Work bounds
    MAX_RESIDUE_FIELD = int(os.getenv("FFRACE_MAX_RESIDUE_FIELD", "729"))
    MAX_FIELD_TABLE = int(os.getenv("FFRACE_MAX_FIELD_TABLE", "2187"))
    MAX_PLACE_DEGREE = int(os.getenv("FFRACE_MAX_PLACE_DEGREE", "12"))
    COUNT_LIMIT = int(os.getenv("FFRACE_COUNT_LIMIT", "2000000"))
    ULMER_MAX_D = int(os.getenv("FFRACE_ULMER_MAX_D", str(10 ** 12)))
    EXPAND_DEGREE = int(os.getenv("FFRACE_EXPAND_DEGREE", "512"))

    # Tolerances
    PURITY_TOL = float(os.getenv("FFRACE_PURITY_TOL", "1e-9"))
    ANGLE_TOL = float(os.getenv("FFRACE_ANGLE_TOL", "1e-8"))

    # Limit law
    GAUSSIAN_C = float(os.getenv("FFRACE_GAUSSIAN_C", "1.0"))
    CF_CAP = float(os.getenv("FFRACE_CF_CAP", "20000"))
    MC_BLOCK = int(os.getenv("FFRACE_MC_BLOCK", "10000"))

    # Twist surveys
    TWIST_MAX_Q = int(os.getenv("FFRACE_TWIST_MAX_Q", "9"))
    TWIST_MAX_D = int(os.getenv("FFRACE_TWIST_MAX_D", "4"))
    TWIST_SAMPLES = int(os.getenv("FFRACE_TWIST_SAMPLES", "20000"))

    # Execution
    THREADS = int(os.getenv("FFRACE_THREADS", "4"))
    SEED = int(os.getenv("FFRACE_SEED", "0"))

    # Output Settings
    OUTPUT_DIR = os.getenv("FFRACE_OUTPUT_DIR", "outputs")
    LOG_LEVEL = os.getenv("FFRACE_LOG_LEVEL", "INFO")


class RunConfig(BaseModel):
    """Validated knobs shared by every subcommand."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    subcommand: Literal[SUBCOMMANDS]
    curve_path: Optional[str] = None
    spectrum_path: Optional[str] = None
    max_residue_field: PositiveInt = Field(default_factory=lambda: Config.MAX_RESIDUE_FIELD)
    max_place_degree: PositiveInt = Field(default_factory=lambda: Config.MAX_PLACE_DEGREE)
    seed: int = Field(default_factory=lambda: Config.SEED, ge=0)
    output_format: Literal["json", "csv"] = "json"
    purity_tol: PositiveFloat = Field(default_factory=lambda: Config.PURITY_TOL)
    angle_tol: PositiveFloat = Field(default_factory=lambda: Config.ANGLE_TOL)
    threads: PositiveInt = Field(default_factory=lambda: Config.THREADS)

    @classmethod
    def from_file(cls, path: str, **overrides) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read run configuration {path}: {e}", path=path) from e
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


def configure_logging(level: Optional[str] = None) -> None:
    """Route library logs to stderr so stdout carries results only."""

    root = logging.getLogger("src")
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel((level or Config.LOG_LEVEL).upper())
