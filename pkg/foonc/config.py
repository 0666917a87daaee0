import json
import os
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from foonc.errors import ConfigError

load_dotenv()

CONFIG_ENV_VAR = "FOONC_CONFIG"
DATABASE_ENV_VAR = "FOONC_DATABASE_URL"

BASE_DIR = Path(__file__).resolve().parent
DATA_DIR = BASE_DIR / "data"

HEURISTICS = ("hmax", "hff", "blind")


class Settings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # paths
    foon: List[Path] = Field(default_factory=list)
    kitchen: Optional[Path] = None
    scene: Optional[Path] = None
    library: Optional[Path] = None
    categories: Optional[Path] = None
    out_dir: Path = Path("out")

    goal: Optional[str] = None

    # planner
    heuristic: str = "hmax"
    node_budget: int = Field(default=10**6, ge=1)
    external_planner_cmd: Optional[str] = None

    # scenes / trials
    seed: int = Field(default=0, ge=0)
    upside_down_probability: float = Field(default=0.25, ge=0.0, le=1.0)
    stack_probability: float = Field(default=0.3, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)

    # bench
    n_range: Optional[List[int]] = None
    trials: int = Field(default=10, ge=1)
    heuristics: List[str] = Field(default_factory=lambda: ["hmax", "hff"])

    database_url: Optional[str] = None

    @field_validator("heuristic")
    @classmethod
    def _known_heuristic(cls, value):
        if value not in HEURISTICS:
            raise ValueError(f"unknown heuristic {value!r}")
        return value

    @field_validator("heuristics")
    @classmethod
    def _known_heuristics(cls, value):
        for name in value:
            if name not in HEURISTICS:
                raise ValueError(f"unknown heuristic {name!r}")
        return value


def load_settings(path=None, overrides=None):
    """Build settings from defaults, an optional JSON config file and overrides.

    The config file defaults to the path in $FOONC_CONFIG.
    Overrides with value None are ignored so unset CLI flags keep file values.
    """
    data = {}
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")

    if "database_url" not in data and os.environ.get(DATABASE_ENV_VAR):
        data["database_url"] = os.environ[DATABASE_ENV_VAR]

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    try:
        return Settings(**data)
    except ValidationError as e:
        raise ConfigError(str(e))


def validate_paths(settings, required=()):
    """Check every configured input path before any stage runs."""
    for name in required:
        value = getattr(settings, name)
        if value in (None, []):
            raise ConfigError(f"missing required setting: {name}")

    paths = list(settings.foon)
    for name in ("kitchen", "scene", "library", "categories"):
        value = getattr(settings, name)
        if value is not None:
            paths.append(value)
    for path in paths:
        if not Path(path).is_file():
            raise ConfigError(f"file not found: {path}")
