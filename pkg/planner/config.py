"""Process settings read from the environment (optionally a .env file)."""

import os
from pathlib import Path

from dotenv import load_dotenv

API_KEY_ENV = "FLEET_PLANNER_API_KEY"
OUT_DIR_ENV = "FLEET_PLANNER_OUT_DIR"
ENVIRONMENT_ENV = "FLEET_PLANNER_ENV"


def load_environment(env_file: str | Path | None = None) -> None:
    """Load a .env file without overriding variables already set."""
    load_dotenv(env_file, override=False)


def api_key() -> str | None:
    return os.getenv(API_KEY_ENV)


def environment() -> str:
    return os.getenv(ENVIRONMENT_ENV, "development")


def out_dir(default: str | Path) -> Path:
    """The CLI output directory; the environment variable wins over the flag."""
    return Path(os.getenv(OUT_DIR_ENV) or default)
