"""Bundled data files."""

from importlib.resources import files
from pathlib import Path


def fixture_path() -> Path:
    """Path of the bundled micro fixture (a handful of hand-checked knots)."""
    return Path(str(files(__package__) / "knots_micro.csv"))
