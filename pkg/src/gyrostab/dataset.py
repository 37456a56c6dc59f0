"""Locating and loading the shipped dataset files."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from . import rdb
from .errors import GyrostabError

ENV_VAR = "GYROSTAB_DB"
FILES = ("toda.rdb", "cases.rdb")


def dataset_texts(db_dir: str | None = None) -> dict[str, str]:
    """Read the dataset files from --db, $GYROSTAB_DB, or the installed data."""
    directory = db_dir or os.environ.get(ENV_VAR)
    if directory:
        base = Path(directory)
        out = {}
        for name in FILES:
            path = base / name
            if not path.is_file():
                raise GyrostabError(f"dataset file not found: {path}")
            out[name] = path.read_text(encoding="utf-8")
        return out
    data = resources.files("gyrostab").joinpath("data")
    return {name: data.joinpath(name).read_text(encoding="utf-8") for name in FILES}


def load(db_dir: str | None = None) -> rdb.Database:
    """Parse the dataset, raising on any parse error."""
    texts = dataset_texts(db_dir)
    db, errors = rdb.parse_files(*(texts[name] for name in FILES))
    if errors:
        listing = "\n".join(str(e) for e in errors)
        raise GyrostabError(f"dataset failed to parse:\n{listing}")
    return db
