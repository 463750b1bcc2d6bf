"""Deterministic CSV/JSON emission for experiment outputs.

Floats are written with repr so identical runs produce byte-identical
files; JSON objects carry the run configuration and the tool version but
never timestamps.
"""

import json
import sys

from . import __version__


def format_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def json_text(subcommand: str, config: dict, results) -> str:
    payload = {
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "results": results,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def emit(content: str, path: str | None) -> None:
    """Write to path, or echo to stdout when no path was given."""
    if path is None:
        sys.stdout.write(content)
    else:
        with open(path, "w") as fh:
            fh.write(content)
