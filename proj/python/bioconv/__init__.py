"""Python interface to the bioconv C++ core."""

import json

from ._core import (
    ConfigError,
    FormatError,
    PicardDivergence,
    mms_case_names,
    mms_evaluate,
    mms_parameters,
    run_cli,
)
from . import _core

__all__ = [
    "ConfigError",
    "FormatError",
    "PicardDivergence",
    "certificate",
    "cli_json",
    "load_config",
    "mms_case_names",
    "mms_evaluate",
    "mms_parameters",
    "read_sidecar",
    "run_cli",
    "solve",
]


def load_config(path):
    """Validated config as a dict."""
    return json.loads(_core.config_json(str(path)))


def certificate(path):
    """Solvability certificate of a config as a dict."""
    return json.loads(_core.certificate_json(str(path)))


def solve(path):
    """Solve a config; fields are numpy arrays shaped (nz, ny, nx), report is a dict."""
    out = _core.solve(str(path))
    out["report"] = json.loads(out["report"])
    return out


def read_sidecar(path):
    """Fields of a .bioc sidecar as numpy arrays."""
    return _core.read_sidecar(str(path))


def cli_json(*args):
    """Run a subcommand with --json; returns (exit_code, envelope dict)."""
    code, out, err = run_cli([str(a) for a in args] + ["--json"])
    if not out.strip():
        raise RuntimeError(err.strip() or "no output")
    return code, json.loads(out)
