#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Writers for series data (CSV) and run summaries (JSON)."""

from __future__ import annotations

import csv
import json
import logging
from importlib.metadata import PackageNotFoundError, version
from typing import TYPE_CHECKING, Any

import numpy as np

from openbath.quantum.lindblad_core import JumpTerm
from openbath.quantum.weak_coupling import MasterEquationSpec

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence
    from pathlib import Path

logger = logging.getLogger(__name__)


# - local functions --------------------------------
def _cell(value: Any) -> str:
    """Format one CSV cell, floats in their shortest round-trip form."""
    if isinstance(value, bool | np.bool_):
        return "1" if value else "0"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex | np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


# - exported functions -----------------------------
def write_csv(
    path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Write rows under a header line, in the given column order."""
    with path.open("w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
            writer.writerow([_cell(value) for value in row])
    logger.debug("wrote %s", path)
    return path


def write_summary(path: Path, summary: dict[str, Any]) -> Path:
    """Write a JSON summary with sorted keys."""
    path.write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n",
        encoding="utf-8",
    )
    logger.debug("wrote %s", path)
    return path


def package_versions() -> dict[str, str]:
    """Return the versions of openbath and its numerical stack."""
    res = {}
    for name in ("openbath", "numpy", "scipy", "h5py"):
        try:
            res[name] = version(name)
        except PackageNotFoundError:
            res[name] = "unknown"
    return res


def operator_to_json(op: np.ndarray) -> list[list[list[float]]]:
    """Return an operator as nested [re, im] pairs, row by row."""
    op = np.asarray(op, dtype=complex)
    return [[[float(val.real), float(val.imag)] for val in row] for row in op]


def operator_from_json(data: list[list[list[float]]]) -> np.ndarray:
    """Return the operator encoded by operator_to_json."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def master_equation_to_json(spec: MasterEquationSpec) -> dict[str, Any]:
    """Return the effective hamiltonian, Lamb shift and jumps as JSON data."""
    return {
        "hbar": spec.hbar,
        "h_eff": operator_to_json(spec.h_eff),
        "lamb_shift": operator_to_json(spec.lamb_shift),
        "jumps": [
            {"rate": jump.rate, "operator": operator_to_json(jump.operator)}
            for jump in spec.jumps
        ],
    }


def master_equation_from_json(data: dict[str, Any]) -> MasterEquationSpec:
    """Return the master equation encoded by master_equation_to_json."""
    return MasterEquationSpec(
        h_eff=operator_from_json(data["h_eff"]),
        jumps=tuple(
            JumpTerm(operator_from_json(item["operator"]), float(item["rate"]))
            for item in data["jumps"]
        ),
        lamb_shift=operator_from_json(data["lamb_shift"]),
        hbar=float(data["hbar"]),
    )
